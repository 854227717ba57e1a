// Copyright 2026 The gibbsprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GIBBSPROBE_MODEL_H
#define GIBBSPROBE_MODEL_H

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gibbsprobe {

/// Largest spin count the library handles; configurations are packed into uint64_t.
inline constexpr int kMaxSpins = 64;

/// Default cap for exhaustive enumeration over 2^n configurations.
inline constexpr int kDefaultEnumerationCap = 20;

/// Sorted, duplicate-free tuple of spin indices naming one interaction term.
using TermKey = std::vector<int>;

/// Bit mask of the spins in `key` (bit i set <=> spin i in key).
uint64_t term_mask(std::span<const int> key);

/// Formats a key as "0-3-5".
std::string format_key(std::span<const int> key);

/// Sparse multi-body energy function over n binary spins:
///
///     H(s) = sum_K coefficient(K) * prod_{i in K} s_i,     mu(s) ~ exp(+H(s)).
///
/// Keys are strictly increasing index tuples of length >= 1 and a missing key
/// means a zero coefficient. Temperatures are not part of the model.
class GibbsModel {
   public:
    using TermMap = std::map<TermKey, double>;

    explicit GibbsModel(int n_spins);
    /// Validates every key and value; throws InvariantError on violation.
    GibbsModel(int n_spins, TermMap terms);

    int n_spins() const {
        return n_spins_;
    }
    const TermMap &terms() const {
        return terms_;
    }
    /// Length of the longest key, 0 for an empty model.
    int order() const;

    double coefficient(const TermKey &key) const;

    /// Sets (overwrites) one coefficient after validating the key.
    void set(const TermKey &key, double value);
    /// Adds to one coefficient after validating the key.
    void add(const TermKey &key, double value);

    bool operator==(const GibbsModel &other) const = default;

   private:
    void check_key(const TermKey &key) const;

    int n_spins_;
    TermMap terms_;
};

/// A configuration of +-1 spins.
class SpinConfig {
   public:
    explicit SpinConfig(std::vector<int> values);

    /// Little-endian unpacking: bit i set <=> spin i is +1.
    static SpinConfig from_bits(uint64_t bits, int n_spins);

    int size() const {
        return static_cast<int>(values_.size());
    }
    int operator[](int i) const {
        return values_[i];
    }
    const std::vector<int> &values() const {
        return values_;
    }
    uint64_t bits() const;

    bool operator==(const SpinConfig &other) const = default;

   private:
    std::vector<int> values_;
};

/// Probabilities of all 2^n configurations, indexed by the packed bit pattern.
struct ExactDistribution {
    int n_spins = 0;
    std::vector<double> probs;
    double log_partition = 0.0;

    /// E[prod_{i in mask} s_i].
    double correlation(uint64_t mask) const;
    double mean(int spin) const {
        return correlation(uint64_t{1} << spin);
    }
};

double energy(const GibbsModel &model, const SpinConfig &config);

/// Energy of a packed configuration. Requires n_spins <= kMaxSpins.
double energy_bits(const GibbsModel &model, uint64_t bits);

/// Energies of all 2^n packed configurations, in index order.
std::vector<double> all_energies(const GibbsModel &model);

/// Exact Gibbs distribution by enumeration, with a max-shifted log-sum-exp
/// for the partition function. Throws CapExceededError above `cap` spins.
ExactDistribution exact_distribution(const GibbsModel &model, int cap = kDefaultEnumerationCap);

/// Normalizes arbitrary log-weights into an ExactDistribution.
ExactDistribution distribution_from_log_weights(int n_spins, std::span<const double> log_weights);

/// JSON model file: {"n_spins": n, "terms": [{"spins": [i, ...], "value": v}, ...]}.
/// The reader rejects unsorted or duplicate keys instead of normalizing them.
GibbsModel parse_model_json(const std::string &text, const std::string &source = "<string>");
std::string model_to_json(const GibbsModel &model);
GibbsModel read_model(const std::string &path);
void write_model(const GibbsModel &model, const std::string &path);

/// Stable 64-bit FNV-1a fingerprint of the model's JSON form, as 16 hex digits.
std::string model_fingerprint(const GibbsModel &model);

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_MODEL_H
