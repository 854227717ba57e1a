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

#ifndef GIBBSPROBE_SAMPLER_H
#define GIBBSPROBE_SAMPLER_H

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gibbsprobe/model.h"

namespace gibbsprobe {

/// Distribution of the per-sample field noise u_i (zero mean, unit variance):
/// binary draws u_i = +-1, uniform draws u_i in [-sqrt(3), sqrt(3)].
enum class NoiseKind { kBinary, kUniform };

/// Per-spin field temperatures, persistent biases and noise amplitudes, plus
/// per-edge coupling temperatures of a noisy Gibbs sampler. Conditioned on a
/// noise draw u the sampler emits configurations from
///
///     H(s | u) = sum_i beta_i (h_i + h_bias_i + h_sd_i u_i) s_i + sum_ij beta_ij J_ij s_i s_j.
struct NoiseSpec {
    std::vector<double> beta_field;
    std::vector<double> h_bias;
    std::vector<double> h_sd;
    std::map<std::pair<int, int>, double> beta_edge;
    double default_beta_edge = 1.0;
    NoiseKind kind = NoiseKind::kBinary;

    int n_spins() const {
        return static_cast<int>(beta_field.size());
    }
    /// Throws InvariantError unless all betas are > 0, h_sd >= 0 and lengths agree.
    void validate() const;
    /// beta_ij for the edge (i, j), falling back to default_beta_edge.
    double edge_beta(int i, int j) const;

    /// Noise-free spec with every temperature equal to `beta`.
    static NoiseSpec uniform(int n_spins, double beta);
};

NoiseSpec parse_noise_json(const std::string &text, const std::string &source = "<string>");
std::string noise_to_json(const NoiseSpec &noise);
NoiseSpec read_noise(const std::string &path);
void write_noise(const NoiseSpec &noise, const std::string &path);

struct SampleRecord {
    uint64_t bits;
    uint64_t count;
    bool operator==(const SampleRecord &other) const = default;
};

/// Observed configurations with multiplicities. Records are kept sorted by
/// packed configuration with duplicates merged, so equal sample multisets
/// compare equal regardless of draw order.
class SampleSet {
   public:
    SampleSet(int n_spins, std::vector<SampleRecord> records);

    /// One packed configuration per draw.
    static SampleSet from_draws(int n_spins, std::span<const uint64_t> draws);
    /// Dense counts indexed by packed configuration (zeros skipped).
    static SampleSet from_dense_counts(int n_spins, std::span<const uint64_t> counts);

    int n_spins() const {
        return n_spins_;
    }
    const std::vector<SampleRecord> &records() const {
        return records_;
    }
    uint64_t total() const {
        return total_;
    }
    uint64_t count(uint64_t bits) const;

    /// Empirical frequencies over all 2^n configurations.
    std::vector<double> frequencies() const;

    /// Free-form provenance (seed, source, model hash, batches, ...).
    std::map<std::string, std::string> meta;

    bool operator==(const SampleSet &other) const = default;

   private:
    int n_spins_;
    std::vector<SampleRecord> records_;
    uint64_t total_ = 0;
};

/// Text sample file. Counted form:
///
///     spins=<n> total=<M>
///     # key=value            (optional provenance lines)
///     +-+- 12
///
/// where character i of the configuration string is spin i. Files without the
/// header are read as raw one-configuration-per-line data, each line either a
/// +/- string or whitespace-separated +1/-1 integers.
SampleSet parse_samples(const std::string &text, const std::string &source = "<string>");
std::string samples_to_text(const SampleSet &samples);
SampleSet read_samples(const std::string &path);
void write_samples(const SampleSet &samples, const std::string &path);

/// Spin-reversal gauge tau in {-1, +1}^n.
class GaugeVector {
   public:
    explicit GaugeVector(std::vector<int> values);
    static GaugeVector from_flip_mask(uint64_t mask, int n_spins);

    int size() const {
        return static_cast<int>(values_.size());
    }
    int operator[](int i) const {
        return values_[i];
    }
    /// Bit i set <=> tau_i = -1.
    uint64_t flip_mask() const;

   private:
    std::vector<int> values_;
};

/// Noisy model for one noise realization s in {-1, +1}^n: field terms
/// beta_i (h_sd_i s_i + h_bias_i + h_i), edge terms beta_ij J_ij.
/// The input may only contain fields and pairwise couplings.
GibbsModel effective_noisy_model(const GibbsModel &input, const NoiseSpec &noise,
                                 std::span<const int> realization);

/// Same with real-valued unit noise draws u_i (field term beta_i (h_sd_i u_i + h_bias_i + h_i)).
GibbsModel effective_noisy_model_at(const GibbsModel &input, const NoiseSpec &noise,
                                    std::span<const double> unit_noise);

/// Limit on noise realizations times configurations evaluated by one mixture.
inline constexpr uint64_t kMaxMixtureWork = uint64_t{1} << 28;

/// Output distribution of the noisy sampler averaged over the noise. Binary noise is
/// summed exactly over the 2^k sign patterns of the k spins with h_sd > 0; uniform
/// noise uses a 16-node Gauss-Legendre rule per noisy spin. The result stores
/// probabilities directly and has log_partition = 0.
ExactDistribution noisy_mixture_distribution(const GibbsModel &input, const NoiseSpec &noise,
                                             int cap = kDefaultEnumerationCap);

/// M i.i.d. inverse-CDF draws from `dist`. Deterministic in `seed`.
SampleSet sample_exact(const ExactDistribution &dist, uint64_t num_samples, uint64_t seed);

/// M draws from the noisy sampler: each draw takes a fresh noise realization
/// and then one configuration from the conditional Gibbs distribution.
SampleSet sample_noisy(const GibbsModel &input, const NoiseSpec &noise, uint64_t num_samples,
                       uint64_t seed, int cap = kDefaultEnumerationCap);

/// h_K -> h_K prod_{i in K} tau_i (fields pick up tau_i, couplings tau_i tau_j).
GibbsModel apply_gauge(const GibbsModel &model, const GaugeVector &tau);

/// s_i -> s_i tau_i on every record.
SampleSet apply_gauge_samples(const SampleSet &samples, const GaugeVector &tau);

/// Maps each configuration s to s * tau (probabilities move with the configuration).
ExactDistribution apply_gauge_distribution(const ExactDistribution &dist, const GaugeVector &tau);

struct SrtOptions {
    /// Exact enumeration of all 2^n gauges up to this many spins.
    int cap_gauge = 12;
    /// Random gauges drawn above cap_gauge.
    int num_random_gauges = 1024;
    uint64_t seed = 1;
    int cap = kDefaultEnumerationCap;
};

struct SrtResult {
    ExactDistribution dist;
    bool exact = true;
    /// Largest per-configuration standard error of the gauge average (0 when exact).
    double max_standard_error = 0.0;
    int num_gauges = 0;
};

/// Output distribution of the noisy sampler run under spin-reversal transforms:
/// the average over gauges tau of the noisy mixture for apply_gauge(input, tau),
/// mapped back through tau. Persistent biases and noise act in the device frame.
SrtResult srt_effective_distribution(const GibbsModel &input, const NoiseSpec &noise,
                                     const SrtOptions &options = {});

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_SAMPLER_H
