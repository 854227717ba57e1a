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

#include "gibbsprobe/model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gibbsprobe/errors.h"
#include "json.hpp"

namespace gibbsprobe {

namespace {

struct CompiledTerms {
    std::vector<uint64_t> masks;
    std::vector<double> values;

    explicit CompiledTerms(const GibbsModel &model) {
        masks.reserve(model.terms().size());
        values.reserve(model.terms().size());
        for (const auto &[key, value] : model.terms()) {
            masks.push_back(term_mask(key));
            values.push_back(value);
        }
    }

    double energy(uint64_t bits) const {
        double e = 0.0;
        for (size_t t = 0; t < masks.size(); t++) {
            // Odd number of -1 spins in the term flips its sign.
            e += (std::popcount(masks[t] & ~bits) & 1) ? -values[t] : values[t];
        }
        return e;
    }
};

}  // namespace

uint64_t term_mask(std::span<const int> key) {
    uint64_t mask = 0;
    for (int i : key) {
        mask |= uint64_t{1} << i;
    }
    return mask;
}

std::string format_key(std::span<const int> key) {
    std::string out;
    for (size_t k = 0; k < key.size(); k++) {
        if (k) {
            out += '-';
        }
        out += std::to_string(key[k]);
    }
    return out;
}

GibbsModel::GibbsModel(int n_spins) : n_spins_(n_spins) {
    if (n_spins < 1 || n_spins > kMaxSpins) {
        throw InvariantError("n_spins must lie in [1, " + std::to_string(kMaxSpins) + "], got " +
                             std::to_string(n_spins));
    }
}

GibbsModel::GibbsModel(int n_spins, TermMap terms) : GibbsModel(n_spins) {
    for (const auto &[key, value] : terms) {
        check_key(key);
        if (!std::isfinite(value)) {
            throw InvariantError("non-finite coefficient for term " + format_key(key));
        }
    }
    terms_ = std::move(terms);
}

void GibbsModel::check_key(const TermKey &key) const {
    if (key.empty()) {
        throw InvariantError("empty term key");
    }
    for (size_t k = 0; k < key.size(); k++) {
        if (key[k] < 0 || key[k] >= n_spins_) {
            throw InvariantError("spin index " + std::to_string(key[k]) + " outside [0, " +
                                 std::to_string(n_spins_) + ") in term " + format_key(key));
        }
        if (k > 0 && key[k] <= key[k - 1]) {
            throw InvariantError("term key " + format_key(key) +
                                 " is not strictly increasing");
        }
    }
}

int GibbsModel::order() const {
    size_t order = 0;
    for (const auto &entry : terms_) {
        order = std::max(order, entry.first.size());
    }
    return static_cast<int>(order);
}

double GibbsModel::coefficient(const TermKey &key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? 0.0 : it->second;
}

void GibbsModel::set(const TermKey &key, double value) {
    check_key(key);
    if (!std::isfinite(value)) {
        throw InvariantError("non-finite coefficient for term " + format_key(key));
    }
    terms_[key] = value;
}

void GibbsModel::add(const TermKey &key, double value) {
    set(key, coefficient(key) + value);
}

SpinConfig::SpinConfig(std::vector<int> values) : values_(std::move(values)) {
    for (int v : values_) {
        if (v != 1 && v != -1) {
            throw InvariantError("spin values must be +1 or -1, got " + std::to_string(v));
        }
    }
}

SpinConfig SpinConfig::from_bits(uint64_t bits, int n_spins) {
    std::vector<int> values(n_spins);
    for (int i = 0; i < n_spins; i++) {
        values[i] = ((bits >> i) & 1) ? 1 : -1;
    }
    return SpinConfig(std::move(values));
}

uint64_t SpinConfig::bits() const {
    if (size() > kMaxSpins) {
        throw DimensionError("configuration too long to pack");
    }
    uint64_t bits = 0;
    for (int i = 0; i < size(); i++) {
        if (values_[i] == 1) {
            bits |= uint64_t{1} << i;
        }
    }
    return bits;
}

double ExactDistribution::correlation(uint64_t mask) const {
    double total = 0.0;
    for (size_t c = 0; c < probs.size(); c++) {
        total += (std::popcount(mask & ~static_cast<uint64_t>(c)) & 1) ? -probs[c] : probs[c];
    }
    return total;
}

double energy(const GibbsModel &model, const SpinConfig &config) {
    if (config.size() != model.n_spins()) {
        throw DimensionError("configuration has " + std::to_string(config.size()) +
                             " spins, model has " + std::to_string(model.n_spins()));
    }
    double e = 0.0;
    for (const auto &[key, value] : model.terms()) {
        int sign = 1;
        for (int i : key) {
            sign *= config[i];
        }
        e += sign * value;
    }
    return e;
}

double energy_bits(const GibbsModel &model, uint64_t bits) {
    return CompiledTerms(model).energy(bits);
}

std::vector<double> all_energies(const GibbsModel &model) {
    const CompiledTerms compiled(model);
    const uint64_t n_states = uint64_t{1} << model.n_spins();
    std::vector<double> energies(n_states);
    for (uint64_t c = 0; c < n_states; c++) {
        energies[c] = compiled.energy(c);
    }
    return energies;
}

ExactDistribution distribution_from_log_weights(int n_spins, std::span<const double> log_weights) {
    if (log_weights.size() != (size_t{1} << n_spins)) {
        throw DimensionError("expected 2^n log-weights");
    }
    const double shift = *std::max_element(log_weights.begin(), log_weights.end());
    ExactDistribution dist;
    dist.n_spins = n_spins;
    dist.probs.resize(log_weights.size());
    double total = 0.0;
    for (size_t c = 0; c < log_weights.size(); c++) {
        dist.probs[c] = std::exp(log_weights[c] - shift);
        total += dist.probs[c];
    }
    for (double &p : dist.probs) {
        p /= total;
    }
    dist.log_partition = shift + std::log(total);
    return dist;
}

ExactDistribution exact_distribution(const GibbsModel &model, int cap) {
    if (model.n_spins() > cap) {
        throw CapExceededError(model.n_spins(), cap);
    }
    const auto energies = all_energies(model);
    return distribution_from_log_weights(model.n_spins(), energies);
}

GibbsModel parse_model_json(const std::string &text, const std::string &source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        int line = 1 + static_cast<int>(
                           std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n'));
        throw ParseError(source, line, e.what());
    }
    if (!doc.is_object() || !doc.contains("n_spins") || !doc["n_spins"].is_number_integer()) {
        throw ParseError(source, 0, "field n_spins: missing or not an integer");
    }
    if (!doc.contains("terms") || !doc["terms"].is_array()) {
        throw ParseError(source, 0, "field terms: missing or not an array");
    }
    const int n_spins = doc["n_spins"].get<int>();
    if (n_spins < 1 || n_spins > kMaxSpins) {
        throw ParseError(source, 0, "field n_spins: out of range");
    }
    GibbsModel model(n_spins);
    const auto &terms = doc["terms"];
    for (size_t t = 0; t < terms.size(); t++) {
        const std::string where = "terms[" + std::to_string(t) + "]";
        const auto &entry = terms[t];
        if (!entry.is_object() || !entry.contains("spins") || !entry["spins"].is_array() ||
            !entry.contains("value") || !entry["value"].is_number()) {
            throw ParseError(source, 0, where + ": expected {\"spins\": [...], \"value\": number}");
        }
        TermKey key;
        for (const auto &s : entry["spins"]) {
            if (!s.is_number_integer()) {
                throw ParseError(source, 0, where + ".spins: non-integer index");
            }
            key.push_back(s.get<int>());
        }
        if (model.terms().count(key)) {
            throw ParseError(source, 0, where + ": duplicate term " + format_key(key));
        }
        try {
            model.set(key, entry["value"].get<double>());
        } catch (const InvariantError &e) {
            throw ParseError(source, 0, where + ": " + e.what());
        }
    }
    return model;
}

std::string model_to_json(const GibbsModel &model) {
    nlohmann::ordered_json doc;
    doc["n_spins"] = model.n_spins();
    doc["terms"] = nlohmann::ordered_json::array();
    for (const auto &[key, value] : model.terms()) {
        nlohmann::ordered_json entry;
        entry["spins"] = key;
        entry["value"] = value;
        doc["terms"].push_back(entry);
    }
    return doc.dump(2) + "\n";
}

GibbsModel read_model(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, "cannot open model file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_model_json(buffer.str(), path);
}

void write_model(const GibbsModel &model, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write model file " + path);
    }
    out << model_to_json(model);
}

std::string model_fingerprint(const GibbsModel &model) {
    uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : model_to_json(model)) {
        hash = (hash ^ ch) * 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << hash;
    return out.str();
}

}  // namespace gibbsprobe
