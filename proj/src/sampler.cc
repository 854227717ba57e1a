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

#include "gibbsprobe/sampler.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "gibbsprobe/errors.h"
#include "gibbsprobe/rng.h"
#include "json.hpp"

namespace gibbsprobe {

namespace {

struct NoiseNode {
    double value;
    double weight;
};

std::vector<NoiseNode> noise_nodes(NoiseKind kind) {
    if (kind == NoiseKind::kBinary) {
        return {{-1.0, 0.5}, {1.0, 0.5}};
    }
    // Uniform density on [-sqrt(3), sqrt(3)] (unit variance), 16-point Gauss-Legendre.
    using Rule = boost::math::quadrature::gauss<double, 16>;
    const auto &abscissa = Rule::abscissa();
    const auto &weights = Rule::weights();
    std::vector<NoiseNode> nodes;
    for (size_t k = 0; k < abscissa.size(); k++) {
        nodes.push_back({-std::sqrt(3.0) * abscissa[k], weights[k] / 2});
        nodes.push_back({std::sqrt(3.0) * abscissa[k], weights[k] / 2});
    }
    std::sort(nodes.begin(), nodes.end(),
              [](const NoiseNode &a, const NoiseNode &b) { return a.value < b.value; });
    return nodes;
}

std::vector<int> noisy_spins(const NoiseSpec &noise) {
    std::vector<int> spins;
    for (int i = 0; i < noise.n_spins(); i++) {
        if (noise.h_sd[i] > 0) {
            spins.push_back(i);
        }
    }
    return spins;
}

void check_pairwise(const GibbsModel &input) {
    if (input.order() > 2) {
        throw InvariantError("noisy sampler input must contain only fields and couplings");
    }
}

// Softmax of `energies` accumulated into `out` with weight `weight`.
void accumulate_softmax(std::span<const double> energies, double weight, std::vector<double> &out,
                        std::vector<double> &scratch) {
    const double shift = *std::max_element(energies.begin(), energies.end());
    double total = 0.0;
    for (size_t c = 0; c < energies.size(); c++) {
        scratch[c] = std::exp(energies[c] - shift);
        total += scratch[c];
    }
    const double scale = weight / total;
    for (size_t c = 0; c < energies.size(); c++) {
        out[c] += scratch[c] * scale;
    }
}

// Cumulative distribution of softmax(energies), normalized so the last entry is 1.
void softmax_cdf(std::span<const double> energies, std::vector<double> &cdf) {
    const double shift = *std::max_element(energies.begin(), energies.end());
    cdf.resize(energies.size());
    double running = 0.0;
    for (size_t c = 0; c < energies.size(); c++) {
        running += std::exp(energies[c] - shift);
        cdf[c] = running;
    }
    for (double &v : cdf) {
        v /= running;
    }
}

uint64_t draw_from_cdf(const std::vector<double> &cdf, Rng &rng) {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) {
        --it;
    }
    return static_cast<uint64_t>(it - cdf.begin());
}

// Energies of all configurations for the noisy model at unit noise `u`,
// given the noise-free energies `base` and per-spin amplitudes beta_i h_sd_i.
void add_noise_energy(std::span<const double> base, std::span<const int> spins,
                      std::span<const double> amplitude, std::span<const double> u,
                      std::vector<double> &out) {
    out.assign(base.begin(), base.end());
    for (size_t k = 0; k < spins.size(); k++) {
        const double a = amplitude[k] * u[k];
        if (a == 0.0) {
            continue;
        }
        const uint64_t bit = uint64_t{1} << spins[k];
        for (size_t c = 0; c < out.size(); c++) {
            out[c] += (c & bit) ? a : -a;
        }
    }
}

}  // namespace

void NoiseSpec::validate() const {
    const size_t n = beta_field.size();
    if (n == 0 || n > static_cast<size_t>(kMaxSpins)) {
        throw InvariantError("noise spec must cover between 1 and 64 spins");
    }
    if (h_bias.size() != n || h_sd.size() != n) {
        throw InvariantError("noise spec vectors beta_field, h_bias and h_sd differ in length");
    }
    for (size_t i = 0; i < n; i++) {
        if (!(beta_field[i] > 0) || !std::isfinite(beta_field[i])) {
            throw InvariantError("beta_field[" + std::to_string(i) + "] must be positive");
        }
        if (!(h_sd[i] >= 0) || !std::isfinite(h_sd[i])) {
            throw InvariantError("h_sd[" + std::to_string(i) + "] must be non-negative");
        }
        if (!std::isfinite(h_bias[i])) {
            throw InvariantError("h_bias[" + std::to_string(i) + "] must be finite");
        }
    }
    if (!(default_beta_edge > 0) || !std::isfinite(default_beta_edge)) {
        throw InvariantError("default_beta_edge must be positive");
    }
    for (const auto &[edge, beta] : beta_edge) {
        if (edge.first < 0 || edge.first >= edge.second || edge.second >= static_cast<int>(n)) {
            throw InvariantError("beta_edge key must be a sorted pair of spins in range");
        }
        if (!(beta > 0) || !std::isfinite(beta)) {
            throw InvariantError("beta_edge values must be positive");
        }
    }
}

double NoiseSpec::edge_beta(int i, int j) const {
    auto it = beta_edge.find({std::min(i, j), std::max(i, j)});
    return it == beta_edge.end() ? default_beta_edge : it->second;
}

NoiseSpec NoiseSpec::uniform(int n_spins, double beta) {
    NoiseSpec spec;
    spec.beta_field.assign(n_spins, beta);
    spec.h_bias.assign(n_spins, 0.0);
    spec.h_sd.assign(n_spins, 0.0);
    spec.default_beta_edge = beta;
    return spec;
}

NoiseSpec parse_noise_json(const std::string &text, const std::string &source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(source, 0, e.what());
    }
    NoiseSpec spec;
    try {
        spec.beta_field = doc.at("beta_field").get<std::vector<double>>();
        const size_t n = spec.beta_field.size();
        spec.h_bias = doc.contains("h_bias") ? doc["h_bias"].get<std::vector<double>>()
                                             : std::vector<double>(n, 0.0);
        spec.h_sd = doc.contains("h_sd") ? doc["h_sd"].get<std::vector<double>>()
                                         : std::vector<double>(n, 0.0);
        spec.default_beta_edge = doc.value("default_beta_edge", 1.0);
        const std::string kind = doc.value("noise_kind", std::string("binary"));
        if (kind == "binary") {
            spec.kind = NoiseKind::kBinary;
        } else if (kind == "uniform") {
            spec.kind = NoiseKind::kUniform;
        } else {
            throw ParseError(source, 0, "field noise_kind: expected binary or uniform");
        }
        if (doc.contains("beta_edge")) {
            for (const auto &entry : doc["beta_edge"]) {
                auto spins = entry.at("spins").get<std::vector<int>>();
                if (spins.size() != 2 || spins[0] >= spins[1]) {
                    throw ParseError(source, 0, "field beta_edge: spins must be a sorted pair");
                }
                spec.beta_edge[{spins[0], spins[1]}] = entry.at("value").get<double>();
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(source, 0, e.what());
    }
    try {
        spec.validate();
    } catch (const InvariantError &e) {
        throw ParseError(source, 0, e.what());
    }
    return spec;
}

std::string noise_to_json(const NoiseSpec &noise) {
    nlohmann::ordered_json doc;
    doc["beta_field"] = noise.beta_field;
    doc["h_bias"] = noise.h_bias;
    doc["h_sd"] = noise.h_sd;
    doc["default_beta_edge"] = noise.default_beta_edge;
    doc["noise_kind"] = noise.kind == NoiseKind::kBinary ? "binary" : "uniform";
    doc["beta_edge"] = nlohmann::ordered_json::array();
    for (const auto &[edge, beta] : noise.beta_edge) {
        doc["beta_edge"].push_back({{"spins", {edge.first, edge.second}}, {"value", beta}});
    }
    return doc.dump(2) + "\n";
}

NoiseSpec read_noise(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, "cannot open noise spec");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_noise_json(buffer.str(), path);
}

void write_noise(const NoiseSpec &noise, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write noise spec " + path);
    }
    out << noise_to_json(noise);
}

SampleSet::SampleSet(int n_spins, std::vector<SampleRecord> records) : n_spins_(n_spins) {
    if (n_spins < 1 || n_spins > kMaxSpins) {
        throw InvariantError("sample set n_spins out of range");
    }
    std::sort(records.begin(), records.end(),
              [](const SampleRecord &a, const SampleRecord &b) { return a.bits < b.bits; });
    const uint64_t valid = n_spins == 64 ? ~uint64_t{0} : (uint64_t{1} << n_spins) - 1;
    for (const auto &r : records) {
        if (r.count == 0) {
            throw InvariantError("sample counts must be >= 1");
        }
        if (r.bits & ~valid) {
            throw InvariantError("sample configuration has bits beyond n_spins");
        }
        if (!records_.empty() && records_.back().bits == r.bits) {
            records_.back().count += r.count;
        } else {
            records_.push_back(r);
        }
        total_ += r.count;
    }
    if (total_ == 0) {
        throw InvariantError("sample set must contain at least one sample");
    }
}

SampleSet SampleSet::from_draws(int n_spins, std::span<const uint64_t> draws) {
    std::vector<SampleRecord> records;
    records.reserve(draws.size());
    for (uint64_t bits : draws) {
        records.push_back({bits, 1});
    }
    return SampleSet(n_spins, std::move(records));
}

SampleSet SampleSet::from_dense_counts(int n_spins, std::span<const uint64_t> counts) {
    std::vector<SampleRecord> records;
    for (size_t c = 0; c < counts.size(); c++) {
        if (counts[c] > 0) {
            records.push_back({c, counts[c]});
        }
    }
    return SampleSet(n_spins, std::move(records));
}

uint64_t SampleSet::count(uint64_t bits) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), bits,
                               [](const SampleRecord &r, uint64_t b) { return r.bits < b; });
    return (it != records_.end() && it->bits == bits) ? it->count : 0;
}

std::vector<double> SampleSet::frequencies() const {
    if (n_spins_ > kDefaultEnumerationCap) {
        throw CapExceededError(n_spins_, kDefaultEnumerationCap);
    }
    std::vector<double> freq(size_t{1} << n_spins_, 0.0);
    for (const auto &r : records_) {
        freq[r.bits] = static_cast<double>(r.count) / static_cast<double>(total_);
    }
    return freq;
}

GaugeVector::GaugeVector(std::vector<int> values) : values_(std::move(values)) {
    for (int v : values_) {
        if (v != 1 && v != -1) {
            throw InvariantError("gauge entries must be +1 or -1");
        }
    }
}

GaugeVector GaugeVector::from_flip_mask(uint64_t mask, int n_spins) {
    std::vector<int> values(n_spins);
    for (int i = 0; i < n_spins; i++) {
        values[i] = ((mask >> i) & 1) ? -1 : 1;
    }
    return GaugeVector(std::move(values));
}

uint64_t GaugeVector::flip_mask() const {
    uint64_t mask = 0;
    for (int i = 0; i < size(); i++) {
        if (values_[i] == -1) {
            mask |= uint64_t{1} << i;
        }
    }
    return mask;
}

GibbsModel effective_noisy_model_at(const GibbsModel &input, const NoiseSpec &noise,
                                    std::span<const double> unit_noise) {
    noise.validate();
    check_pairwise(input);
    const int n = input.n_spins();
    if (noise.n_spins() != n || static_cast<int>(unit_noise.size()) != n) {
        throw DimensionError("noise spec / realization length does not match the model");
    }
    GibbsModel out(n);
    for (int i = 0; i < n; i++) {
        const double field =
            noise.beta_field[i] *
            (noise.h_sd[i] * unit_noise[i] + noise.h_bias[i] + input.coefficient({i}));
        if (field != 0.0) {
            out.set({i}, field);
        }
    }
    for (const auto &[key, value] : input.terms()) {
        if (key.size() == 2) {
            out.set(key, noise.edge_beta(key[0], key[1]) * value);
        }
    }
    return out;
}

GibbsModel effective_noisy_model(const GibbsModel &input, const NoiseSpec &noise,
                                 std::span<const int> realization) {
    std::vector<double> unit(realization.size());
    for (size_t i = 0; i < realization.size(); i++) {
        if (realization[i] != 1 && realization[i] != -1) {
            throw InvariantError("binary noise realization entries must be +1 or -1");
        }
        unit[i] = realization[i];
    }
    return effective_noisy_model_at(input, noise, unit);
}

ExactDistribution noisy_mixture_distribution(const GibbsModel &input, const NoiseSpec &noise,
                                             int cap) {
    const int n = input.n_spins();
    if (n > cap) {
        throw CapExceededError(n, cap);
    }
    const std::vector<double> zero(n, 0.0);
    const GibbsModel base_model = effective_noisy_model_at(input, noise, zero);
    const auto spins = noisy_spins(noise);
    if (spins.empty()) {
        return exact_distribution(base_model, cap);
    }
    const auto nodes = noise_nodes(noise.kind);
    const size_t n_states = size_t{1} << n;
    double combos = std::pow(static_cast<double>(nodes.size()), static_cast<double>(spins.size()));
    if (combos * static_cast<double>(n_states) > static_cast<double>(kMaxMixtureWork)) {
        throw Error("noise mixture over " + std::to_string(spins.size()) +
                    " noisy spins is too large to enumerate");
    }
    const auto base = all_energies(base_model);
    std::vector<double> amplitude;
    for (int i : spins) {
        amplitude.push_back(noise.beta_field[i] * noise.h_sd[i]);
    }

    std::vector<double> probs(n_states, 0.0), energies, scratch(n_states), u(spins.size());
    std::vector<size_t> digit(spins.size(), 0);
    while (true) {
        double weight = 1.0;
        for (size_t k = 0; k < spins.size(); k++) {
            u[k] = nodes[digit[k]].value;
            weight *= nodes[digit[k]].weight;
        }
        add_noise_energy(base, spins, amplitude, u, energies);
        accumulate_softmax(energies, weight, probs, scratch);
        size_t k = 0;
        while (k < digit.size() && ++digit[k] == nodes.size()) {
            digit[k++] = 0;
        }
        if (k == digit.size()) {
            break;
        }
    }
    double total = 0.0;
    for (double p : probs) {
        total += p;
    }
    for (double &p : probs) {
        p /= total;
    }
    ExactDistribution dist;
    dist.n_spins = n;
    dist.probs = std::move(probs);
    dist.log_partition = 0.0;
    return dist;
}

SampleSet sample_exact(const ExactDistribution &dist, uint64_t num_samples, uint64_t seed) {
    if (num_samples == 0) {
        throw InvariantError("number of samples must be >= 1");
    }
    std::vector<double> cdf(dist.probs.size());
    double running = 0.0;
    for (size_t c = 0; c < dist.probs.size(); c++) {
        running += dist.probs[c];
        cdf[c] = running;
    }
    for (double &v : cdf) {
        v /= running;
    }
    Rng rng(seed);
    std::vector<uint64_t> counts(dist.probs.size(), 0);
    for (uint64_t m = 0; m < num_samples; m++) {
        counts[draw_from_cdf(cdf, rng)]++;
    }
    SampleSet samples = SampleSet::from_dense_counts(dist.n_spins, counts);
    samples.meta["source"] = "sample_exact";
    samples.meta["seed"] = std::to_string(seed);
    return samples;
}

SampleSet sample_noisy(const GibbsModel &input, const NoiseSpec &noise, uint64_t num_samples,
                       uint64_t seed, int cap) {
    if (num_samples == 0) {
        throw InvariantError("number of samples must be >= 1");
    }
    const int n = input.n_spins();
    if (n > cap) {
        throw CapExceededError(n, cap);
    }
    const std::vector<double> zero(n, 0.0);
    const GibbsModel base_model = effective_noisy_model_at(input, noise, zero);
    const auto base = all_energies(base_model);
    const auto spins = noisy_spins(noise);
    std::vector<double> amplitude;
    for (int i : spins) {
        amplitude.push_back(noise.beta_field[i] * noise.h_sd[i]);
    }
    const size_t n_states = base.size();

    // Binary realizations take 2^k values; their conditional CDFs are cached when small enough.
    const bool cache = noise.kind == NoiseKind::kBinary && spins.size() < 32 &&
                       (uint64_t{1} << spins.size()) * n_states <= (uint64_t{1} << 24);
    std::vector<std::vector<double>> cdf_cache(cache ? (size_t{1} << spins.size()) : 0);

    Rng rng(seed);
    std::vector<uint64_t> counts(n_states, 0);
    std::vector<double> u(spins.size()), energies, cdf;
    for (uint64_t m = 0; m < num_samples; m++) {
        uint64_t pattern = 0;
        for (size_t k = 0; k < spins.size(); k++) {
            if (noise.kind == NoiseKind::kBinary) {
                const int s = rng.sign();
                u[k] = s;
                pattern |= static_cast<uint64_t>(s > 0) << k;
            } else {
                u[k] = (2.0 * rng.uniform() - 1.0) * std::sqrt(3.0);
            }
        }
        const std::vector<double> *active = &cdf;
        if (cache) {
            auto &slot = cdf_cache[pattern];
            if (slot.empty()) {
                add_noise_energy(base, spins, amplitude, u, energies);
                softmax_cdf(energies, slot);
            }
            active = &slot;
        } else {
            add_noise_energy(base, spins, amplitude, u, energies);
            softmax_cdf(energies, cdf);
        }
        counts[draw_from_cdf(*active, rng)]++;
    }
    SampleSet samples = SampleSet::from_dense_counts(n, counts);
    samples.meta["source"] = "sample_noisy";
    samples.meta["seed"] = std::to_string(seed);
    return samples;
}

GibbsModel apply_gauge(const GibbsModel &model, const GaugeVector &tau) {
    if (tau.size() != model.n_spins()) {
        throw DimensionError("gauge length does not match the model");
    }
    GibbsModel::TermMap terms;
    for (const auto &[key, value] : model.terms()) {
        int sign = 1;
        for (int i : key) {
            sign *= tau[i];
        }
        terms[key] = sign * value;
    }
    return GibbsModel(model.n_spins(), std::move(terms));
}

SampleSet apply_gauge_samples(const SampleSet &samples, const GaugeVector &tau) {
    if (tau.size() != samples.n_spins()) {
        throw DimensionError("gauge length does not match the sample set");
    }
    const uint64_t flip = tau.flip_mask();
    std::vector<SampleRecord> records;
    records.reserve(samples.records().size());
    for (const auto &r : samples.records()) {
        records.push_back({r.bits ^ flip, r.count});
    }
    SampleSet out(samples.n_spins(), std::move(records));
    out.meta = samples.meta;
    return out;
}

ExactDistribution apply_gauge_distribution(const ExactDistribution &dist, const GaugeVector &tau) {
    if (tau.size() != dist.n_spins) {
        throw DimensionError("gauge length does not match the distribution");
    }
    const uint64_t flip = tau.flip_mask();
    ExactDistribution out = dist;
    for (size_t c = 0; c < dist.probs.size(); c++) {
        out.probs[c ^ flip] = dist.probs[c];
    }
    return out;
}

SrtResult srt_effective_distribution(const GibbsModel &input, const NoiseSpec &noise,
                                     const SrtOptions &options) {
    const int n = input.n_spins();
    if (n > options.cap) {
        throw CapExceededError(n, options.cap);
    }
    const size_t n_states = size_t{1} << n;
    SrtResult result;
    result.dist.n_spins = n;
    result.dist.probs.assign(n_states, 0.0);

    auto gauge_term = [&](uint64_t flip) {
        const auto tau = GaugeVector::from_flip_mask(flip, n);
        const auto device = noisy_mixture_distribution(apply_gauge(input, tau), noise, options.cap);
        // Device output s' maps back to s = s' * tau.
        return apply_gauge_distribution(device, tau);
    };

    if (n <= options.cap_gauge) {
        const uint64_t n_gauges = uint64_t{1} << n;
        for (uint64_t flip = 0; flip < n_gauges; flip++) {
            const auto term = gauge_term(flip);
            for (size_t c = 0; c < n_states; c++) {
                result.dist.probs[c] += term.probs[c];
            }
        }
        for (double &p : result.dist.probs) {
            p /= static_cast<double>(n_gauges);
        }
        result.exact = true;
        result.num_gauges = static_cast<int>(n_gauges);
        return result;
    }

    if (options.num_random_gauges < 2) {
        throw InvariantError("Monte-Carlo gauge averaging needs at least two gauges");
    }
    Rng rng(options.seed);
    std::vector<double> sum_sq(n_states, 0.0);
    for (int g = 0; g < options.num_random_gauges; g++) {
        uint64_t flip = 0;
        for (int i = 0; i < n; i++) {
            flip |= static_cast<uint64_t>(rng.sign() < 0) << i;
        }
        const auto term = gauge_term(flip);
        for (size_t c = 0; c < n_states; c++) {
            result.dist.probs[c] += term.probs[c];
            sum_sq[c] += term.probs[c] * term.probs[c];
        }
    }
    const double k = options.num_random_gauges;
    double max_se = 0.0;
    for (size_t c = 0; c < n_states; c++) {
        const double mean = result.dist.probs[c] / k;
        const double var = std::max(0.0, (sum_sq[c] - k * mean * mean) / (k - 1));
        max_se = std::max(max_se, std::sqrt(var / k));
        result.dist.probs[c] = mean;
    }
    result.exact = false;
    result.max_standard_error = max_se;
    result.num_gauges = options.num_random_gauges;
    return result;
}

}  // namespace gibbsprobe
