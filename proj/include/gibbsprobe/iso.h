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

#ifndef GIBBSPROBE_ISO_H
#define GIBBSPROBE_ISO_H

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gibbsprobe/model.h"
#include "gibbsprobe/sampler.h"

namespace gibbsprobe {

/// Configurations with normalized weights: empirical frequencies of a sample
/// set or exact probabilities of a distribution. Zero weights are dropped.
struct WeightedConfigs {
    int n_spins = 0;
    std::vector<uint64_t> configs;
    std::vector<double> weights;

    static WeightedConfigs from(const SampleSet &samples);
    static WeightedConfigs from(const ExactDistribution &dist);
};

/// Coefficients of the terms adjacent to one focal spin. Every key contains `focal`.
struct NeighborhoodParams {
    int focal = 0;
    std::map<TermKey, double> coeffs;

    /// Throws InvariantError if a key is unsorted, out of range or misses the focal spin.
    void validate(int n_spins) const;
};

struct LearnConfig {
    /// Largest interaction order reconstructed.
    int order = 2;
    /// Stop once the Euclidean norm of the gradient (or of the proximal
    /// gradient mapping when l1_penalty > 0) is at most this.
    double grad_tol = 1e-9;
    int max_iter = 200;
    /// Weight of an l1 penalty on the multi-spin coefficients (fields are not penalized).
    double l1_penalty = 0.0;
};

struct IsoEvaluation {
    double value = 0.0;
    /// Ordered like params.coeffs.
    std::vector<double> gradient;
};

/// Interaction screening objective of one focal spin,
///
///     S(theta) = sum_c w_c exp(-sum_K theta_K prod_{i in K} s_i(c)),
///
/// and its gradient dS/dtheta_K = -sum_c w_c prod_{i in K} s_i(c) exp(...).
IsoEvaluation iso_value_grad(const WeightedConfigs &data, const NeighborhoodParams &params);
IsoEvaluation iso_value_grad(const SampleSet &data, const NeighborhoodParams &params);
IsoEvaluation iso_value_grad(const ExactDistribution &data, const NeighborhoodParams &params);

/// All keys of length <= order that contain `focal`, in map order.
std::vector<TermKey> neighborhood_keys(int n_spins, int focal, int order);

struct NeighborhoodFit {
    NeighborhoodParams params;
    double grad_norm = 0.0;
    int iterations = 0;
};

/// Minimizes the (convex) screening objective over all keys of order <= config.order
/// containing `focal`. Throws LearnError when the focal spin is constant over the
/// data (objective unbounded below) or when max_iter is reached first.
NeighborhoodFit learn_neighborhood(const WeightedConfigs &data, int focal,
                                   const LearnConfig &config);

struct LearnResult {
    GibbsModel model;
    std::vector<NeighborhoodFit> neighborhoods;
};

/// One screening problem per spin; every term's coefficient is the arithmetic
/// mean of its estimates from the neighborhoods that contain it.
LearnResult learn_model(const WeightedConfigs &data, const LearnConfig &config);
LearnResult learn_model(const SampleSet &data, const LearnConfig &config);
LearnResult learn_model(const ExactDistribution &data, const LearnConfig &config);

/// JSON report: per-term estimates from each neighborhood, gradient norms, iterations.
std::string learn_report_json(const LearnResult &result, const LearnConfig &config);

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_ISO_H
