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

#ifndef GIBBSPROBE_ERROR_EST_H
#define GIBBSPROBE_ERROR_EST_H

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gibbsprobe/iso.h"
#include "gibbsprobe/model.h"

namespace gibbsprobe {

struct TermError {
    TermKey key;
    /// Mean of reference - learned over successful replicates.
    double mean = 0.0;
    /// Sample standard deviation (n - 1 denominator).
    double sigma = 0.0;
};

struct ErrorReport {
    int n_spins = 0;
    uint64_t num_samples = 0;
    /// Replicates that converged and enter the statistics.
    int num_replicates = 0;
    int num_failed = 0;
    std::vector<std::string> failures;
    uint64_t seed = 0;
    int order = 0;
    std::vector<TermError> terms;
    /// 3 x mean over terms of sigma.
    double threshold = 0.0;
};

/// Replicate protocol: R times, draw M samples from the exact distribution of
/// `reference` and relearn it. Replicate r uses stream derive_seed(seed, r).
/// Replicates whose learner fails are excluded and counted; more than 10%
/// failures raise an Error.
ErrorReport estimate_error(const GibbsModel &reference, uint64_t num_samples, int num_replicates,
                           const LearnConfig &config, uint64_t seed,
                           int cap = kDefaultEnumerationCap);

/// Terms of `learned` whose magnitude strictly exceeds the report threshold.
std::set<TermKey> significance_mask(const GibbsModel &learned, const ErrorReport &report);

std::string error_report_json(const ErrorReport &report);
/// Columns term,mean,sigma.
std::string error_report_csv(const ErrorReport &report);

struct ScalingPoint {
    uint64_t num_samples = 0;
    /// Mean over replicates of max_K |reference_K - learned_K|.
    double mean_max_error = 0.0;
};

struct ScalingReport {
    std::vector<ScalingPoint> points;
    /// Least-squares fit log10(error) = slope * log10(M) + intercept.
    double slope = 0.0;
    double intercept = 0.0;
};

/// Reconstruction error against sample size. Replicate r at size index k uses
/// stream derive_seed(derive_seed(seed, k), r).
ScalingReport consistency_scaling(const GibbsModel &reference, const std::vector<uint64_t> &sizes,
                                  int num_replicates, const LearnConfig &config, uint64_t seed,
                                  int cap = kDefaultEnumerationCap);

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_ERROR_EST_H
