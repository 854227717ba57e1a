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

#include "gibbsprobe/four_spin.h"

#include "gibbsprobe/errors.h"

namespace gibbsprobe {

GibbsModel learn_mixture_model(const GibbsModel &input, const NoiseSpec &noise,
                               const LearnConfig &config) {
    const ExactDistribution dist = noisy_mixture_distribution(input, noise);
    return learn_model(dist, config).model;
}

GibbsModel four_spin_effective(const GibbsModel &input, const NoiseSpec &noise) {
    if (input.n_spins() != 4 || noise.n_spins() != 4) {
        throw DimensionError("four_spin_effective expects 4 spins");
    }
    LearnConfig config;
    config.order = 2;
    config.grad_tol = 1e-12;
    return learn_mixture_model(input, noise, config);
}

}  // namespace gibbsprobe
