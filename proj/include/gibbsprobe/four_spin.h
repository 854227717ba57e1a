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

#ifndef GIBBSPROBE_FOUR_SPIN_H
#define GIBBSPROBE_FOUR_SPIN_H

#include "gibbsprobe/iso.h"
#include "gibbsprobe/model.h"
#include "gibbsprobe/sampler.h"

namespace gibbsprobe {

/// Model learned on the exact weights of the noisy mixture of `input`.
/// config.order defaults to 2 (all fields and pairs).
GibbsModel learn_mixture_model(const GibbsModel &input, const NoiseSpec &noise,
                               const LearnConfig &config = {});

/// Order-2 model with all 4 fields and all 6 pairs seen at the output of the
/// noisy sampler for a 4-spin input.
GibbsModel four_spin_effective(const GibbsModel &input, const NoiseSpec &noise);

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_FOUR_SPIN_H
