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

#ifndef GIBBSPROBE_BLACKBOX_H
#define GIBBSPROBE_BLACKBOX_H

#include <cstdint>
#include <string>
#include <vector>

#include "gibbsprobe/model.h"
#include "gibbsprobe/sampler.h"

namespace gibbsprobe {

/// External sampler invoked as
///
///     <program> <extra_args...> --model <path> --num-reads <k> --out <path> [--seed <s>]
///
/// which must exit 0 after writing a sample file with exactly k samples.
struct BlackboxCommand {
    std::string program;
    std::vector<std::string> extra_args;
    /// Append --seed with the per-batch seed.
    bool pass_seed = true;
};

/// Runs one invocation per batch and concatenates the results. Batch b receives
/// seed derive_seed(seed, b). Provenance (command, batch sizes and seeds, model
/// fingerprint) is recorded in the returned set's meta.
SampleSet blackbox_collect(const BlackboxCommand &command, const GibbsModel &input,
                           const std::vector<uint64_t> &batch_sizes, uint64_t seed);

/// Splits `total` samples into batches of at most `batch_size`.
std::vector<uint64_t> split_batches(uint64_t total, uint64_t batch_size);

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_BLACKBOX_H
