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

#ifndef GIBBSPROBE_RNG_H
#define GIBBSPROBE_RNG_H

#include <cstdint>
#include <random>

namespace gibbsprobe {

/// Default master seed used when neither a flag, config file nor GIBBSPROBE_SEED supplies one.
inline constexpr uint64_t kDefaultSeed = 1;

/// Stream splitting: the seed of sub-stream `stream` of `master` is
/// splitmix64(splitmix64(master) ^ splitmix64(stream + 0x9e3779b97f4a7c15)).
/// Batches, replicates and per-model draws each take their own stream index so
/// results never depend on evaluation order.
uint64_t derive_seed(uint64_t master, uint64_t stream);

uint64_t splitmix64(uint64_t x);

/// mt19937_64 engine plus the few bit-exact helpers the library relies on.
class Rng {
   public:
    using result_type = std::mt19937_64::result_type;

    explicit Rng(uint64_t seed) : engine_(seed) {
    }

    static constexpr result_type min() {
        return std::mt19937_64::min();
    }
    static constexpr result_type max() {
        return std::mt19937_64::max();
    }
    result_type operator()() {
        return engine_();
    }

    /// Uniform double in [0, 1) built from the top 53 bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n) by rejection (no modulo bias).
    uint64_t below(uint64_t n);

    /// +1 or -1 with probability 1/2.
    int sign() {
        return (engine_() >> 63) ? 1 : -1;
    }

   private:
    std::mt19937_64 engine_;
};

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_RNG_H
