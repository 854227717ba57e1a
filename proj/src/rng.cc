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

#include "gibbsprobe/rng.h"

namespace gibbsprobe {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x9e3779b97f4a7c15ULL));
}

uint64_t Rng::below(uint64_t n) {
    if (n <= 1) {
        return 0;
    }
    // 2^64 mod n; draws above max() - rem would bias the low residues.
    const uint64_t rem = (max() % n + 1) % n;
    uint64_t x;
    do {
        x = engine_();
    } while (rem != 0 && x > max() - rem);
    return x % n;
}

}  // namespace gibbsprobe
