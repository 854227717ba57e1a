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

#ifndef GIBBSPROBE_REPRODUCE_H
#define GIBBSPROBE_REPRODUCE_H

#include <cstdint>
#include <string>
#include <vector>

#include "gibbsprobe/model.h"
#include "gibbsprobe/rng.h"

namespace gibbsprobe {

/// Directory holding reference_values.json.
std::string default_data_dir();

struct ReproduceOptions {
    uint64_t seed = kDefaultSeed;
    /// Threshold target only: M = 1e6, R = 10 with the threshold target rescaled by sqrt(M_full / M).
    bool reduced = false;
    /// Empty means <data dir>/reference_values.json.
    std::string reference_path;
    int n_models = 20000;
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ReproduceResult {
    std::string target;
    std::vector<Check> checks;
    /// Table behind the checks.
    std::string csv;
    double seconds = 0.0;

    bool passed() const;
};

/// table-s3, table-s4, fig-s5-threshold, srt-means, oracle-grid, single-qubit-synthetic.
const std::vector<std::string> &reproduce_targets();

/// Runs one target and compares against the shipped reference values.
ReproduceResult reproduce(const std::string &target, const ReproduceOptions &options = {});

/// 8-spin bipartite cell 0..3 x 4..7 (spins 304..311), coupling on every edge.
GibbsModel cell_ferromagnet_8(double coupling);
/// 4-spin cycle over spins 304, 305, 308, 309 (indices 0..3), coupling on its 4 edges.
GibbsModel cell_ferromagnet_4(double coupling);

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_REPRODUCE_H
