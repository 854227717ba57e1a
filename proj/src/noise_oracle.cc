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

#include "gibbsprobe/noise_oracle.h"

#include <cmath>

namespace gibbsprobe {

namespace {

constexpr double kGridCouplings[] = {-0.05, -0.02, 0.0, 0.02, 0.05};
constexpr double kGridBetas[] = {1.0, 5.0, 12.0};
constexpr double kGridNoise[] = {0.0, 0.02, 0.05};

double tanh_sq(double x) {
    const double t = std::tanh(x);
    return t * t;
}

}  // namespace

double atanh_log1p(double x) {
    const double a = std::abs(x);
    const double value = 0.5 * std::log1p(2.0 * a / (1.0 - a));
    return x < 0 ? -value : value;
}

double effective_field(const ToySpec2 &s) {
    const double arg = std::tanh(s.beta * s.J) * std::tanh(s.beta * s.h2) * tanh_sq(s.beta * s.h_sd1);
    return -atanh_log1p(arg) / s.beta;
}

double effective_coupling(const ToySpec3 &s) {
    const double arg = std::tanh(s.beta * s.J12) * std::tanh(s.beta * s.J23) *
                       tanh_sq(s.beta * s.h_sd1) * tanh_sq(s.beta * s.h_sd3);
    return -atanh_log1p(arg) / s.beta;
}

double small_param_field(const ToySpec2 &s) {
    return -s.beta * s.J * s.h2 * tanh_sq(s.beta * s.h_sd1);
}

double small_param_coupling(const ToySpec3 &s) {
    return -s.beta * s.J12 * s.J23 * tanh_sq(s.beta * s.h_sd1) * tanh_sq(s.beta * s.h_sd3);
}

ToyInstance toy_instance(const ToySpec2 &s) {
    GibbsModel input(2, {{{0, 1}, s.J}, {{1}, s.h2}});
    NoiseSpec noise = NoiseSpec::uniform(2, s.beta);
    noise.h_sd = {s.h_sd1, 0.0};
    return {std::move(input), std::move(noise)};
}

ToyInstance toy_instance(const ToySpec3 &s) {
    GibbsModel input(3, {{{0, 1}, s.J12}, {{1, 2}, s.J23}});
    NoiseSpec noise = NoiseSpec::uniform(3, s.beta);
    noise.h_sd = {s.h_sd1, 0.0, s.h_sd3};
    return {std::move(input), std::move(noise)};
}

std::vector<ToySpec2> field_oracle_grid() {
    std::vector<ToySpec2> grid;
    for (double beta : kGridBetas) {
        for (double j : kGridCouplings) {
            for (double h2 : kGridCouplings) {
                for (double sd : kGridNoise) {
                    grid.push_back({j, h2, sd, beta});
                }
            }
        }
    }
    return grid;
}

std::vector<ToySpec3> coupling_oracle_grid() {
    std::vector<ToySpec3> grid;
    for (double beta : kGridBetas) {
        for (double j12 : kGridCouplings) {
            for (double j23 : kGridCouplings) {
                for (double sd : kGridNoise) {
                    grid.push_back({j12, j23, sd, sd, beta});
                }
            }
        }
    }
    return grid;
}

}  // namespace gibbsprobe
