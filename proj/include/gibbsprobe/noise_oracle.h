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

#ifndef GIBBSPROBE_NOISE_ORACLE_H
#define GIBBSPROBE_NOISE_ORACLE_H

#include <vector>

#include "gibbsprobe/model.h"
#include "gibbsprobe/sampler.h"

namespace gibbsprobe {

/// Two spins coupled by J; spin 0 feels binary field noise of amplitude h_sd1,
/// spin 1 a constant field h2.
struct ToySpec2 {
    double J = 0.0;
    double h2 = 0.0;
    double h_sd1 = 0.0;
    double beta = 1.0;
};

/// Chain 0 - 1 - 2 with couplings J12, J23 and binary field noise on both ends.
struct ToySpec3 {
    double J12 = 0.0;
    double J23 = 0.0;
    double h_sd1 = 0.0;
    double h_sd3 = 0.0;
    double beta = 1.0;
};

/// arctanh(x) through log1p; odd by construction.
double atanh_log1p(double x);

/// Field on spin 0 of the two-spin mixture, in input units:
/// -(1/beta) atanh(tanh(beta J) tanh(beta h2) tanh^2(beta h_sd1)).
double effective_field(const ToySpec2 &spec);

/// Coupling between the chain ends, in input units:
/// -(1/beta) atanh(tanh(beta J12) tanh(beta J23) tanh^2(beta h_sd1) tanh^2(beta h_sd3)).
double effective_coupling(const ToySpec3 &spec);

/// -beta J h2 tanh^2(beta h_sd1).
double small_param_field(const ToySpec2 &spec);
/// -beta J12 J23 tanh^2(beta h_sd1) tanh^2(beta h_sd3).
double small_param_coupling(const ToySpec3 &spec);

/// Noisy-sampler description of a toy: input model in input units plus a
/// binary NoiseSpec with every temperature equal to spec.beta.
struct ToyInstance {
    GibbsModel input;
    NoiseSpec noise;
};
ToyInstance toy_instance(const ToySpec2 &spec);
ToyInstance toy_instance(const ToySpec3 &spec);

/// beta in {1, 5, 12} x J, h2 in {-0.05, -0.02, 0, 0.02, 0.05} x h_sd1 in {0, 0.02, 0.05}.
std::vector<ToySpec2> field_oracle_grid();
/// beta in {1, 5, 12} x J12, J23 in {-0.05, -0.02, 0, 0.02, 0.05} x h_sd1 = h_sd3 in {0, 0.02, 0.05}.
std::vector<ToySpec3> coupling_oracle_grid();

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_NOISE_ORACLE_H
