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

#ifndef GIBBSPROBE_RESPONSE_H
#define GIBBSPROBE_RESPONSE_H

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gibbsprobe/model.h"
#include "gibbsprobe/sampler.h"

namespace gibbsprobe {

/// Which input fields and couplings an experiment drives. The parameter vector
/// is the fields in roster order followed by the edges in roster order.
struct Roster {
    int n_spins = 0;
    std::vector<int> fields;
    std::vector<std::pair<int, int>> edges;
    /// Display names of the spins; defaults to their indices.
    std::vector<std::string> spin_labels;

    int dim() const {
        return static_cast<int>(fields.size() + edges.size());
    }
    void validate() const;
    std::string spin_label(int spin) const;
    /// "h_<label>" for fields, "J_<label>_<label>" for edges.
    std::vector<std::string> input_names() const;
    /// Input model with the roster parameters set from x.
    GibbsModel to_model(const Eigen::VectorXd &x) const;
    /// Output parameters: every field then every pair i < j, including non-roster pairs.
    std::vector<TermKey> output_keys() const;
    std::vector<std::string> output_names() const;
    /// Index of an input name, throws InvariantError if absent.
    int input_index(const std::string &name) const;
};

/// Output parameter y(x) = x^T chi x + lin^T x + offset, chi symmetric.
struct QuadraticForm {
    std::string name;
    Eigen::MatrixXd chi;
    Eigen::VectorXd lin;
    double offset = 0.0;

    double operator()(const Eigen::VectorXd &x) const;
};

struct ResponseFunction {
    std::vector<std::string> input_names;
    std::vector<QuadraticForm> outputs;

    int dim() const {
        return static_cast<int>(input_names.size());
    }
    const QuadraticForm &output(const std::string &name) const;
    /// Throws InvariantError if chi is not symmetric within 1e-12 or an entry is non-finite.
    void validate() const;
};

Eigen::VectorXd predict(const ResponseFunction &rf, const Eigen::VectorXd &x);

/// Upper-triangular convention where the coefficient of x_a x_b (a < b) is
/// stored once: off-diagonal entries doubled, lower triangle zero.
Eigen::MatrixXd to_upper_triangular(const Eigen::MatrixXd &chi);
Eigen::MatrixXd from_upper_triangular(const Eigen::MatrixXd &upper);

struct FitDiagnostics {
    int num_pairs = 0;
    int num_unknowns = 0;
    std::vector<std::string> warnings;
    /// Least-squares residual norm per output.
    std::vector<double> residual_norms;
};

struct QuadraticFit {
    ResponseFunction rf;
    FitDiagnostics diagnostics;
};

/// Least squares per output on the monomials x_a x_b (a <= b), x_a and 1.
/// `inputs` is N x d, `outputs` N x q; optional row weights. Warns below
/// n ln n pairs (n = unknowns per output) and throws FitError listing the
/// null directions when the design is rank deficient.
QuadraticFit fit_quadratic(const Eigen::MatrixXd &inputs, const Eigen::MatrixXd &outputs,
                           const std::vector<std::string> &input_names,
                           const std::vector<std::string> &output_names,
                           const std::vector<double> &weights = {});

/// Monomial names in design-column order, e.g. "h_1*J_0_1", "h_1", "1".
std::vector<std::string> monomial_names(const std::vector<std::string> &input_names);

enum class PipelineMode { kExactWeights, kFiniteSamples };

struct PipelineOptions {
    int n_models = 20000;
    std::vector<double> grid = {-0.05, -0.04, -0.03, -0.02, -0.01, 0.0,
                                0.01,  0.02,  0.03,  0.04,  0.05};
    uint64_t seed = 1;
    PipelineMode mode = PipelineMode::kExactWeights;
    uint64_t samples_per_model = 4000000;
    double grad_tol = 1e-10;
};

struct PipelineResult {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd outputs;
    QuadraticFit fit;
};

/// Draws n_models input vectors i.i.d. uniformly from the grid (model m uses
/// stream derive_seed(seed, m)), learns the order-2 output model of the noisy
/// mixture for each, then fits the quadratic response of every output.
PipelineResult simulate_response_pipeline(const NoiseSpec &noise, const Roster &roster,
                                          const PipelineOptions &options = {});

/// CSV: input columns then output columns, one header row.
std::string pairs_to_csv(const Eigen::MatrixXd &inputs, const Eigen::MatrixXd &outputs,
                         const std::vector<std::string> &input_names,
                         const std::vector<std::string> &output_names);

struct PairsTable {
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd outputs;
};
/// The first `num_inputs` columns are inputs.
PairsTable parse_pairs_csv(const std::string &text, int num_inputs,
                           const std::string &source = "<string>");

/// {"<output>": {"chi": [[...]], "lin": [...], "offset": c}, ...}
std::string response_to_json(const ResponseFunction &rf);
ResponseFunction parse_response_json(const std::string &text, const std::string &source = "<string>");

/// Roster of the four-spin cell: spins 0..3 labelled 304, 308, 305, 309, driven
/// fields on all four and couplers 304-308, 304-309, 308-305, 305-309.
Roster four_spin_roster();
/// Field temperatures, biases and noise of the four-spin cell with coupler
/// temperatures 12.1, 12.2, 12.5, 12.6 (roster edge order).
NoiseSpec four_spin_noise();

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_RESPONSE_H
