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

#include "gibbsprobe/response.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <sstream>

#include "gibbsprobe/errors.h"
#include "gibbsprobe/iso.h"
#include "gibbsprobe/rng.h"
#include "json.hpp"

namespace gibbsprobe {

namespace {

std::string pair_name(const std::string &a, const std::string &b) {
    return "J_" + std::min(a, b) + "_" + std::max(a, b);
}

// Columns x_a x_b (a <= b), then x_a, then 1.
Eigen::MatrixXd design_matrix(const Eigen::MatrixXd &x) {
    const Eigen::Index n = x.rows(), d = x.cols();
    const Eigen::Index p = d * (d + 1) / 2 + d + 1;
    Eigen::MatrixXd a(n, p);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < d; i++) {
        for (Eigen::Index j = i; j < d; j++) {
            a.col(col++) = x.col(i).cwiseProduct(x.col(j));
        }
    }
    for (Eigen::Index i = 0; i < d; i++) {
        a.col(col++) = x.col(i);
    }
    a.col(col) = Eigen::VectorXd::Ones(n);
    return a;
}

std::string describe_null_directions(const Eigen::MatrixXd &design,
                                     const std::vector<std::string> &names) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    const double tol = sv.size() > 0 ? sv[0] * 1e-10 * static_cast<double>(design.cols()) : 0.0;
    std::ostringstream out;
    out.precision(4);
    int count = 0;
    for (Eigen::Index k = 0; k < sv.size(); k++) {
        if (sv[k] > tol) {
            continue;
        }
        out << (count++ ? "; " : "") << "[";
        bool first = true;
        const Eigen::VectorXd v = svd.matrixV().col(k);
        for (Eigen::Index c = 0; c < v.size(); c++) {
            if (std::abs(v[c]) > 1e-6) {
                out << (first ? "" : " + ") << v[c] << "*" << names[c];
                first = false;
            }
        }
        out << "]";
    }
    // Rows fewer than columns leave directions the thin SVD does not return.
    if (design.rows() < design.cols()) {
        out << (count ? "; " : "") << design.cols() - design.rows()
            << " further directions (fewer pairs than unknowns)";
    }
    return out.str();
}

}  // namespace

void Roster::validate() const {
    if (n_spins < 1 || n_spins > kMaxSpins) {
        throw InvariantError("roster spin count out of range");
    }
    if (!spin_labels.empty() && static_cast<int>(spin_labels.size()) != n_spins) {
        throw DimensionError("roster labels do not match its spin count");
    }
    std::set<int> seen_fields;
    for (int f : fields) {
        if (f < 0 || f >= n_spins || !seen_fields.insert(f).second) {
            throw InvariantError("roster field list is invalid");
        }
    }
    std::set<std::pair<int, int>> seen_edges;
    for (auto [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n_spins || j >= n_spins || i == j ||
            !seen_edges.insert({std::min(i, j), std::max(i, j)}).second) {
            throw InvariantError("roster edge list is invalid");
        }
    }
}

std::string Roster::spin_label(int spin) const {
    return spin_labels.empty() ? std::to_string(spin) : spin_labels[spin];
}

std::vector<std::string> Roster::input_names() const {
    std::vector<std::string> names;
    for (int f : fields) {
        names.push_back("h_" + spin_label(f));
    }
    for (auto [i, j] : edges) {
        names.push_back(pair_name(spin_label(i), spin_label(j)));
    }
    return names;
}

int Roster::input_index(const std::string &name) const {
    const auto names = input_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw InvariantError("unknown input parameter '" + name + "'");
    }
    return static_cast<int>(it - names.begin());
}

GibbsModel Roster::to_model(const Eigen::VectorXd &x) const {
    if (x.size() != dim()) {
        throw DimensionError("parameter vector length does not match the roster");
    }
    GibbsModel::TermMap terms;
    Eigen::Index k = 0;
    for (int f : fields) {
        terms[{f}] = x[k++];
    }
    for (auto [i, j] : edges) {
        terms[{std::min(i, j), std::max(i, j)}] = x[k++];
    }
    return GibbsModel(n_spins, std::move(terms));
}

std::vector<TermKey> Roster::output_keys() const {
    std::vector<TermKey> keys;
    for (int i = 0; i < n_spins; i++) {
        keys.push_back({i});
    }
    for (int i = 0; i < n_spins; i++) {
        for (int j = i + 1; j < n_spins; j++) {
            keys.push_back({i, j});
        }
    }
    return keys;
}

std::vector<std::string> Roster::output_names() const {
    std::vector<std::string> names;
    for (const auto &key : output_keys()) {
        names.push_back(key.size() == 1 ? "h_" + spin_label(key[0])
                                        : pair_name(spin_label(key[0]), spin_label(key[1])));
    }
    return names;
}

double QuadraticForm::operator()(const Eigen::VectorXd &x) const {
    return x.dot(chi * x) + lin.dot(x) + offset;
}

const QuadraticForm &ResponseFunction::output(const std::string &name) const {
    for (const auto &o : outputs) {
        if (o.name == name) {
            return o;
        }
    }
    throw InvariantError("unknown output parameter '" + name + "'");
}

void ResponseFunction::validate() const {
    const Eigen::Index d = dim();
    for (const auto &o : outputs) {
        if (o.chi.rows() != d || o.chi.cols() != d || o.lin.size() != d) {
            throw DimensionError("response of " + o.name + " does not match the input dimension");
        }
        if (!o.chi.allFinite() || !o.lin.allFinite() || !std::isfinite(o.offset)) {
            throw InvariantError("response of " + o.name + " has non-finite entries");
        }
        if ((o.chi - o.chi.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw InvariantError("response of " + o.name + " has a non-symmetric chi");
        }
    }
}

Eigen::VectorXd predict(const ResponseFunction &rf, const Eigen::VectorXd &x) {
    if (x.size() != rf.dim()) {
        throw DimensionError("parameter vector length does not match the response function");
    }
    Eigen::VectorXd y(rf.outputs.size());
    for (size_t k = 0; k < rf.outputs.size(); k++) {
        y[static_cast<Eigen::Index>(k)] = rf.outputs[k](x);
    }
    return y;
}

Eigen::MatrixXd to_upper_triangular(const Eigen::MatrixXd &chi) {
    Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(chi.rows(), chi.cols());
    for (Eigen::Index i = 0; i < chi.rows(); i++) {
        upper(i, i) = chi(i, i);
        for (Eigen::Index j = i + 1; j < chi.cols(); j++) {
            upper(i, j) = chi(i, j) + chi(j, i);
        }
    }
    return upper;
}

Eigen::MatrixXd from_upper_triangular(const Eigen::MatrixXd &upper) {
    Eigen::MatrixXd chi = upper.diagonal().asDiagonal();
    for (Eigen::Index i = 0; i < upper.rows(); i++) {
        for (Eigen::Index j = i + 1; j < upper.cols(); j++) {
            chi(i, j) = chi(j, i) = upper(i, j) / 2.0;
        }
    }
    return chi;
}

std::vector<std::string> monomial_names(const std::vector<std::string> &input_names) {
    std::vector<std::string> names;
    const size_t d = input_names.size();
    for (size_t i = 0; i < d; i++) {
        for (size_t j = i; j < d; j++) {
            names.push_back(input_names[i] + "*" + input_names[j]);
        }
    }
    names.insert(names.end(), input_names.begin(), input_names.end());
    names.push_back("1");
    return names;
}

QuadraticFit fit_quadratic(const Eigen::MatrixXd &inputs, const Eigen::MatrixXd &outputs,
                           const std::vector<std::string> &input_names,
                           const std::vector<std::string> &output_names,
                           const std::vector<double> &weights) {
    const Eigen::Index n = inputs.rows(), d = inputs.cols();
    if (outputs.rows() != n || static_cast<Eigen::Index>(input_names.size()) != d ||
        static_cast<Eigen::Index>(output_names.size()) != outputs.cols()) {
        throw DimensionError("pairs table dimensions disagree");
    }
    if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != n) {
        throw DimensionError("one weight per pair is required");
    }
    Eigen::MatrixXd a = design_matrix(inputs);
    Eigen::MatrixXd y = outputs;
    if (!weights.empty()) {
        for (Eigen::Index r = 0; r < n; r++) {
            if (!(weights[r] >= 0) || !std::isfinite(weights[r])) {
                throw InvariantError("pair weights must be finite and non-negative");
            }
            const double s = std::sqrt(weights[r]);
            a.row(r) *= s;
            y.row(r) *= s;
        }
    }
    const Eigen::Index p = a.cols();
    QuadraticFit result;
    auto &diag = result.diagnostics;
    diag.num_pairs = static_cast<int>(n);
    diag.num_unknowns = static_cast<int>(p);
    const double recommended = static_cast<double>(p) * std::log(static_cast<double>(p));
    if (static_cast<double>(n) < recommended) {
        std::ostringstream msg;
        msg << n << " pairs is below the recommended " << static_cast<long>(std::ceil(recommended))
            << " (n ln n for " << p << " unknowns per output)";
        diag.warnings.push_back(msg.str());
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < p) {
        throw FitError("quadratic design is rank deficient (rank " + std::to_string(qr.rank()) +
                       " of " + std::to_string(p) + "); null directions: " +
                       describe_null_directions(a, monomial_names(input_names)));
    }
    const Eigen::MatrixXd coef = qr.solve(y);
    const Eigen::MatrixXd residual = a * coef - y;

    result.rf.input_names = input_names;
    for (Eigen::Index o = 0; o < outputs.cols(); o++) {
        QuadraticForm form;
        form.name = output_names[o];
        form.chi = Eigen::MatrixXd::Zero(d, d);
        Eigen::Index col = 0;
        for (Eigen::Index i = 0; i < d; i++) {
            for (Eigen::Index j = i; j < d; j++) {
                const double c = coef(col++, o);
                if (i == j) {
                    form.chi(i, i) = c;
                } else {
                    form.chi(i, j) = form.chi(j, i) = c / 2.0;
                }
            }
        }
        form.lin = coef.col(o).segment(col, d);
        form.offset = coef(col + d, o);
        result.rf.outputs.push_back(std::move(form));
        diag.residual_norms.push_back(residual.col(o).norm());
    }
    return result;
}

PipelineResult simulate_response_pipeline(const NoiseSpec &noise, const Roster &roster,
                                          const PipelineOptions &options) {
    roster.validate();
    noise.validate();
    if (noise.n_spins() != roster.n_spins) {
        throw DimensionError("noise spec and roster disagree on the spin count");
    }
    if (options.n_models < 1 || options.grid.empty()) {
        throw InvariantError("pipeline needs at least one model and a non-empty grid");
    }
    const int d = roster.dim();
    const auto keys = roster.output_keys();
    PipelineResult result;
    result.inputs.resize(options.n_models, d);
    result.outputs.resize(options.n_models, static_cast<Eigen::Index>(keys.size()));
    LearnConfig config;
    config.order = 2;
    config.grad_tol = options.grad_tol;

    std::vector<std::exception_ptr> errors(options.n_models);
#pragma omp parallel for schedule(dynamic, 64)
    for (int m = 0; m < options.n_models; m++) {
        try {
            const uint64_t stream = derive_seed(options.seed, static_cast<uint64_t>(m));
            Rng rng(stream);
            Eigen::VectorXd x(d);
            for (int k = 0; k < d; k++) {
                x[k] = options.grid[rng.below(options.grid.size())];
            }
            const ExactDistribution dist = noisy_mixture_distribution(roster.to_model(x), noise);
            GibbsModel learned(roster.n_spins);
            if (options.mode == PipelineMode::kExactWeights) {
                learned = learn_model(dist, config).model;
            } else {
                const SampleSet samples =
                    sample_exact(dist, options.samples_per_model, derive_seed(stream, 1));
                learned = learn_model(samples, config).model;
            }
            result.inputs.row(m) = x.transpose();
            for (size_t k = 0; k < keys.size(); k++) {
                result.outputs(m, static_cast<Eigen::Index>(k)) = learned.coefficient(keys[k]);
            }
        } catch (...) {
            errors[m] = std::current_exception();
        }
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    result.fit = fit_quadratic(result.inputs, result.outputs, roster.input_names(),
                               roster.output_names());
    return result;
}

std::string pairs_to_csv(const Eigen::MatrixXd &inputs, const Eigen::MatrixXd &outputs,
                         const std::vector<std::string> &input_names,
                         const std::vector<std::string> &output_names) {
    std::ostringstream out;
    out.precision(17);
    std::vector<std::string> header = input_names;
    header.insert(header.end(), output_names.begin(), output_names.end());
    for (size_t k = 0; k < header.size(); k++) {
        out << (k ? "," : "") << header[k];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < inputs.rows(); r++) {
        for (Eigen::Index c = 0; c < inputs.cols(); c++) {
            out << (c ? "," : "") << inputs(r, c);
        }
        for (Eigen::Index c = 0; c < outputs.cols(); c++) {
            out << ',' << outputs(r, c);
        }
        out << '\n';
    }
    return out.str();
}

PairsTable parse_pairs_csv(const std::string &text, int num_inputs, const std::string &source) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        line_no++;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream fields(line);
        std::string cell;
        while (std::getline(fields, cell, ',')) {
            cells.push_back(cell);
        }
        if (header.empty()) {
            header = cells;
            if (num_inputs < 1 || num_inputs >= static_cast<int>(header.size())) {
                throw ParseError(source, line_no, "header must list inputs followed by outputs");
            }
            continue;
        }
        if (cells.size() != header.size()) {
            throw ParseError(source, line_no,
                             "expected " + std::to_string(header.size()) + " columns");
        }
        std::vector<double> row;
        for (const auto &c : cells) {
            try {
                size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size()) {
                    throw std::invalid_argument(c);
                }
            } catch (const std::exception &) {
                throw ParseError(source, line_no, "malformed number '" + c + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (header.empty()) {
        throw ParseError(source, 0, "empty pairs file");
    }
    PairsTable table;
    table.input_names.assign(header.begin(), header.begin() + num_inputs);
    table.output_names.assign(header.begin() + num_inputs, header.end());
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    table.inputs.resize(n, num_inputs);
    table.outputs.resize(n, static_cast<Eigen::Index>(header.size()) - num_inputs);
    for (Eigen::Index r = 0; r < n; r++) {
        for (size_t c = 0; c < header.size(); c++) {
            const auto ci = static_cast<Eigen::Index>(c);
            if (ci < num_inputs) {
                table.inputs(r, ci) = rows[r][c];
            } else {
                table.outputs(r, ci - num_inputs) = rows[r][c];
            }
        }
    }
    return table;
}

std::string response_to_json(const ResponseFunction &rf) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto &o : rf.outputs) {
        nlohmann::ordered_json chi = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < o.chi.rows(); i++) {
            std::vector<double> row(o.chi.cols());
            for (Eigen::Index j = 0; j < o.chi.cols(); j++) {
                row[j] = o.chi(i, j);
            }
            chi.push_back(row);
        }
        std::vector<double> lin(o.lin.data(), o.lin.data() + o.lin.size());
        doc[o.name] = {{"inputs", rf.input_names}, {"chi", chi}, {"lin", lin}, {"offset", o.offset}};
    }
    return doc.dump(2) + "\n";
}

ResponseFunction parse_response_json(const std::string &text, const std::string &source) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(source, 0, e.what());
    }
    if (!doc.is_object()) {
        throw ParseError(source, 0, "response function must be a JSON object");
    }
    ResponseFunction rf;
    bool first = true;
    for (const auto &[name, entry] : doc.items()) {
        try {
            const auto lin = entry.at("lin").get<std::vector<double>>();
            const auto chi = entry.at("chi").get<std::vector<std::vector<double>>>();
            std::vector<std::string> inputs;
            if (entry.contains("inputs")) {
                inputs = entry.at("inputs").get<std::vector<std::string>>();
            } else {
                for (size_t k = 0; k < lin.size(); k++) {
                    inputs.push_back("x" + std::to_string(k));
                }
            }
            if (first) {
                rf.input_names = inputs;
                first = false;
            } else if (inputs != rf.input_names) {
                throw ParseError(source, 0, name + ": inputs differ from the first output");
            }
            const Eigen::Index d = static_cast<Eigen::Index>(inputs.size());
            if (static_cast<Eigen::Index>(lin.size()) != d || static_cast<Eigen::Index>(chi.size()) != d) {
                throw ParseError(source, 0, name + ": dimension mismatch");
            }
            QuadraticForm form;
            form.name = name;
            form.lin = Eigen::Map<const Eigen::VectorXd>(lin.data(), d);
            form.chi.resize(d, d);
            for (Eigen::Index i = 0; i < d; i++) {
                if (static_cast<Eigen::Index>(chi[i].size()) != d) {
                    throw ParseError(source, 0, name + ": chi is not square");
                }
                for (Eigen::Index j = 0; j < d; j++) {
                    form.chi(i, j) = chi[i][j];
                }
            }
            form.offset = entry.at("offset").get<double>();
            rf.outputs.push_back(std::move(form));
        } catch (const nlohmann::json::exception &e) {
            throw ParseError(source, 0, name + ": " + e.what());
        }
    }
    try {
        rf.validate();
    } catch (const Error &e) {
        throw ParseError(source, 0, e.what());
    }
    return rf;
}

Roster four_spin_roster() {
    Roster roster;
    roster.n_spins = 4;
    roster.fields = {0, 1, 2, 3};
    roster.edges = {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
    roster.spin_labels = {"304", "308", "305", "309"};
    return roster;
}

NoiseSpec four_spin_noise() {
    NoiseSpec noise;
    noise.beta_field = {12.3, 12.9, 13.1, 12.7};
    noise.h_bias = {0.014, -0.005, 0.003, 0.004};
    noise.h_sd = {0.029, 0.032, 0.041, 0.048};
    noise.beta_edge = {{{0, 1}, 12.1}, {{0, 3}, 12.2}, {{1, 2}, 12.5}, {{2, 3}, 12.6}};
    noise.default_beta_edge = 12.0;
    noise.kind = NoiseKind::kBinary;
    return noise;
}

}  // namespace gibbsprobe
