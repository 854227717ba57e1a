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

#include "gibbsprobe/iso.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "gibbsprobe/errors.h"
#include "json.hpp"

namespace gibbsprobe {

namespace {

// Rows are configurations, columns are keys: entry = prod_{i in key} s_i.
Eigen::MatrixXd feature_matrix(const WeightedConfigs &data, const std::vector<TermKey> &keys) {
    Eigen::MatrixXd phi(data.configs.size(), keys.size());
    for (size_t k = 0; k < keys.size(); k++) {
        const uint64_t mask = term_mask(keys[k]);
        for (size_t c = 0; c < data.configs.size(); c++) {
            phi(c, k) = (std::popcount(mask & ~data.configs[c]) & 1) ? -1.0 : 1.0;
        }
    }
    return phi;
}

struct Objective {
    const Eigen::MatrixXd &phi;
    const Eigen::VectorXd &weights;

    // value; fills weighted screening factors w_c exp(-z_c).
    double value(const Eigen::VectorXd &theta, Eigen::VectorXd &screened) const {
        screened = (-(phi * theta)).array().exp() * weights.array();
        return screened.sum();
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd &screened) const {
        return -(phi.transpose() * screened);
    }
    Eigen::MatrixXd hessian(const Eigen::VectorXd &screened) const {
        return phi.transpose() * screened.asDiagonal() * phi;
    }
};

bool focal_is_constant(const WeightedConfigs &data, int focal) {
    const uint64_t bit = uint64_t{1} << focal;
    const bool first = data.configs.front() & bit;
    return std::all_of(data.configs.begin(), data.configs.end(),
                       [&](uint64_t c) { return static_cast<bool>(c & bit) == first; });
}

// Damped Newton with Armijo backtracking.
int minimize_newton(const Objective &obj, Eigen::VectorXd &theta, const LearnConfig &config,
                    double &grad_norm) {
    Eigen::VectorXd screened, trial_screened;
    double f = obj.value(theta, screened);
    for (int iter = 0; iter < config.max_iter; iter++) {
        const Eigen::VectorXd g = obj.gradient(screened);
        grad_norm = g.norm();
        if (grad_norm <= config.grad_tol) {
            return iter;
        }
        Eigen::VectorXd direction;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(obj.hessian(screened));
        if (ldlt.info() == Eigen::Success) {
            direction = -ldlt.solve(g);
        }
        if (direction.size() == 0 || !direction.allFinite() || g.dot(direction) >= 0) {
            direction = -g;
        }
        const double slope = g.dot(direction);
        // Predicted decrease below roundoff in f: judge the full step by the gradient instead.
        if (-slope <= 1e-14 * std::max(1.0, std::abs(f))) {
            Eigen::VectorXd trial = theta + direction;
            const double f_trial = obj.value(trial, trial_screened);
            const double trial_norm = obj.gradient(trial_screened).norm();
            if (std::isfinite(f_trial) && trial_norm < grad_norm) {
                theta = std::move(trial);
                f = f_trial;
                screened.swap(trial_screened);
                continue;
            }
            return -1;
        }
        double step = 1.0;
        bool accepted = false;
        for (int k = 0; k < 60; k++) {
            Eigen::VectorXd trial = theta + step * direction;
            const double f_trial = obj.value(trial, trial_screened);
            if (std::isfinite(f_trial) && f_trial <= f + 1e-4 * step * slope) {
                theta = std::move(trial);
                f = f_trial;
                screened.swap(trial_screened);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No representable decrease left; report where we are.
            grad_norm = obj.gradient(screened).norm();
            return grad_norm <= config.grad_tol ? iter : -1;
        }
    }
    grad_norm = obj.gradient(screened).norm();
    return grad_norm <= config.grad_tol ? config.max_iter : -1;
}

double soft_threshold(double x, double t) {
    return x > t ? x - t : (x < -t ? x + t : 0.0);
}

// Accelerated proximal gradient (FISTA) with backtracking for the l1-penalized objective.
int minimize_l1(const Objective &obj, Eigen::VectorXd &theta, const std::vector<bool> &penalized,
                const LearnConfig &config, double &grad_norm) {
    const int max_iter = config.max_iter * 100;
    auto prox = [&](const Eigen::VectorXd &v, double step) {
        Eigen::VectorXd out = v;
        for (Eigen::Index k = 0; k < v.size(); k++) {
            if (penalized[k]) {
                out[k] = soft_threshold(v[k], step * config.l1_penalty);
            }
        }
        return out;
    };
    Eigen::VectorXd y = theta, screened, trial_screened;
    double momentum = 1.0;
    double step = 1.0;
    for (int iter = 0; iter < max_iter; iter++) {
        const double fy = obj.value(y, screened);
        const Eigen::VectorXd g = obj.gradient(screened);
        Eigen::VectorXd next;
        for (int k = 0; k < 80; k++) {
            next = prox(y - step * g, step);
            const Eigen::VectorXd diff = next - y;
            const double f_next = obj.value(next, trial_screened);
            if (std::isfinite(f_next) &&
                f_next <= fy + g.dot(diff) + diff.squaredNorm() / (2 * step)) {
                break;
            }
            step *= 0.5;
        }
        // Gradient mapping at y measures stationarity of the composite problem.
        grad_norm = ((y - next) / step).norm();
        const double next_momentum = (1 + std::sqrt(1 + 4 * momentum * momentum)) / 2;
        const Eigen::VectorXd previous = theta;
        theta = next;
        if (grad_norm <= config.grad_tol) {
            return iter;
        }
        y = theta + ((momentum - 1) / next_momentum) * (theta - previous);
        momentum = next_momentum;
        step *= 2;
    }
    return -1;
}

}  // namespace

WeightedConfigs WeightedConfigs::from(const SampleSet &samples) {
    WeightedConfigs data;
    data.n_spins = samples.n_spins();
    const double total = static_cast<double>(samples.total());
    for (const auto &r : samples.records()) {
        data.configs.push_back(r.bits);
        data.weights.push_back(static_cast<double>(r.count) / total);
    }
    return data;
}

WeightedConfigs WeightedConfigs::from(const ExactDistribution &dist) {
    WeightedConfigs data;
    data.n_spins = dist.n_spins;
    double total = 0.0;
    for (size_t c = 0; c < dist.probs.size(); c++) {
        if (dist.probs[c] > 0) {
            data.configs.push_back(c);
            data.weights.push_back(dist.probs[c]);
            total += dist.probs[c];
        }
    }
    if (total <= 0) {
        throw InvariantError("distribution has no positive probabilities");
    }
    for (double &w : data.weights) {
        w /= total;
    }
    return data;
}

void NeighborhoodParams::validate(int n_spins) const {
    if (focal < 0 || focal >= n_spins) {
        throw InvariantError("focal spin out of range");
    }
    for (const auto &entry : coeffs) {
        const auto &key = entry.first;
        if (key.empty() || std::find(key.begin(), key.end(), focal) == key.end()) {
            throw InvariantError("neighborhood key " + format_key(key) + " misses the focal spin");
        }
        for (size_t k = 0; k < key.size(); k++) {
            if (key[k] < 0 || key[k] >= n_spins || (k > 0 && key[k] <= key[k - 1])) {
                throw InvariantError("neighborhood key " + format_key(key) + " is invalid");
            }
        }
    }
}

IsoEvaluation iso_value_grad(const WeightedConfigs &data, const NeighborhoodParams &params) {
    params.validate(data.n_spins);
    std::vector<TermKey> keys;
    Eigen::VectorXd theta(params.coeffs.size());
    for (const auto &[key, value] : params.coeffs) {
        theta[static_cast<Eigen::Index>(keys.size())] = value;
        keys.push_back(key);
    }
    const Eigen::MatrixXd phi = feature_matrix(data, keys);
    const Eigen::VectorXd weights =
        Eigen::Map<const Eigen::VectorXd>(data.weights.data(), data.weights.size());
    const Objective obj{phi, weights};
    Eigen::VectorXd screened;
    IsoEvaluation out;
    out.value = obj.value(theta, screened);
    const Eigen::VectorXd g = obj.gradient(screened);
    out.gradient.assign(g.data(), g.data() + g.size());
    return out;
}

IsoEvaluation iso_value_grad(const SampleSet &data, const NeighborhoodParams &params) {
    return iso_value_grad(WeightedConfigs::from(data), params);
}

IsoEvaluation iso_value_grad(const ExactDistribution &data, const NeighborhoodParams &params) {
    return iso_value_grad(WeightedConfigs::from(data), params);
}

std::vector<TermKey> neighborhood_keys(int n_spins, int focal, int order) {
    std::vector<int> others;
    for (int j = 0; j < n_spins; j++) {
        if (j != focal) {
            others.push_back(j);
        }
    }
    std::vector<TermKey> keys;
    // Subsets of the other spins with at most order - 1 members.
    const uint64_t n_subsets = uint64_t{1} << others.size();
    for (uint64_t subset = 0; subset < n_subsets; subset++) {
        if (std::popcount(subset) > order - 1) {
            continue;
        }
        TermKey key{focal};
        for (size_t j = 0; j < others.size(); j++) {
            if ((subset >> j) & 1) {
                key.push_back(others[j]);
            }
        }
        std::sort(key.begin(), key.end());
        keys.push_back(std::move(key));
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

NeighborhoodFit learn_neighborhood(const WeightedConfigs &data, int focal,
                                   const LearnConfig &config) {
    if (data.configs.empty()) {
        throw InvariantError("cannot learn from empty data");
    }
    if (focal < 0 || focal >= data.n_spins) {
        throw InvariantError("focal spin out of range");
    }
    if (config.order < 1 || config.order > data.n_spins) {
        throw InvariantError("learning order must lie in [1, n_spins]");
    }
    if (config.l1_penalty < 0) {
        throw InvariantError("l1 penalty must be non-negative");
    }
    if (focal_is_constant(data, focal)) {
        throw LearnError("spin " + std::to_string(focal) +
                             " is constant across all samples; its field is unbounded",
                         focal, std::numeric_limits<double>::infinity());
    }
    const auto keys = neighborhood_keys(data.n_spins, focal, config.order);
    const Eigen::MatrixXd phi = feature_matrix(data, keys);
    const Eigen::VectorXd weights =
        Eigen::Map<const Eigen::VectorXd>(data.weights.data(), data.weights.size());
    const Objective obj{phi, weights};

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(keys.size());
    double grad_norm = 0.0;
    int iterations;
    if (config.l1_penalty > 0) {
        std::vector<bool> penalized;
        for (const auto &key : keys) {
            penalized.push_back(key.size() > 1);
        }
        iterations = minimize_l1(obj, theta, penalized, config, grad_norm);
    } else {
        iterations = minimize_newton(obj, theta, config, grad_norm);
    }
    if (iterations < 0) {
        std::ostringstream msg;
        msg << "screening objective of spin " << focal << " did not converge (gradient norm "
            << grad_norm << " > " << config.grad_tol << ")";
        throw LearnError(msg.str(), focal, grad_norm);
    }
    NeighborhoodFit fit;
    fit.params.focal = focal;
    for (size_t k = 0; k < keys.size(); k++) {
        fit.params.coeffs[keys[k]] = theta[static_cast<Eigen::Index>(k)];
    }
    fit.grad_norm = grad_norm;
    fit.iterations = iterations;
    return fit;
}

LearnResult learn_model(const WeightedConfigs &data, const LearnConfig &config) {
    const int n = data.n_spins;
    std::vector<NeighborhoodFit> fits(n);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (int focal = 0; focal < n; focal++) {
        try {
            fits[focal] = learn_neighborhood(data, focal, config);
        } catch (...) {
            errors[focal] = std::current_exception();
        }
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::map<TermKey, std::pair<double, int>> sums;
    for (const auto &fit : fits) {
        for (const auto &[key, value] : fit.params.coeffs) {
            auto &slot = sums[key];
            slot.first += value;
            slot.second += 1;
        }
    }
    GibbsModel::TermMap terms;
    for (const auto &[key, slot] : sums) {
        terms[key] = slot.first / slot.second;
    }
    return LearnResult{GibbsModel(n, std::move(terms)), std::move(fits)};
}

LearnResult learn_model(const SampleSet &data, const LearnConfig &config) {
    return learn_model(WeightedConfigs::from(data), config);
}

LearnResult learn_model(const ExactDistribution &data, const LearnConfig &config) {
    return learn_model(WeightedConfigs::from(data), config);
}

std::string learn_report_json(const LearnResult &result, const LearnConfig &config) {
    nlohmann::ordered_json doc;
    doc["n_spins"] = result.model.n_spins();
    doc["order"] = config.order;
    doc["grad_tol"] = config.grad_tol;
    doc["l1_penalty"] = config.l1_penalty;
    doc["neighborhoods"] = nlohmann::ordered_json::array();
    for (const auto &fit : result.neighborhoods) {
        doc["neighborhoods"].push_back({{"focal", fit.params.focal},
                                        {"grad_norm", fit.grad_norm},
                                        {"iterations", fit.iterations}});
    }
    doc["terms"] = nlohmann::ordered_json::array();
    for (const auto &[key, value] : result.model.terms()) {
        nlohmann::ordered_json estimates = nlohmann::ordered_json::array();
        for (const auto &fit : result.neighborhoods) {
            auto it = fit.params.coeffs.find(key);
            if (it != fit.params.coeffs.end()) {
                estimates.push_back({{"focal", fit.params.focal}, {"value", it->second}});
            }
        }
        doc["terms"].push_back({{"spins", key}, {"value", value}, {"estimates", estimates}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace gibbsprobe
