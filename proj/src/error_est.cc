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

#include "gibbsprobe/error_est.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <optional>
#include <sstream>

#include "gibbsprobe/errors.h"
#include "gibbsprobe/rng.h"
#include "gibbsprobe/sampler.h"
#include "json.hpp"

namespace gibbsprobe {

ErrorReport estimate_error(const GibbsModel &reference, uint64_t num_samples, int num_replicates,
                           const LearnConfig &config, uint64_t seed, int cap) {
    if (num_replicates < 2) {
        throw InvariantError("error estimation needs at least 2 replicates");
    }
    if (num_samples < 1) {
        throw InvariantError("error estimation needs at least 1 sample per replicate");
    }
    const ExactDistribution dist = exact_distribution(reference, cap);

    std::vector<std::optional<GibbsModel>> learned(num_replicates);
    std::vector<std::string> messages(num_replicates);
    std::vector<std::exception_ptr> fatal(num_replicates);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < num_replicates; r++) {
        try {
            const SampleSet samples = sample_exact(dist, num_samples, derive_seed(seed, r));
            learned[r] = learn_model(samples, config).model;
        } catch (const LearnError &e) {
            messages[r] = "replicate " + std::to_string(r) + ": " + e.what();
        } catch (...) {
            fatal[r] = std::current_exception();
        }
    }
    for (const auto &e : fatal) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    ErrorReport report;
    report.n_spins = reference.n_spins();
    report.num_samples = num_samples;
    report.seed = seed;
    report.order = config.order;
    for (int r = 0; r < num_replicates; r++) {
        if (!learned[r]) {
            report.num_failed++;
            report.failures.push_back(messages[r]);
        }
    }
    report.num_replicates = num_replicates - report.num_failed;
    if (report.num_failed * 10 > num_replicates) {
        throw Error(std::to_string(report.num_failed) + " of " + std::to_string(num_replicates) +
                    " replicates failed to learn; first: " + report.failures.front());
    }
    if (report.num_replicates < 2) {
        throw Error("fewer than 2 successful replicates");
    }

    std::map<TermKey, std::vector<double>> deviations;
    for (const auto &[key, value] : reference.terms()) {
        deviations[key];
    }
    for (const auto &model : learned) {
        if (model) {
            for (const auto &[key, value] : model->terms()) {
                deviations[key];
            }
        }
    }
    for (auto &[key, devs] : deviations) {
        for (const auto &model : learned) {
            if (model) {
                devs.push_back(reference.coefficient(key) - model->coefficient(key));
            }
        }
    }
    double sigma_sum = 0.0;
    for (const auto &[key, devs] : deviations) {
        const double n = static_cast<double>(devs.size());
        double mean = 0.0;
        for (double d : devs) {
            mean += d;
        }
        mean /= n;
        double ss = 0.0;
        for (double d : devs) {
            ss += (d - mean) * (d - mean);
        }
        const double sigma = std::sqrt(ss / (n - 1));
        report.terms.push_back({key, mean, sigma});
        sigma_sum += sigma;
    }
    if (!report.terms.empty()) {
        report.threshold = 3.0 * sigma_sum / static_cast<double>(report.terms.size());
    }
    return report;
}

std::set<TermKey> significance_mask(const GibbsModel &learned, const ErrorReport &report) {
    std::set<TermKey> out;
    for (const auto &[key, value] : learned.terms()) {
        if (std::abs(value) > report.threshold) {
            out.insert(key);
        }
    }
    return out;
}

ScalingReport consistency_scaling(const GibbsModel &reference, const std::vector<uint64_t> &sizes,
                                  int num_replicates, const LearnConfig &config, uint64_t seed,
                                  int cap) {
    if (sizes.size() < 2 || num_replicates < 1) {
        throw InvariantError("scaling needs at least 2 sample sizes and 1 replicate");
    }
    const ExactDistribution dist = exact_distribution(reference, cap);
    ScalingReport report;
    for (size_t k = 0; k < sizes.size(); k++) {
        std::vector<double> max_errors(num_replicates);
        std::vector<std::exception_ptr> errors(num_replicates);
        const uint64_t stream = derive_seed(seed, k);
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < num_replicates; r++) {
            try {
                const SampleSet samples = sample_exact(dist, sizes[k], derive_seed(stream, r));
                const GibbsModel learned = learn_model(samples, config).model;
                double worst = 0.0;
                for (const auto &[key, value] : learned.terms()) {
                    worst = std::max(worst, std::abs(reference.coefficient(key) - value));
                }
                for (const auto &[key, value] : reference.terms()) {
                    worst = std::max(worst, std::abs(value - learned.coefficient(key)));
                }
                max_errors[r] = worst;
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
        for (const auto &e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
        double mean = 0.0;
        for (double e : max_errors) {
            mean += e;
        }
        report.points.push_back({sizes[k], mean / num_replicates});
    }
    // Ordinary least squares on log-log axes.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(report.points.size());
    for (const auto &p : report.points) {
        const double x = std::log10(static_cast<double>(p.num_samples));
        const double y = std::log10(p.mean_max_error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    report.intercept = (sy - report.slope * sx) / n;
    return report;
}

std::string error_report_json(const ErrorReport &report) {
    nlohmann::ordered_json doc;
    doc["n_spins"] = report.n_spins;
    doc["num_samples"] = report.num_samples;
    doc["num_replicates"] = report.num_replicates;
    doc["num_failed"] = report.num_failed;
    doc["failures"] = report.failures;
    doc["seed"] = report.seed;
    doc["order"] = report.order;
    doc["threshold"] = report.threshold;
    doc["terms"] = nlohmann::ordered_json::array();
    for (const auto &t : report.terms) {
        doc["terms"].push_back({{"spins", t.key}, {"mean", t.mean}, {"sigma", t.sigma}});
    }
    return doc.dump(2) + "\n";
}

std::string error_report_csv(const ErrorReport &report) {
    std::ostringstream out;
    out.precision(17);
    out << "term,mean,sigma\n";
    for (const auto &t : report.terms) {
        out << format_key(t.key) << ',' << t.mean << ',' << t.sigma << '\n';
    }
    return out.str();
}

}  // namespace gibbsprobe
