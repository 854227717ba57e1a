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

#include "gibbsprobe/reproduce.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gibbsprobe/error_est.h"
#include "gibbsprobe/errors.h"
#include "gibbsprobe/four_spin.h"
#include "gibbsprobe/iso.h"
#include "gibbsprobe/noise_oracle.h"
#include "gibbsprobe/response.h"
#include "gibbsprobe/sampler.h"
#include "gibbsprobe/single_qubit.h"
#include "json.hpp"

#ifndef GIBBSPROBE_DATA_DIR
#define GIBBSPROBE_DATA_DIR "data"
#endif

namespace gibbsprobe {

namespace {

using Json = nlohmann::json;

// Stream index of the independent draw that is tested for significance.
constexpr uint64_t kProbeStream = uint64_t{1} << 32;

Json load_reference(const ReproduceOptions &options) {
    const std::string path = options.reference_path.empty()
                                 ? default_data_dir() + "/reference_values.json"
                                 : options.reference_path;
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, "cannot open reference values");
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception &e) {
        throw ParseError(path, 0, e.what());
    }
}

void rethrow_first(const std::vector<std::exception_ptr> &errors) {
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::string fmt(double x, int precision = 6) {
    std::ostringstream out;
    out.precision(precision);
    out << x;
    return out.str();
}

PipelineResult run_four_spin_pipeline(const ReproduceOptions &options) {
    PipelineOptions pipeline;
    pipeline.n_models = options.n_models;
    pipeline.seed = options.seed;
    return simulate_response_pipeline(four_spin_noise(), four_spin_roster(), pipeline);
}

ReproduceResult linear_response(const ReproduceOptions &options) {
    const Json ref = load_reference(options).at("linear_self_response");
    const double tol = ref.at("tolerance_abs").get<double>();
    const Roster roster = four_spin_roster();
    const PipelineResult run = run_four_spin_pipeline(options);
    ReproduceResult result;
    std::ostringstream csv;
    csv << "output,input,simulated,reference,tolerance,pass\n";
    for (const auto &entry : ref.at("entries")) {
        const auto output = entry.at("output").get<std::string>();
        const auto input = entry.at("input").get<std::string>();
        const double expected = entry.at("value").get<double>();
        const double got = run.fit.rf.output(output).lin[roster.input_index(input)];
        const bool pass = std::abs(got - expected) <= tol;
        csv << output << ',' << input << ',' << fmt(got) << ',' << expected << ',' << tol << ','
            << pass << '\n';
        result.checks.push_back({"linear " + output + " <- " + input, pass,
                                 fmt(got, 4) + " vs " + fmt(expected) + " +/- " + fmt(tol)});
    }
    result.csv = csv.str();
    return result;
}

ReproduceResult quadratic_response(const ReproduceOptions &options) {
    const Json ref = load_reference(options).at("quadratic_response");
    const double tol_rel = ref.at("tolerance_rel").get<double>();
    const double tol_abs = ref.at("tolerance_abs").get<double>();
    const Roster roster = four_spin_roster();
    const PipelineResult run = run_four_spin_pipeline(options);
    ReproduceResult result;
    std::ostringstream csv;
    csv << "output,input_a,input_b,simulated,reference,tolerance,pass\n";
    for (const auto &entry : ref.at("entries")) {
        const auto output = entry.at("output").get<std::string>();
        const auto inputs = entry.at("inputs").get<std::vector<std::string>>();
        const double expected = entry.at("value").get<double>();
        const double got =
            run.fit.rf.output(output).chi(roster.input_index(inputs[0]), roster.input_index(inputs[1]));
        const double tol = std::max(tol_rel * std::abs(expected), tol_abs);
        const bool pass = std::abs(got - expected) <= tol && got < 0;
        csv << output << ',' << inputs[0] << ',' << inputs[1] << ',' << fmt(got) << ',' << expected
            << ',' << tol << ',' << pass << '\n';
        result.checks.push_back({"chi " + output + " <- " + inputs[0] + "*" + inputs[1], pass,
                                 fmt(got, 4) + " vs " + fmt(expected) + " +/- " + fmt(tol, 3) +
                                     ", negative"});
    }
    result.csv = csv.str();
    return result;
}

ReproduceResult threshold(const ReproduceOptions &options) {
    const Json ref = load_reference(options).at("significance_threshold");
    const double tol_rel = ref.at("tolerance_rel").get<double>();
    ReproduceResult result;
    std::ostringstream csv;
    csv << "case,term,order,learned,mean_deviation,sigma,threshold,significant\n";
    uint64_t case_index = 0;
    for (const auto &c : ref.at("cases")) {
        const auto name = c.at("name").get<std::string>();
        const int n = c.at("n_spins").get<int>();
        const double coupling = c.at("beta").get<double>() * c.at("coupling").get<double>();
        const GibbsModel reference = n == 8 ? cell_ferromagnet_8(coupling) : cell_ferromagnet_4(coupling);
        const uint64_t m_full = c.at("num_samples").get<uint64_t>();
        uint64_t m = m_full;
        int replicates = c.at("replicates").get<int>();
        double target = c.at("value").get<double>();
        if (options.reduced) {
            m = ref.at("reduced").at("num_samples").get<uint64_t>();
            replicates = ref.at("reduced").at("replicates").get<int>();
            target *= std::sqrt(static_cast<double>(m_full) / static_cast<double>(m));
        }
        LearnConfig config;
        config.order = c.at("order").get<int>();
        const uint64_t stream = derive_seed(options.seed, case_index++);
        const ErrorReport report = estimate_error(reference, m, replicates, config, stream);

        const ExactDistribution dist = exact_distribution(reference);
        const GibbsModel learned =
            learn_model(sample_exact(dist, m, derive_seed(stream, kProbeStream)), config).model;
        const auto significant = significance_mask(learned, report);

        const bool threshold_ok = std::abs(report.threshold - target) <= tol_rel * target;
        result.checks.push_back({name + " threshold", threshold_ok,
                                 fmt(report.threshold, 4) + " vs " + fmt(target, 4) + " +/- " +
                                     fmt(100 * tol_rel, 3) + "% (M=" + std::to_string(m) +
                                     ", R=" + std::to_string(report.num_replicates) + ")"});
        int edges_found = 0, edges_total = 0, high_order = 0, spurious_pairs = 0;
        std::string high_order_terms;
        for (const auto &[key, value] : reference.terms()) {
            edges_total++;
            edges_found += significant.count(key) ? 1 : 0;
        }
        for (const auto &key : significant) {
            if (key.size() >= 3) {
                high_order++;
                if (high_order <= 5) {
                    high_order_terms += " " + format_key(key) + "=" + fmt(learned.coefficient(key), 3);
                }
            } else if (key.size() == 2 && !reference.terms().count(key)) {
                spurious_pairs++;
            }
        }
        result.checks.push_back({name + " input edges significant", edges_found == edges_total,
                                 std::to_string(edges_found) + " of " + std::to_string(edges_total)});
        result.checks.push_back(
            {name + " no significant term of order >= 3", high_order == 0,
             std::to_string(high_order) + " significant" +
                 (high_order_terms.empty() ? "" : ":" + high_order_terms) +
                 "; order-2 non-edges significant: " + std::to_string(spurious_pairs)});
        for (const auto &t : report.terms) {
            csv << name << ',' << format_key(t.key) << ',' << t.key.size() << ','
                << fmt(learned.coefficient(t.key), 10) << ',' << fmt(t.mean, 10) << ','
                << fmt(t.sigma, 10) << ',' << fmt(report.threshold, 10) << ','
                << significant.count(t.key) << '\n';
        }
    }
    result.csv = csv.str();
    return result;
}

ReproduceResult srt_means(const ReproduceOptions &options) {
    const Json ref = load_reference(options);
    const double tol = ref.at("srt_mean_tolerance").get<double>();
    ReproduceResult result;
    std::ostringstream csv;
    csv << "case,n_spins,noise_kind,max_abs_mean\n";
    Rng rng(derive_seed(options.seed, 0));
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    double worst = 0.0;
    int case_id = 0;
    for (int n = 1; n <= 4; n++) {
        for (NoiseKind kind : {NoiseKind::kBinary, NoiseKind::kUniform}) {
            GibbsModel::TermMap terms;
            for (int i = 0; i < n; i++) {
                for (int j = i + 1; j < n; j++) {
                    terms[{i, j}] = uniform(-0.05, 0.05);
                }
            }
            NoiseSpec noise = NoiseSpec::uniform(n, 12.0);
            for (int i = 0; i < n; i++) {
                noise.beta_field[i] = uniform(10.0, 14.0);
                noise.h_bias[i] = uniform(-0.02, 0.02);
                noise.h_sd[i] = uniform(0.0, 0.05);
            }
            noise.default_beta_edge = uniform(10.0, 14.0);
            noise.kind = kind;
            const SrtResult srt = srt_effective_distribution(GibbsModel(n, terms), noise);
            double case_worst = 0.0;
            for (int i = 0; i < n; i++) {
                case_worst = std::max(case_worst, std::abs(srt.dist.mean(i)));
            }
            worst = std::max(worst, case_worst);
            csv << case_id++ << ',' << n << ',' << (kind == NoiseKind::kBinary ? "binary" : "uniform")
                << ',' << fmt(case_worst, 6) << '\n';
        }
    }
    result.checks.push_back({"spin means vanish under gauge averaging", worst <= tol,
                             "max |mean| " + fmt(worst, 3) + " <= " + fmt(tol, 3)});

    // Gauge covariance of learning on finite samples from a biased noisy sampler.
    const Roster roster = four_spin_roster();
    Eigen::VectorXd x(roster.dim());
    for (int k = 0; k < roster.dim(); k++) {
        x[k] = uniform(-0.05, 0.05);
    }
    const SampleSet samples =
        sample_noisy(roster.to_model(x), four_spin_noise(), 200000, derive_seed(options.seed, 1));
    LearnConfig config;
    config.order = 2;
    const GibbsModel learned = learn_model(samples, config).model;
    double gauge_worst = 0.0;
    for (uint64_t mask = 0; mask < 16; mask++) {
        const GaugeVector tau = GaugeVector::from_flip_mask(mask, 4);
        const GibbsModel direct = learn_model(apply_gauge_samples(samples, tau), config).model;
        const GibbsModel mapped = apply_gauge(learned, tau);
        for (const auto &[key, value] : direct.terms()) {
            gauge_worst = std::max(gauge_worst, std::abs(value - mapped.coefficient(key)));
        }
    }
    result.checks.push_back({"learning is gauge covariant", gauge_worst <= 1e-7,
                             "max deviation " + fmt(gauge_worst, 3) + " <= 1e-07 over 16 gauges"});
    result.csv = csv.str();
    return result;
}

ReproduceResult oracle_grid(const ReproduceOptions &options) {
    const double tol = load_reference(options).at("oracle_tolerance").get<double>();
    ReproduceResult result;
    std::ostringstream csv;
    csv << "kind,beta,coupling_a,coupling_b,h_sd,closed_form,learned,abs_diff\n";
    LearnConfig config;
    config.order = 2;
    config.grad_tol = 1e-13;
    config.max_iter = 500;

    const auto fields = field_oracle_grid();
    std::vector<double> learned_field(fields.size());
    std::vector<std::exception_ptr> errors(fields.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t k = 0; k < fields.size(); k++) {
        try {
            const ToyInstance toy = toy_instance(fields[k]);
            learned_field[k] = learn_mixture_model(toy.input, toy.noise, config).coefficient({0});
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);
    double worst_field = 0.0;
    for (size_t k = 0; k < fields.size(); k++) {
        const auto &s = fields[k];
        const double closed = s.beta * effective_field(s);
        const double diff = std::abs(closed - learned_field[k]);
        worst_field = std::max(worst_field, diff);
        csv << "field," << s.beta << ',' << s.J << ',' << s.h2 << ',' << s.h_sd1 << ','
            << fmt(closed, 15) << ',' << fmt(learned_field[k], 15) << ',' << fmt(diff, 3) << '\n';
    }

    const auto couplings = coupling_oracle_grid();
    std::vector<double> learned_coupling(couplings.size());
    errors.assign(couplings.size(), nullptr);
#pragma omp parallel for schedule(dynamic)
    for (size_t k = 0; k < couplings.size(); k++) {
        try {
            const ToyInstance toy = toy_instance(couplings[k]);
            learned_coupling[k] = learn_mixture_model(toy.input, toy.noise, config).coefficient({0, 2});
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);
    double worst_coupling = 0.0;
    for (size_t k = 0; k < couplings.size(); k++) {
        const auto &s = couplings[k];
        const double closed = s.beta * effective_coupling(s);
        const double diff = std::abs(closed - learned_coupling[k]);
        worst_coupling = std::max(worst_coupling, diff);
        csv << "coupling," << s.beta << ',' << s.J12 << ',' << s.J23 << ',' << s.h_sd1 << ','
            << fmt(closed, 15) << ',' << fmt(learned_coupling[k], 15) << ',' << fmt(diff, 3) << '\n';
    }
    result.checks.push_back({"effective field closed form vs mixture learning", worst_field <= tol,
                             std::to_string(fields.size()) + " points, max |diff| " +
                                 fmt(worst_field, 3) + " <= " + fmt(tol, 3)});
    result.checks.push_back({"effective coupling closed form vs mixture learning",
                             worst_coupling <= tol,
                             std::to_string(couplings.size()) + " points, max |diff| " +
                                 fmt(worst_coupling, 3) + " <= " + fmt(tol, 3)});
    result.csv = csv.str();
    return result;
}

ReproduceResult single_qubit(const ReproduceOptions &options) {
    const Json ref = load_reference(options).at("single_qubit");
    ReproduceResult result;
    SingleQubitFit truth;
    truth.kind = ResponseKind::kNoisyQuantum;
    truth.beta = ref.at("beta").get<double>();
    truth.h_res0 = ref.at("h_res0").get<double>();
    truth.xi = ref.at("xi").get<double>();
    truth.h_sd = ref.at("h_sd").get<double>();
    std::ostringstream csv;

    // Small-field slope with h_res0 = xi = 0, Richardson-extrapolated central differences.
    auto slope_at_zero = [&](double step) {
        return (h_out_qnoise(step, truth.beta, 0.0, 0.0, truth.h_sd) -
                h_out_qnoise(-step, truth.beta, 0.0, 0.0, truth.h_sd)) /
               (2 * step);
    };
    const double slope = (4 * slope_at_zero(5e-6) - slope_at_zero(1e-5)) / 3;
    const double expected_slope = truth.beta / std::pow(std::cosh(truth.beta * truth.h_sd), 2);
    const double slope_tol = ref.at("slope_tolerance").get<double>();
    result.checks.push_back({"noisy slope at zero field", std::abs(slope - expected_slope) <= slope_tol,
                             fmt(slope, 12) + " vs " + fmt(expected_slope, 12)});

    // Synthetic scan and noisy-quantum refit.
    const auto grid = uniform_grid(-1.0, 1.0, ref.at("num_points").get<int>());
    const FieldScan scan =
        synthetic_scan(truth, grid, ref.at("samples_per_point").get<uint64_t>(), options.seed);
    const SingleQubitFit fit = fit_scan(scan, ResponseKind::kNoisyQuantum);
    const double tb = ref.at("tolerance_beta_rel").get<double>();
    const double ts = ref.at("tolerance_h_sd_rel").get<double>();
    const double tr = ref.at("tolerance_h_res0_abs").get<double>();
    const double tx = ref.at("tolerance_xi_abs").get<double>();
    const bool fit_ok = std::abs(fit.beta - truth.beta) <= tb * truth.beta &&
                        std::abs(fit.h_sd - truth.h_sd) <= ts * truth.h_sd &&
                        std::abs(fit.h_res0 - truth.h_res0) <= tr && std::abs(fit.xi - truth.xi) <= tx;
    result.checks.push_back({"synthetic refit recovers parameters", fit_ok,
                             "beta " + fmt(fit.beta, 5) + ", h_res0 " + fmt(fit.h_res0, 4) + ", xi " +
                                 fmt(fit.xi, 4) + ", h_sd " + fmt(fit.h_sd, 4)});

    // Binary vs uniform noise shapes.
    double sup = 0.0, sup_mag = 0.0;
    csv << "h_in,binary,uniform\n";
    for (int k = 0; k <= 2000; k++) {
        const double h = -1.0 + k * 1e-3;
        const double binary = h_out_qnoise(h, truth.beta, truth.h_res0, truth.xi, truth.h_sd);
        const double flat = h_out_qnoise_uniform(h, truth.beta, truth.h_res0, truth.xi, truth.h_sd);
        sup = std::max(sup, std::abs(binary - flat));
        sup_mag = std::max(sup_mag, std::abs(std::tanh(binary) - std::tanh(flat)));
        if (k % 20 == 0) {
            csv << fmt(h, 4) << ',' << fmt(binary, 10) << ',' << fmt(flat, 10) << '\n';
        }
    }
    const double sup_tol = ref.at("noise_shape_sup_norm").get<double>();
    result.checks.push_back({"binary vs uniform noise curves", sup < sup_tol,
                             "sup norm " + fmt(sup, 4) + " < " + fmt(sup_tol, 3) +
                                 " (magnetization gap " + fmt(sup_mag, 3) + ")"});
    result.csv = csv.str();
    return result;
}

}  // namespace

std::string default_data_dir() {
    return GIBBSPROBE_DATA_DIR;
}

bool ReproduceResult::passed() const {
    return !checks.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.pass; });
}

const std::vector<std::string> &reproduce_targets() {
    static const std::vector<std::string> targets = {"table-s3",   "table-s4",    "fig-s5-threshold",
                                                     "srt-means",  "oracle-grid", "single-qubit-synthetic"};
    return targets;
}

ReproduceResult reproduce(const std::string &target, const ReproduceOptions &options) {
    static const std::map<std::string, std::function<ReproduceResult(const ReproduceOptions &)>>
        runners = {{"table-s3", linear_response},      {"table-s4", quadratic_response},
                   {"fig-s5-threshold", threshold},    {"srt-means", srt_means},
                   {"oracle-grid", oracle_grid},       {"single-qubit-synthetic", single_qubit}};
    auto it = runners.find(target);
    if (it == runners.end()) {
        throw InvariantError("unknown reproduce target '" + target + "'");
    }
    const auto start = std::chrono::steady_clock::now();
    ReproduceResult result = it->second(options);
    result.target = target;
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

GibbsModel cell_ferromagnet_8(double coupling) {
    GibbsModel::TermMap terms;
    for (int i = 0; i < 4; i++) {
        for (int j = 4; j < 8; j++) {
            terms[{i, j}] = coupling;
        }
    }
    return GibbsModel(8, std::move(terms));
}

GibbsModel cell_ferromagnet_4(double coupling) {
    // Indices 0..3 are spins 304, 305, 308, 309; couplers 304-308, 304-309, 305-308, 305-309.
    return GibbsModel(4, {{{0, 2}, coupling}, {{0, 3}, coupling}, {{1, 2}, coupling}, {{1, 3}, coupling}});
}

}  // namespace gibbsprobe
