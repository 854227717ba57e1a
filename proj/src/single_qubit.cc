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

#include "gibbsprobe/single_qubit.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "gibbsprobe/errors.h"
#include "gibbsprobe/rng.h"
#include "json.hpp"

namespace gibbsprobe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Magnetization m together with 1 - m and 1 + m, each computed without cancellation.
struct Mag {
    double m = 0.0;
    double one_minus = 1.0;
    double one_plus = 1.0;

    double h_out() const {
        if (std::abs(m) < 0.5) {
            return std::atanh(m);
        }
        return 0.5 * (std::log(one_plus) - std::log(one_minus));
    }
    // 0.5 * ln(1 - m^2)
    double half_log_one_minus_sq() const {
        return 0.5 * (std::log(one_minus) + std::log(one_plus));
    }
};

// <sigma_z> of a spin with longitudinal field a and transverse field t at inverse temperature beta.
Mag quantum_mag(double a, double t, double beta) {
    const double abs_a = std::abs(a);
    const double rho = std::hypot(a, t);
    if (rho == 0.0) {
        return Mag{};
    }
    const double x = beta * rho;
    const double e = std::exp(-2.0 * x);
    const double th = (1.0 - e) / (1.0 + e);
    const double one_minus_th = 2.0 * e / (1.0 + e);
    const double ratio = abs_a / rho;
    const double abs_m = ratio * th;
    const double one_minus_abs = t * t / (rho * (rho + abs_a)) + ratio * one_minus_th;
    Mag out;
    if (a >= 0) {
        out = Mag{abs_m, one_minus_abs, 1.0 + abs_m};
    } else {
        out = Mag{-abs_m, 1.0 + abs_m, one_minus_abs};
    }
    return out;
}

Mag average(const std::vector<std::pair<double, Mag>> &weighted) {
    Mag out{0.0, 0.0, 0.0};
    for (const auto &[w, mag] : weighted) {
        out.m += w * mag.m;
        out.one_minus += w * mag.one_minus;
        out.one_plus += w * mag.one_plus;
    }
    return out;
}

Mag qnoise_mag(double h_in, double beta, double h_res0, double xi, double h_sd) {
    if (h_sd == 0.0) {
        return quantum_mag(h_in + h_res0, xi * h_in, beta);
    }
    return average({{0.5, quantum_mag(h_in + h_res0 + h_sd, xi * h_in, beta)},
                    {0.5, quantum_mag(h_in + h_res0 - h_sd, xi * h_in, beta)}});
}

Mag qnoise_uniform_mag(double h_in, double beta, double h_res0, double xi, double h_sd) {
    if (h_sd == 0.0) {
        return quantum_mag(h_in + h_res0, xi * h_in, beta);
    }
    using Rule = boost::math::quadrature::gauss<double, 16>;
    const auto &nodes = Rule::abscissa();
    const auto &weights = Rule::weights();
    const double half_width = std::sqrt(3.0) * h_sd;
    // Mirror nodes are added pairwise first so the rule keeps the oddness of the integrand.
    Mag out{0.0, 0.0, 0.0};
    for (size_t k = 0; k < nodes.size(); k++) {
        const double u = half_width * nodes[k];
        const Mag lo = quantum_mag(h_in + (h_res0 - u), xi * h_in, beta);
        const Mag hi = quantum_mag(h_in + (h_res0 + u), xi * h_in, beta);
        const double w = weights[k] / 2.0;
        out.m += w * (lo.m + hi.m);
        out.one_minus += w * (lo.one_minus + hi.one_minus);
        out.one_plus += w * (lo.one_plus + hi.one_plus);
    }
    return out;
}

Mag classical_mag(double h_in, double beta, double h_res0) {
    return quantum_mag(h_in + h_res0, 0.0, beta);
}

Mag model_mag(const SingleQubitFit &p, double h_in) {
    switch (p.kind) {
        case ResponseKind::kClassical:
            return classical_mag(h_in, p.beta, p.h_res0);
        case ResponseKind::kQuantum:
            return quantum_mag(h_in + p.h_res0, p.xi * h_in, p.beta);
        case ResponseKind::kNoisyQuantum:
            return qnoise_mag(h_in, p.beta, p.h_res0, p.xi, p.h_sd);
    }
    return Mag{};
}

double field_from_counts(double positives, double negatives) {
    return 0.5 * (std::log(positives) - std::log(negatives));
}

double field_from_p(double p) {
    if (p <= 0.0) {
        return -kInf;
    }
    if (p >= 1.0) {
        return kInf;
    }
    return hout_from_probability(p);
}

// Sterne acceptance region: outcomes admitted in decreasing order of probability
// until their mass reaches `confidence`. Grows outward from the mode.
std::pair<uint64_t, uint64_t> acceptance_region(double p, uint64_t m, double confidence) {
    if (p <= 0.0) {
        return {0, 0};
    }
    if (p >= 1.0) {
        return {m, m};
    }
    const double md = static_cast<double>(m);
    uint64_t mode = static_cast<uint64_t>(std::floor((md + 1.0) * p));
    mode = std::min(mode, m);
    boost::math::binomial_distribution<double> dist(md, p);
    const double odds = p / (1.0 - p);
    double covered = boost::math::pdf(dist, static_cast<double>(mode));
    uint64_t lo = mode, hi = mode;
    auto left_pmf = [&](uint64_t k, double pmf_k) {  // pmf(k - 1)
        return pmf_k * static_cast<double>(k) / (md - static_cast<double>(k) + 1.0) / odds;
    };
    auto right_pmf = [&](uint64_t k, double pmf_k) {  // pmf(k + 1)
        return pmf_k * (md - static_cast<double>(k)) / (static_cast<double>(k) + 1.0) * odds;
    };
    double pl = lo > 0 ? left_pmf(lo, covered) : -1.0;
    double pr = hi < m ? right_pmf(hi, covered) : -1.0;
    while (covered < confidence && (pl > 0 || pr > 0)) {
        if (pr > pl) {
            covered += pr;
            hi++;
            pr = hi < m ? right_pmf(hi, pr) : -1.0;
        } else {
            covered += pl;
            lo--;
            pl = lo > 0 ? left_pmf(lo, pl) : -1.0;
        }
    }
    return {lo, hi};
}

std::pair<double, double> crow_interval(uint64_t s, uint64_t m, double confidence) {
    const double p_hat = static_cast<double>(s) / static_cast<double>(m);
    double lower = 0.0, upper = 1.0;
    if (s > 0) {
        double a = 0.0, b = p_hat;  // hi(a) < s <= hi(b)
        for (int k = 0; k < 200 && b - a > 1e-15 * std::max(b, 1e-300); k++) {
            const double mid = 0.5 * (a + b);
            (acceptance_region(mid, m, confidence).second >= s ? b : a) = mid;
        }
        lower = b;
    }
    if (s < m) {
        double a = p_hat, b = 1.0;  // lo(a) <= s < lo(b)
        for (int k = 0; k < 200 && b - a > 1e-15 * std::max(1.0 - a, 1e-300); k++) {
            const double mid = 0.5 * (a + b);
            (acceptance_region(mid, m, confidence).first <= s ? a : b) = mid;
        }
        upper = a;
    }
    return {lower, upper};
}

std::pair<double, double> clopper_pearson(uint64_t s, uint64_t m, double confidence) {
    using boost::math::binomial_distribution;
    const double tail = (1.0 - confidence) / 2.0;
    const double md = static_cast<double>(m), sd = static_cast<double>(s);
    const double lower = binomial_distribution<double>::find_lower_bound_on_p(
        md, sd, tail, binomial_distribution<double>::clopper_pearson_exact_interval);
    const double upper = binomial_distribution<double>::find_upper_bound_on_p(
        md, sd, tail, binomial_distribution<double>::clopper_pearson_exact_interval);
    return {lower, upper};
}

// Maps scaled optimizer coordinates to parameters; |.| keeps beta, xi, h_sd non-negative.
constexpr double kBetaScale = 10.0;
constexpr double kFieldScale = 0.01;

int num_free(ResponseKind kind) {
    switch (kind) {
        case ResponseKind::kClassical:
            return 2;
        case ResponseKind::kQuantum:
            return 3;
        case ResponseKind::kNoisyQuantum:
            return 4;
    }
    return 0;
}

SingleQubitFit decode(ResponseKind kind, const gsl_vector *z) {
    SingleQubitFit p;
    p.kind = kind;
    p.beta = std::abs(gsl_vector_get(z, 0)) * kBetaScale;
    p.h_res0 = gsl_vector_get(z, 1) * kFieldScale;
    if (num_free(kind) > 2) {
        p.xi = std::abs(gsl_vector_get(z, 2)) * kFieldScale;
    }
    if (num_free(kind) > 3) {
        p.h_sd = std::abs(gsl_vector_get(z, 3)) * kFieldScale;
    }
    return p;
}

struct FitProblem {
    const FieldScan *scan;
    ResponseKind kind;
};

double objective(const gsl_vector *z, void *params) {
    const auto *problem = static_cast<const FitProblem *>(params);
    const double ll = scan_log_likelihood(*problem->scan, decode(problem->kind, z));
    const double value = -ll / static_cast<double>(problem->scan->points.size());
    return std::isfinite(value) ? value : GSL_POSINF;
}

void objective_gradient(const gsl_vector *z, void *params, gsl_vector *g) {
    const size_t n = z->size;
    gsl_vector *probe = gsl_vector_alloc(n);
    gsl_vector_memcpy(probe, z);
    for (size_t k = 0; k < n; k++) {
        const double x = gsl_vector_get(z, k);
        const double step = 1e-6 * std::max(1.0, std::abs(x));
        gsl_vector_set(probe, k, x + step);
        const double up = objective(probe, params);
        gsl_vector_set(probe, k, x - step);
        const double down = objective(probe, params);
        gsl_vector_set(probe, k, x);
        gsl_vector_set(g, k, (up - down) / (2 * step));
    }
    gsl_vector_free(probe);
}

void objective_fdf(const gsl_vector *z, void *params, double *f, gsl_vector *g) {
    *f = objective(z, params);
    objective_gradient(z, params, g);
}

// Returns true on convergence; z holds the final point.
bool run_bfgs(FitProblem &problem, gsl_vector *z) {
    gsl_multimin_function_fdf fdf;
    fdf.n = z->size;
    fdf.f = objective;
    fdf.df = objective_gradient;
    fdf.fdf = objective_fdf;
    fdf.params = &problem;
    gsl_multimin_fdfminimizer *solver =
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, z->size);
    gsl_multimin_fdfminimizer_set(solver, &fdf, z, 0.01, 0.1);
    bool converged = false;
    for (int iter = 0; iter < 2000; iter++) {
        const int status = gsl_multimin_fdfminimizer_iterate(solver);
        const double grad_norm = gsl_blas_dnrm2(solver->gradient);
        if (status != GSL_SUCCESS) {
            // Stalled line search: accept only if already stationary.
            converged = grad_norm < 1e-5;
            break;
        }
        if (gsl_multimin_test_gradient(solver->gradient, 1e-7) == GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    gsl_vector_memcpy(z, solver->x);
    converged = converged && std::isfinite(solver->f);
    gsl_multimin_fdfminimizer_free(solver);
    return converged;
}

}  // namespace

double hout_from_probability(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvariantError("probability must lie strictly inside (0, 1)");
    }
    return 0.5 * (std::log(p) - std::log1p(-p));
}

HoutEstimate estimate_hout(uint64_t positives, uint64_t total, double confidence,
                           IntervalMethod method) {
    if (total == 0 || positives > total) {
        throw InvariantError("need 0 <= S <= M and M >= 1");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw InvariantError("confidence level must lie in (0, 1)");
    }
    const auto [p_low, p_high] = method == IntervalMethod::kCrow
                                     ? crow_interval(positives, total, confidence)
                                     : clopper_pearson(positives, total, confidence);
    HoutEstimate out;
    out.ci_low = field_from_p(p_low);
    out.ci_high = field_from_p(p_high);
    if (positives == total) {
        out.saturation = Saturation::kAllPositive;
        out.ci_high = kInf;
    } else if (positives == 0) {
        out.saturation = Saturation::kAllNegative;
        out.ci_low = -kInf;
    } else {
        out.h_out = field_from_counts(static_cast<double>(positives),
                                      static_cast<double>(total - positives));
    }
    return out;
}

double h_out_classical(double h_in, double beta, double h_res0) {
    return beta * (h_in + h_res0);
}

double h_out_quantum(double h_in, double beta, double h_res0, double xi) {
    return quantum_mag(h_in + h_res0, xi * h_in, beta).h_out();
}

double h_out_qnoise(double h_in, double beta, double h_res0, double xi, double h_sd) {
    return qnoise_mag(h_in, beta, h_res0, xi, h_sd).h_out();
}

double h_out_qnoise_uniform(double h_in, double beta, double h_res0, double xi, double h_sd) {
    return qnoise_uniform_mag(h_in, beta, h_res0, xi, h_sd).h_out();
}

void FieldScan::validate() const {
    std::set<double> seen;
    for (const auto &pt : points) {
        if (pt.total == 0 || pt.positives > pt.total) {
            throw InvariantError("scan point needs 0 <= S <= M and M >= 1");
        }
        if (!std::isfinite(pt.h_in)) {
            throw InvariantError("scan h_in must be finite");
        }
        if (!seen.insert(pt.h_in).second) {
            throw InvariantError("duplicate h_in in scan");
        }
    }
}

std::string to_string(ResponseKind kind) {
    switch (kind) {
        case ResponseKind::kClassical:
            return "classical";
        case ResponseKind::kQuantum:
            return "quantum";
        case ResponseKind::kNoisyQuantum:
            return "noisy_quantum";
    }
    return "";
}

ResponseKind parse_response_kind(const std::string &name) {
    if (name == "classical") {
        return ResponseKind::kClassical;
    }
    if (name == "quantum") {
        return ResponseKind::kQuantum;
    }
    if (name == "noisy_quantum" || name == "qnoise") {
        return ResponseKind::kNoisyQuantum;
    }
    throw InvariantError("unknown response kind '" + name + "'");
}

double h_out_model(const SingleQubitFit &fit, double h_in) {
    if (fit.kind == ResponseKind::kClassical) {
        return h_out_classical(h_in, fit.beta, fit.h_res0);
    }
    return model_mag(fit, h_in).h_out();
}

double scan_log_likelihood(const FieldScan &scan, const SingleQubitFit &params) {
    double total = 0.0;
    for (const auto &pt : scan.points) {
        const double m_hat = (2.0 * static_cast<double>(pt.positives) - static_cast<double>(pt.total)) /
                             static_cast<double>(pt.total);
        const Mag mag = model_mag(params, pt.h_in);
        const double h = params.kind == ResponseKind::kClassical
                             ? h_out_classical(pt.h_in, params.beta, params.h_res0)
                             : mag.h_out();
        total += m_hat * h + mag.half_log_one_minus_sq();
    }
    return total;
}

SingleQubitFit fit_scan(const FieldScan &scan, ResponseKind kind) {
    scan.validate();
    const int n_free = num_free(kind);
    const auto unsaturated =
        std::count_if(scan.points.begin(), scan.points.end(), [](const FieldPoint &pt) {
            return pt.positives > 0 && pt.positives < pt.total;
        });
    if (unsaturated < 3 || static_cast<int>(scan.points.size()) <= n_free) {
        throw InvariantError("fit needs at least 3 unsaturated points and more points than parameters");
    }
    gsl_set_error_handler_off();

    std::vector<std::array<double, 4>> starts;
    for (double beta : {5.0, 10.0, 15.0}) {
        for (double r : {-0.02, 0.0, 0.02}) {
            for (double xi : {0.0, 0.02}) {
                for (double sd : {0.0, 0.03, 0.06}) {
                    if ((n_free < 3 && xi != 0.0) || (n_free < 4 && sd != 0.0)) {
                        continue;
                    }
                    starts.push_back({beta, r, xi, sd});
                }
            }
        }
    }

    FitProblem problem{&scan, kind};
    SingleQubitFit best;
    bool have_best = false;
    int converged_count = 0;
    for (const auto &start : starts) {
        gsl_vector *z = gsl_vector_alloc(n_free);
        gsl_vector_set(z, 0, start[0] / kBetaScale);
        gsl_vector_set(z, 1, start[1] / kFieldScale);
        if (n_free > 2) {
            gsl_vector_set(z, 2, start[2] / kFieldScale);
        }
        if (n_free > 3) {
            gsl_vector_set(z, 3, start[3] / kFieldScale);
        }
        const bool converged = run_bfgs(problem, z);
        SingleQubitFit candidate = decode(kind, z);
        gsl_vector_free(z);
        if (!converged) {
            continue;
        }
        converged_count++;
        candidate.log_likelihood = scan_log_likelihood(scan, candidate);
        if (!have_best || candidate.log_likelihood > best.log_likelihood) {
            best = candidate;
            have_best = true;
        }
    }
    if (!have_best) {
        throw FitError("no start of the " + to_string(kind) + " fit converged");
    }
    best.starts_converged = converged_count;
    best.starts_total = static_cast<int>(starts.size());
    return best;
}

FieldScan synthetic_scan(const SingleQubitFit &truth, const std::vector<double> &h_grid,
                         uint64_t samples_per_point, uint64_t seed) {
    Rng rng(seed);
    FieldScan scan;
    for (double h_in : h_grid) {
        const Mag mag = model_mag(truth, h_in);
        const double p = 0.5 * mag.one_plus;
        std::binomial_distribution<uint64_t> draw(samples_per_point, p);
        scan.points.push_back({h_in, draw(rng), samples_per_point});
    }
    return scan;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
    if (n < 2) {
        throw InvariantError("grid needs at least 2 points");
    }
    std::vector<double> out(n);
    for (int k = 0; k < n; k++) {
        out[k] = lo + (hi - lo) * k / (n - 1);
    }
    return out;
}

FieldScan parse_scan_csv(const std::string &text, const std::string &source) {
    FieldScan scan;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') {
            continue;
        }
        if (line.rfind("h_in", 0) == 0) {
            continue;
        }
        std::istringstream fields(line);
        std::string a, b, c, extra;
        if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') ||
            !std::getline(fields, c, ',') || std::getline(fields, extra, ',')) {
            throw ParseError(source, line_no, "expected h_in,S,M");
        }
        try {
            size_t used = 0;
            FieldPoint pt;
            pt.h_in = std::stod(a, &used);
            if (b.find('-') != std::string::npos || c.find('-') != std::string::npos) {
                throw std::invalid_argument("negative count");
            }
            pt.positives = std::stoull(b);
            pt.total = std::stoull(c);
            scan.points.push_back(pt);
        } catch (const std::exception &) {
            throw ParseError(source, line_no, "malformed number in '" + line + "'");
        }
    }
    try {
        scan.validate();
    } catch (const InvariantError &e) {
        throw ParseError(source, 0, e.what());
    }
    return scan;
}

std::string scan_to_csv(const FieldScan &scan) {
    std::ostringstream out;
    out.precision(17);
    out << "h_in,S,M\n";
    for (const auto &pt : scan.points) {
        out << pt.h_in << ',' << pt.positives << ',' << pt.total << '\n';
    }
    return out.str();
}

FieldScan read_scan(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, "cannot open file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scan_csv(buffer.str(), path);
}

void write_scan(const FieldScan &scan, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << scan_to_csv(scan);
}

std::string fit_to_json(const SingleQubitFit &fit) {
    nlohmann::ordered_json doc;
    doc["kind"] = to_string(fit.kind);
    doc["beta"] = fit.beta;
    doc["h_res0"] = fit.h_res0;
    doc["xi"] = fit.xi;
    doc["h_sd"] = fit.h_sd;
    doc["loglik"] = fit.log_likelihood;
    doc["starts_converged"] = fit.starts_converged;
    doc["starts_total"] = fit.starts_total;
    return doc.dump(2) + "\n";
}

}  // namespace gibbsprobe
