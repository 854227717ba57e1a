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

#ifndef GIBBSPROBE_SINGLE_QUBIT_H
#define GIBBSPROBE_SINGLE_QUBIT_H

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gibbsprobe {

enum class IntervalMethod { kClopperPearson, kCrow };

enum class Saturation { kNone, kAllPositive, kAllNegative };

/// Output field of a single spin with a confidence interval. When every sample
/// has the same sign the point estimate is absent and one bound is infinite.
struct HoutEstimate {
    Saturation saturation = Saturation::kNone;
    std::optional<double> h_out;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool saturated() const {
        return saturation != Saturation::kNone;
    }
};

/// h_out = arctanh(2 S / M - 1); `confidence` is the coverage of the exact
/// binomial interval on p, e.g. 0.997. kCrow selects minimal-probability
/// acceptance regions (Sterne ordering) inverted as a hull.
HoutEstimate estimate_hout(uint64_t positives, uint64_t total, double confidence = 0.997,
                           IntervalMethod method = IntervalMethod::kClopperPearson);

/// arctanh(2p - 1) computed from p directly, accurate near p = 0 and p = 1.
double hout_from_probability(double p);

double h_out_classical(double h_in, double beta, double h_res0);
double h_out_quantum(double h_in, double beta, double h_res0, double xi);
/// Binary residual-field noise: average of the quantum magnetizations at h_res0 +/- h_sd.
double h_out_qnoise(double h_in, double beta, double h_res0, double xi, double h_sd);
/// Uniform residual-field noise on [h_res0 - sqrt(3) h_sd, h_res0 + sqrt(3) h_sd],
/// 16-node Gauss-Legendre quadrature.
double h_out_qnoise_uniform(double h_in, double beta, double h_res0, double xi, double h_sd);

struct FieldPoint {
    double h_in = 0.0;
    uint64_t positives = 0;
    uint64_t total = 0;
};

struct FieldScan {
    std::vector<FieldPoint> points;
    /// Throws InvariantError unless 0 <= S <= M, M >= 1 and the h_in are distinct.
    void validate() const;
};

enum class ResponseKind { kClassical, kQuantum, kNoisyQuantum };

std::string to_string(ResponseKind kind);
ResponseKind parse_response_kind(const std::string &name);

struct SingleQubitFit {
    ResponseKind kind = ResponseKind::kClassical;
    double beta = 0.0;
    double h_res0 = 0.0;
    double xi = 0.0;
    double h_sd = 0.0;
    double log_likelihood = 0.0;
    int starts_converged = 0;
    int starts_total = 0;
};

/// Model output field for a fit's kind and parameters.
double h_out_model(const SingleQubitFit &fit, double h_in);

/// sum over points of m_hat * h_model + 0.5 * ln(1 - tanh(h_model)^2),
/// m_hat = 2 S / M - 1. Every point carries the same weight.
double scan_log_likelihood(const FieldScan &scan, const SingleQubitFit &params);

/// Maximum likelihood over the free parameters of `kind`, multi-started from
/// beta {5,10,15} x h_res0 {-0.02,0,0.02} x xi {0,0.02} x h_sd {0,0.03,0.06}
/// restricted to the kind. Throws FitError when no start converges.
SingleQubitFit fit_scan(const FieldScan &scan, ResponseKind kind);

/// Binomial counts drawn at each h_in from p = (1 + tanh h_out_model) / 2.
FieldScan synthetic_scan(const SingleQubitFit &truth, const std::vector<double> &h_grid,
                         uint64_t samples_per_point, uint64_t seed);

/// n uniformly spaced points on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, int n);

FieldScan parse_scan_csv(const std::string &text, const std::string &source = "<string>");
std::string scan_to_csv(const FieldScan &scan);
FieldScan read_scan(const std::string &path);
void write_scan(const FieldScan &scan, const std::string &path);
std::string fit_to_json(const SingleQubitFit &fit);

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_SINGLE_QUBIT_H
