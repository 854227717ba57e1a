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

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "gibbsprobe/error_est.h"
#include "gibbsprobe/errors.h"

namespace gp = gibbsprobe;

namespace {

const gp::GibbsModel kChain(3, {{{0}, 0.2}, {{1}, -0.1}, {{0, 1}, 0.5}, {{1, 2}, -0.4}, {{0, 2}, 0.1}});

}  // namespace

TEST(EstimateError, HugeSampleLimitIsNearZero) {
    const auto report = gp::estimate_error(kChain, 100000000, 2, {}, 1);
    EXPECT_EQ(report.num_replicates, 2);
    EXPECT_EQ(report.terms.size(), 6u);
    for (const auto &t : report.terms) {
        EXPECT_LT(std::abs(t.mean), 1e-3);
        EXPECT_GE(t.sigma, 0.0);
    }
    EXPECT_LT(report.threshold, 2e-3);
}

TEST(EstimateError, ThresholdIsThreeTimesMeanSigma) {
    const auto report = gp::estimate_error(kChain, 5000, 6, {}, 3);
    double sum = 0.0;
    for (const auto &t : report.terms) {
        sum += t.sigma;
    }
    EXPECT_NEAR(report.threshold, 3.0 * sum / static_cast<double>(report.terms.size()), 1e-15);
}

TEST(EstimateError, NeedsTwoReplicates) {
    EXPECT_THROW(gp::estimate_error(kChain, 100, 1, {}, 1), gp::InvariantError);
    EXPECT_THROW(gp::estimate_error(kChain, 0, 3, {}, 1), gp::InvariantError);
}

TEST(EstimateError, Deterministic) {
    const auto a = gp::estimate_error(kChain, 3000, 4, {}, 11);
    const auto b = gp::estimate_error(kChain, 3000, 4, {}, 11);
    EXPECT_EQ(gp::error_report_json(a), gp::error_report_json(b));
}

TEST(EstimateError, ThresholdScalesAsInverseRootM) {
    const auto small = gp::estimate_error(kChain, 10000, 40, {}, 5);
    const auto large = gp::estimate_error(kChain, 40000, 40, {}, 6);
    const double ratio = small.threshold / large.threshold;
    EXPECT_NEAR(ratio, 2.0, 0.4) << small.threshold << " " << large.threshold;
}

TEST(EstimateError, ReplicateMeansAreUnbiased) {
    const int R = 40;
    const auto report = gp::estimate_error(kChain, 20000, R, {}, 7);
    for (const auto &t : report.terms) {
        EXPECT_LT(std::abs(t.mean), 3 * t.sigma / std::sqrt(R)) << gp::format_key(t.key);
    }
}

TEST(EstimateError, FailedReplicatesAreExcludedAndCounted) {
    // P(spin 0 constant in 1000 draws) = (1 - q)^1000 ~ 5% with q = 0.003.
    const double h = std::atanh(1 - 2 * 0.003);
    const gp::GibbsModel model(1, {{{0}, h}});
    gp::LearnConfig config;
    config.order = 1;
    const auto report = gp::estimate_error(model, 1000, 100, config, 2);
    EXPECT_GT(report.num_failed, 0);
    EXPECT_LE(report.num_failed, 10);
    EXPECT_EQ(report.num_replicates + report.num_failed, 100);
    ASSERT_EQ(report.failures.size(), static_cast<size_t>(report.num_failed));
    EXPECT_NE(report.failures[0].find("constant"), std::string::npos);
}

TEST(EstimateError, TooManyFailuresIsAnError) {
    const gp::GibbsModel model(1, {{{0}, 6.0}});
    gp::LearnConfig config;
    config.order = 1;
    EXPECT_THROW(gp::estimate_error(model, 100, 10, config, 1), gp::Error);
}

TEST(SignificanceMask, ZeroModelIsEmpty) {
    gp::ErrorReport report;
    report.threshold = 0.01;
    EXPECT_TRUE(gp::significance_mask(gp::GibbsModel(3), report).empty());
}

TEST(SignificanceMask, StrictInequality) {
    gp::ErrorReport report;
    report.threshold = 0.25;
    const gp::GibbsModel model(3, {{{0, 1}, 0.25}, {{1, 2}, -0.2500001}, {{0, 1, 2}, 0.1}});
    const auto mask = gp::significance_mask(model, report);
    EXPECT_EQ(mask, (std::set<gp::TermKey>{{1, 2}}));
}

TEST(ErrorReportOutput, JsonAndCsv) {
    const auto report = gp::estimate_error(kChain, 2000, 3, {}, 4);
    const auto doc = nlohmann::json::parse(gp::error_report_json(report));
    EXPECT_EQ(doc["threshold"].get<double>(), report.threshold);
    EXPECT_EQ(doc["terms"].size(), report.terms.size());

    std::istringstream csv(gp::error_report_csv(report));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "term,mean,sigma");
    int rows = 0;
    while (std::getline(csv, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2);
        rows++;
    }
    EXPECT_EQ(rows, static_cast<int>(report.terms.size()));
}

TEST(ConsistencyScaling, SlopeNearMinusOneHalf) {
    const auto scaling = gp::consistency_scaling(kChain, {1000, 10000, 100000}, 12, {}, 9);
    ASSERT_EQ(scaling.points.size(), 3u);
    EXPECT_GT(scaling.points[0].mean_max_error, scaling.points[2].mean_max_error);
    EXPECT_NEAR(scaling.slope, -0.5, 0.1);
}
