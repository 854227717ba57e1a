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

#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "gibbsprobe/errors.h"
#include "gibbsprobe/model.h"
#include "oracles.h"

namespace gp = gibbsprobe;

namespace {

gp::GibbsModel random_model(int n, int order, std::mt19937_64 &rng, double scale = 0.5) {
    std::uniform_real_distribution<double> u(-scale, scale);
    gp::GibbsModel model(n);
    for (uint64_t mask = 1; mask < (uint64_t{1} << n); mask++) {
        if (std::popcount(mask) > order) {
            continue;
        }
        gp::TermKey key;
        for (int i = 0; i < n; i++) {
            if ((mask >> i) & 1) {
                key.push_back(i);
            }
        }
        model.set(key, u(rng));
    }
    return model;
}

}  // namespace

TEST(Energy, EmptyModelIsZero) {
    gp::GibbsModel model(3);
    EXPECT_EQ(gp::energy(model, gp::SpinConfig({1, -1, 1})), 0.0);
}

TEST(Energy, SingleField) {
    gp::GibbsModel model(1, {{{0}, 0.5}});
    EXPECT_EQ(gp::energy(model, gp::SpinConfig({1})), 0.5);
}

TEST(Energy, PairProductOfSigns) {
    gp::GibbsModel model(2, {{{0, 1}, 0.025}});
    EXPECT_DOUBLE_EQ(gp::energy(model, gp::SpinConfig({1, -1})), -0.025);
}

TEST(Energy, DimensionMismatchThrows) {
    gp::GibbsModel model(3);
    EXPECT_THROW(gp::energy(model, gp::SpinConfig({1, -1})), gp::DimensionError);
}

TEST(Energy, MatchesBruteForceOnEveryConfiguration) {
    std::mt19937_64 rng(7);
    const auto model = random_model(5, 5, rng);
    for (uint64_t c = 0; c < 32; c++) {
        EXPECT_NEAR(gp::energy_bits(model, c), oracle::energy(model.terms(), c), 1e-14);
        EXPECT_NEAR(gp::energy(model, gp::SpinConfig::from_bits(c, 5)), oracle::energy(model.terms(), c),
                    1e-14);
    }
}

TEST(SpinConfig, RejectsNonSpinValues) {
    EXPECT_THROW(gp::SpinConfig({1, 0}), gp::InvariantError);
}

TEST(SpinConfig, BitPackingIsLittleEndian) {
    const auto config = gp::SpinConfig::from_bits(0b01, 2);
    EXPECT_EQ(config[0], 1);
    EXPECT_EQ(config[1], -1);
    EXPECT_EQ(config.bits(), 0b01u);
}

TEST(GibbsModel, RejectsBadKeys) {
    EXPECT_THROW(gp::GibbsModel(3, {{{1, 0}, 0.1}}), gp::InvariantError);
    EXPECT_THROW(gp::GibbsModel(3, {{{0, 0}, 0.1}}), gp::InvariantError);
    EXPECT_THROW(gp::GibbsModel(3, {{{3}, 0.1}}), gp::InvariantError);
    EXPECT_THROW(gp::GibbsModel(3, {{{}, 0.1}}), gp::InvariantError);
    EXPECT_THROW(gp::GibbsModel(3, {{{0}, std::nan("")}}), gp::InvariantError);
    EXPECT_THROW(gp::GibbsModel(0), gp::InvariantError);
}

TEST(GibbsModel, OrderAndMissingKeys) {
    gp::GibbsModel model(4, {{{0}, 0.1}, {{0, 2, 3}, -0.2}});
    EXPECT_EQ(model.order(), 3);
    EXPECT_EQ(model.coefficient({1, 2}), 0.0);
    EXPECT_EQ(gp::GibbsModel(4).order(), 0);
}

TEST(ExactDistribution, ZeroModelIsUniform) {
    const auto dist = gp::exact_distribution(gp::GibbsModel(2));
    for (double p : dist.probs) {
        EXPECT_DOUBLE_EQ(p, 0.25);
    }
}

TEST(ExactDistribution, SingleSpinClosedForm) {
    for (double h : {-2.0, -0.3, 0.0, 0.7, 5.0}) {
        const auto dist = gp::exact_distribution(gp::GibbsModel(1, {{{0}, h}}));
        EXPECT_NEAR(dist.probs[1], (1 + std::tanh(h)) / 2, 1e-15);
    }
}

TEST(ExactDistribution, ThreeSpinChainMatchesDirectSummation) {
    gp::GibbsModel model(3, {{{0, 1}, 0.3}, {{1, 2}, -0.2}});
    const auto dist = gp::exact_distribution(model);
    const auto expected = oracle::probs(3, model.terms());
    for (int c = 0; c < 8; c++) {
        EXPECT_NEAR(dist.probs[c], expected[c], 1e-15);
    }
}

TEST(ExactDistribution, CapExceeded) {
    EXPECT_THROW(gp::exact_distribution(gp::GibbsModel(21)), gp::CapExceededError);
    EXPECT_THROW(gp::exact_distribution(gp::GibbsModel(5), 4), gp::CapExceededError);
}

TEST(ExactDistribution, LargeEnergiesStayFinite) {
    const auto dist = gp::exact_distribution(gp::GibbsModel(2, {{{0}, 800.0}, {{0, 1}, 600.0}}));
    EXPECT_TRUE(std::isfinite(dist.log_partition));
    EXPECT_NEAR(dist.probs[3], 1.0, 1e-12);
}

TEST(ExactDistribution, PartitionFunctionMatchesSum) {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 10; n++) {
        const auto model = random_model(n, 3, rng, 0.3);
        const auto dist = gp::exact_distribution(model);
        const long double z = oracle::partition(n, model.terms());
        EXPECT_NEAR(std::exp(dist.log_partition) / static_cast<double>(z), 1.0, 1e-12) << n;
        double total = 0.0;
        for (double p : dist.probs) {
            total += p;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(ExactDistribution, GlobalFlipSymmetry) {
    std::mt19937_64 rng(3);
    for (int n = 1; n <= 6; n++) {
        const auto model = random_model(n, n, rng);
        gp::GibbsModel flipped(n);
        for (const auto &[key, value] : model.terms()) {
            flipped.set(key, key.size() % 2 ? -value : value);
        }
        const auto a = gp::exact_distribution(model);
        const auto b = gp::exact_distribution(flipped);
        const uint64_t all = (uint64_t{1} << n) - 1;
        for (uint64_t c = 0; c <= all; c++) {
            EXPECT_NEAR(a.probs[c], b.probs[c ^ all], 1e-15);
        }
    }
}

TEST(ExactDistribution, EnergyOffsetOnlyMovesPartition) {
    std::mt19937_64 rng(5);
    const auto model = random_model(4, 2, rng);
    std::vector<double> shifted;
    for (const double e : gp::all_energies(model)) {
        shifted.push_back(e + 3.5);
    }
    const auto a = gp::exact_distribution(model);
    const auto b = gp::distribution_from_log_weights(4, shifted);
    for (size_t c = 0; c < a.probs.size(); c++) {
        EXPECT_NEAR(a.probs[c], b.probs[c], 1e-15);
    }
    EXPECT_NEAR(b.log_partition - a.log_partition, 3.5, 1e-12);
}

TEST(ExactDistribution, Correlations) {
    gp::GibbsModel model(2, {{{0, 1}, 0.4}});
    const auto dist = gp::exact_distribution(model);
    EXPECT_NEAR(dist.correlation(0b11), std::tanh(0.4), 1e-15);
    EXPECT_NEAR(dist.mean(0), 0.0, 1e-15);
}

TEST(ModelJson, RoundTrip) {
    std::mt19937_64 rng(9);
    const auto model = random_model(5, 3, rng);
    const auto path = std::filesystem::temp_directory_path() / "gibbsprobe_model_roundtrip.json";
    gp::write_model(model, path.string());
    EXPECT_EQ(gp::read_model(path.string()), model);
    std::filesystem::remove(path);
    EXPECT_EQ(gp::parse_model_json(gp::model_to_json(model)), model);
}

TEST(ModelJson, DuplicateKeyRejected) {
    const std::string text =
        R"({"n_spins": 2, "terms": [{"spins": [0, 1], "value": 0.1}, {"spins": [0, 1], "value": 0.2}]})";
    EXPECT_THROW(gp::parse_model_json(text), gp::ParseError);
}

TEST(ModelJson, IndexOutOfRangeRejected) {
    const std::string text = R"({"n_spins": 2, "terms": [{"spins": [0, 2], "value": 0.1}]})";
    EXPECT_THROW(gp::parse_model_json(text), gp::ParseError);
}

TEST(ModelJson, UnsortedSpinsRejected) {
    const std::string text = R"({"n_spins": 2, "terms": [{"spins": [1, 0], "value": 0.1}]})";
    EXPECT_THROW(gp::parse_model_json(text), gp::ParseError);
}

TEST(ModelJson, SyntaxErrorCarriesLine) {
    const std::string text = "{\n  \"n_spins\": 2,\n  \"terms\": [\n    {\"spins\": [0], \"value\": }\n  ]\n}";
    try {
        gp::parse_model_json(text, "bad.json");
        FAIL() << "expected a parse error";
    } catch (const gp::ParseError &e) {
        EXPECT_EQ(e.line, 4);
        EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
    }
}

TEST(ModelJson, FieldContextInMessage) {
    const std::string text = R"({"n_spins": 2, "terms": [{"spins": [0], "value": 0.1}, {"spins": [0]}]})";
    try {
        gp::parse_model_json(text);
        FAIL() << "expected a parse error";
    } catch (const gp::ParseError &e) {
        EXPECT_NE(std::string(e.what()).find("terms[1]"), std::string::npos) << e.what();
    }
}

TEST(ModelFingerprint, StableAndSensitive) {
    gp::GibbsModel a(2, {{{0, 1}, 0.1}});
    gp::GibbsModel b(2, {{{0, 1}, 0.2}});
    EXPECT_EQ(gp::model_fingerprint(a), gp::model_fingerprint(a));
    EXPECT_NE(gp::model_fingerprint(a), gp::model_fingerprint(b));
    EXPECT_EQ(gp::model_fingerprint(a).size(), 16u);
}
