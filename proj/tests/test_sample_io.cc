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

#include <filesystem>

#include <gtest/gtest.h>

#include "gibbsprobe/errors.h"
#include "gibbsprobe/sampler.h"

namespace gp = gibbsprobe;

TEST(SampleSet, MergesAndSortsRecords) {
    gp::SampleSet s(2, {{3, 1}, {0, 2}, {3, 4}});
    ASSERT_EQ(s.records().size(), 2u);
    EXPECT_EQ(s.records()[0], (gp::SampleRecord{0, 2}));
    EXPECT_EQ(s.records()[1], (gp::SampleRecord{3, 5}));
    EXPECT_EQ(s.total(), 7u);
    EXPECT_EQ(s.count(1), 0u);
}

TEST(SampleSet, Invariants) {
    EXPECT_THROW(gp::SampleSet(2, {}), gp::InvariantError);
    EXPECT_THROW(gp::SampleSet(2, {{0, 0}}), gp::InvariantError);
    EXPECT_THROW(gp::SampleSet(2, {{4, 1}}), gp::InvariantError);
    EXPECT_THROW(gp::SampleSet(0, {{0, 1}}), gp::InvariantError);
}

TEST(SampleSet, DrawsAndDenseCountsAgree) {
    const std::vector<uint64_t> draws{1, 2, 1, 0, 1};
    const std::vector<uint64_t> dense{1, 3, 1, 0};
    EXPECT_EQ(gp::SampleSet::from_draws(2, draws), gp::SampleSet::from_dense_counts(2, dense));
    const auto freq = gp::SampleSet::from_draws(2, draws).frequencies();
    EXPECT_DOUBLE_EQ(freq[1], 0.6);
    EXPECT_DOUBLE_EQ(freq[3], 0.0);
}

TEST(SampleText, RoundTripKeepsProvenance) {
    gp::SampleSet s(3, {{0b101, 7}, {0b010, 3}});
    s.meta["seed"] = "12";
    s.meta["source"] = "unit";
    const auto text = gp::samples_to_text(s);
    EXPECT_EQ(text.substr(0, text.find('\n')), "spins=3 total=10");
    EXPECT_NE(text.find("+-+ 7"), std::string::npos);
    EXPECT_EQ(gp::parse_samples(text), s);

    const auto path = std::filesystem::temp_directory_path() / "gibbsprobe_samples_rt.txt";
    gp::write_samples(s, path.string());
    EXPECT_EQ(gp::read_samples(path.string()), s);
    std::filesystem::remove(path);
}

TEST(SampleText, RawSignStrings) {
    const auto s = gp::parse_samples("+-\n++\n+-\n");
    EXPECT_EQ(s.n_spins(), 2);
    EXPECT_EQ(s.count(0b01), 2u);
    EXPECT_EQ(s.count(0b11), 1u);
}

TEST(SampleText, RawIntegerSpins) {
    const auto s = gp::parse_samples("1 -1 -1\n-1 -1 +1\n");
    EXPECT_EQ(s.n_spins(), 3);
    EXPECT_EQ(s.count(0b001), 1u);
    EXPECT_EQ(s.count(0b100), 1u);
}

TEST(SampleText, Errors) {
    EXPECT_THROW(gp::parse_samples(""), gp::ParseError);
    EXPECT_THROW(gp::parse_samples("spins=2 total=3\n++ 2\n"), gp::ParseError);
    EXPECT_THROW(gp::parse_samples("spins=2 total=2\n+++ 2\n"), gp::ParseError);
    EXPECT_THROW(gp::parse_samples("spins=2 total=2\n+x 2\n"), gp::ParseError);
    EXPECT_THROW(gp::parse_samples("spins=2 total=2\n++ 0\n++ 2\n"), gp::ParseError);
    EXPECT_THROW(gp::parse_samples("1 -1\n1 0\n"), gp::ParseError);
    EXPECT_THROW(gp::parse_samples("+-\n+--\n"), gp::ParseError);
    EXPECT_THROW(gp::read_samples("/nonexistent/gibbsprobe.txt"), gp::ParseError);
}

TEST(SampleText, ErrorNamesLine) {
    try {
        gp::parse_samples("spins=2 total=3\n++ 1\n+? 2\n", "f.txt");
        FAIL();
    } catch (const gp::ParseError &e) {
        EXPECT_EQ(e.line, 3);
        EXPECT_EQ(std::string(e.what()).rfind("f.txt:3", 0), 0u);
    }
}

TEST(NoiseJson, RoundTrip) {
    gp::NoiseSpec noise;
    noise.beta_field = {12.3, 12.9};
    noise.h_bias = {0.014, -0.005};
    noise.h_sd = {0.029, 0.032};
    noise.beta_edge[{0, 1}] = 12.1;
    noise.default_beta_edge = 12.0;
    noise.kind = gp::NoiseKind::kUniform;
    const auto back = gp::parse_noise_json(gp::noise_to_json(noise));
    EXPECT_EQ(back.beta_field, noise.beta_field);
    EXPECT_EQ(back.h_bias, noise.h_bias);
    EXPECT_EQ(back.h_sd, noise.h_sd);
    EXPECT_EQ(back.beta_edge, noise.beta_edge);
    EXPECT_EQ(back.default_beta_edge, noise.default_beta_edge);
    EXPECT_EQ(back.kind, noise.kind);
    EXPECT_THROW(gp::parse_noise_json("{"), gp::ParseError);
}
