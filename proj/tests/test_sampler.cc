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
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "gibbsprobe/error_est.h"
#include "gibbsprobe/errors.h"
#include "gibbsprobe/iso.h"
#include "gibbsprobe/noise_oracle.h"
#include "gibbsprobe/rng.h"
#include "gibbsprobe/sampler.h"
#include "oracles.h"

namespace gp = gibbsprobe;

namespace {

// Walsh coefficient of log p on the spins in `key`; for a strictly positive
// distribution over n spins this is the exact Gibbs coefficient.
double walsh_log_coefficient(const std::vector<double> &p, const std::vector<int> &key) {
    double s = 0.0;
    for (uint64_t c = 0; c < p.size(); c++) {
        double prod = std::log(p[c]);
        for (int i : key) {
            prod *= oracle::spin(c, i);
        }
        s += prod;
    }
    return s / static_cast<double>(p.size());
}

double chi_squared_p_value(const gp::SampleSet &samples, const std::vector<double> &probs) {
    double stat = 0.0;
    int cells = 0;
    for (uint64_t c = 0; c < probs.size(); c++) {
        const double expected = probs[c] * static_cast<double>(samples.total());
        if (expected <= 0.0) {
            continue;
        }
        const double d = static_cast<double>(samples.count(c)) - expected;
        stat += d * d / expected;
        cells++;
    }
    boost::math::chi_squared dist(cells - 1);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

oracle::Noisy random_noisy(int n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> small(-0.1, 0.1);
    std::uniform_real_distribution<double> pos(0.0, 0.08);
    std::uniform_real_distribution<double> beta(2.0, 8.0);
    oracle::Noisy m;
    m.n = n;
    for (int i = 0; i < n; i++) {
        m.h.push_back(small(rng));
        m.bias.push_back(small(rng) / 5);
        m.sd.push_back(pos(rng));
        m.beta.push_back(beta(rng));
        for (int j = i + 1; j < n; j++) {
            m.J[{i, j}] = small(rng);
            m.beta_edge[{i, j}] = beta(rng);
        }
    }
    return m;
}

gp::GibbsModel input_of(const oracle::Noisy &m) {
    gp::GibbsModel model(m.n);
    for (int i = 0; i < m.n; i++) {
        model.set({i}, m.h[i]);
    }
    for (const auto &[edge, value] : m.J) {
        model.set({edge.first, edge.second}, value);
    }
    return model;
}

gp::NoiseSpec noise_of(const oracle::Noisy &m) {
    gp::NoiseSpec noise;
    noise.beta_field = m.beta;
    noise.h_bias = m.bias;
    noise.h_sd = m.sd;
    for (const auto &[edge, value] : m.beta_edge) {
        noise.beta_edge[edge] = value;
    }
    return noise;
}

}  // namespace

TEST(EffectiveNoisyModel, ZeroInputIsZeroModel) {
    const auto model = gp::effective_noisy_model(gp::GibbsModel(3), gp::NoiseSpec::uniform(3, 10.0),
                                                 std::vector<int>{1, -1, 1});
    EXPECT_TRUE(model.terms().empty());
}

TEST(EffectiveNoisyModel, FieldComposition) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(1, 10.5);
    noise.h_bias = {0.004};
    const auto model =
        gp::effective_noisy_model(gp::GibbsModel(1, {{{0}, 0.02}}), noise, std::vector<int>{1});
    EXPECT_NEAR(model.coefficient({0}), 0.252, 1e-15);
}

TEST(EffectiveNoisyModel, RealizationSignFlipsFields) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(2, 3.0);
    noise.h_sd = {0.1, 0.2};
    gp::GibbsModel input(2, {{{0, 1}, 0.3}});
    const auto a = gp::effective_noisy_model(input, noise, std::vector<int>{1, -1});
    const auto b = gp::effective_noisy_model(input, noise, std::vector<int>{-1, 1});
    EXPECT_DOUBLE_EQ(a.coefficient({0}), -b.coefficient({0}));
    EXPECT_DOUBLE_EQ(a.coefficient({1}), -b.coefficient({1}));
    EXPECT_DOUBLE_EQ(a.coefficient({0, 1}), b.coefficient({0, 1}));
    EXPECT_DOUBLE_EQ(a.coefficient({0, 1}), 0.9);
}

TEST(EffectiveNoisyModel, EdgeBetaFallsBackToDefault) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(3, 1.0);
    noise.default_beta_edge = 4.0;
    noise.beta_edge[{0, 1}] = 2.0;
    gp::GibbsModel input(3, {{{0, 1}, 1.0}, {{1, 2}, 1.0}});
    const auto model = gp::effective_noisy_model(input, noise, std::vector<int>{1, 1, 1});
    EXPECT_EQ(model.coefficient({0, 1}), 2.0);
    EXPECT_EQ(model.coefficient({1, 2}), 4.0);
}

TEST(EffectiveNoisyModel, Errors) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(2, 1.0);
    EXPECT_THROW(gp::effective_noisy_model(gp::GibbsModel(3), noise, std::vector<int>{1, 1, 1}),
                 gp::DimensionError);
    EXPECT_THROW(gp::effective_noisy_model(gp::GibbsModel(2), noise, std::vector<int>{1}),
                 gp::DimensionError);
    gp::GibbsModel triple(3, {{{0, 1, 2}, 0.1}});
    EXPECT_THROW(gp::effective_noisy_model(triple, gp::NoiseSpec::uniform(3, 1.0),
                                           std::vector<int>{1, 1, 1}),
                 gp::InvariantError);
    noise.h_sd = {-0.1, 0.0};
    EXPECT_THROW(noise.validate(), gp::InvariantError);
}

TEST(NoisyMixture, NoNoiseEqualsExactDistribution) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(3, 2.0);
    noise.h_bias = {0.01, -0.02, 0.0};
    gp::GibbsModel input(3, {{{0}, 0.1}, {{0, 1}, 0.2}, {{1, 2}, -0.3}});
    const auto mix = gp::noisy_mixture_distribution(input, noise);
    const auto exact =
        gp::exact_distribution(gp::effective_noisy_model(input, noise, std::vector<int>{1, 1, 1}));
    for (size_t c = 0; c < mix.probs.size(); c++) {
        EXPECT_NEAR(mix.probs[c], exact.probs[c], 1e-15);
    }
}

TEST(NoisyMixture, EqualsBruteForceAverageOverRealizations) {
    std::mt19937_64 rng(21);
    for (int n = 1; n <= 4; n++) {
        const auto m = random_noisy(n, rng);
        const auto mix = gp::noisy_mixture_distribution(input_of(m), noise_of(m));
        const auto expected = oracle::mixture(m);
        for (size_t c = 0; c < expected.size(); c++) {
            EXPECT_NEAR(mix.probs[c], expected[c], 1e-14) << n;
        }
    }
}

TEST(NoisyMixture, UniformNoiseSingleSpinClosedForm) {
    // p(+1) = 1/2 + [ln cosh(b(h+a)) - ln cosh(b(h-a))] / (4 a b) with a = sqrt(3) sd.
    for (double sd : {0.01, 0.05, 0.1}) {
        const double beta = 3.0;
        const double h = 0.04;
        gp::NoiseSpec noise = gp::NoiseSpec::uniform(1, beta);
        noise.h_sd = {sd};
        noise.kind = gp::NoiseKind::kUniform;
        const auto mix = gp::noisy_mixture_distribution(gp::GibbsModel(1, {{{0}, h}}), noise);
        const double a = std::sqrt(3.0) * sd;
        const double expected =
            0.5 + (std::log(std::cosh(beta * (h + a))) - std::log(std::cosh(beta * (h - a)))) /
                      (4 * a * beta);
        EXPECT_NEAR(mix.probs[1], expected, 1e-13) << sd;
    }
}

TEST(NoisyMixture, TwoSpinToyMatchesClosedFormField) {
    for (const gp::ToySpec2 spec : {gp::ToySpec2{0.05, 0.05, 0.05, 12.0},
                                    gp::ToySpec2{-0.02, 0.05, 0.02, 5.0},
                                    gp::ToySpec2{0.3, -0.2, 0.4, 1.0}}) {
        const auto toy = gp::toy_instance(spec);
        const auto mix = gp::noisy_mixture_distribution(toy.input, toy.noise);
        EXPECT_NEAR(walsh_log_coefficient(mix.probs, {0}), spec.beta * gp::effective_field(spec),
                    1e-12);
    }
}

TEST(NoisyMixture, ChainEndCorrelationMatchesClosedFormCoupling) {
    for (const gp::ToySpec3 spec : {gp::ToySpec3{0.05, 0.05, 0.05, 0.05, 12.0},
                                    gp::ToySpec3{0.05, -0.02, 0.02, 0.05, 5.0},
                                    gp::ToySpec3{0.4, 0.3, 0.5, 0.2, 1.0}}) {
        const auto toy = gp::toy_instance(spec);
        const auto mix = gp::noisy_mixture_distribution(toy.input, toy.noise);
        const double j13 = walsh_log_coefficient(mix.probs, {0, 2});
        EXPECT_NEAR(j13, spec.beta * gp::effective_coupling(spec), 1e-12);

        // The three-spin correlation is reproduced by the pairwise effective model
        // whose end-to-end coupling is the closed form.
        gp::GibbsModel eff(3);
        eff.set({0, 1}, walsh_log_coefficient(mix.probs, {0, 1}));
        eff.set({1, 2}, walsh_log_coefficient(mix.probs, {1, 2}));
        eff.set({0, 2}, spec.beta * gp::effective_coupling(spec));
        const auto dist = gp::exact_distribution(eff);
        EXPECT_NEAR(dist.correlation(0b111), oracle::correlation(mix.probs, {0, 1, 2}), 1e-12);
        EXPECT_NEAR(dist.correlation(0b101), oracle::correlation(mix.probs, {0, 2}), 1e-12);
    }
}

TEST(SampleExact, PointMass) {
    gp::ExactDistribution dist;
    dist.n_spins = 2;
    dist.probs = {0.0, 0.0, 1.0, 0.0};
    const auto samples = gp::sample_exact(dist, 1000, 3);
    ASSERT_EQ(samples.records().size(), 1u);
    EXPECT_EQ(samples.records()[0].bits, 2u);
    EXPECT_EQ(samples.total(), 1000u);
}

TEST(SampleExact, UniformCountsWithinFiveSigma) {
    const auto samples = gp::sample_exact(gp::exact_distribution(gp::GibbsModel(2)), 1000000, 42);
    const double sigma = std::sqrt(1e6 * 0.25 * 0.75);
    for (uint64_t c = 0; c < 4; c++) {
        EXPECT_LT(std::abs(static_cast<double>(samples.count(c)) - 250000.0), 5 * sigma);
    }
}

TEST(SampleExact, Deterministic) {
    const auto dist = gp::exact_distribution(gp::GibbsModel(3, {{{0, 1}, 0.4}, {{2}, -0.3}}));
    EXPECT_EQ(gp::sample_exact(dist, 5000, 9), gp::sample_exact(dist, 5000, 9));
    EXPECT_NE(gp::sample_exact(dist, 5000, 9).records(), gp::sample_exact(dist, 5000, 10).records());
}

TEST(SampleExact, ZeroSamplesRejected) {
    const auto dist = gp::exact_distribution(gp::GibbsModel(1));
    EXPECT_THROW(gp::sample_exact(dist, 0, 1), gp::InvariantError);
}

TEST(SampleExact, GoodnessOfFit) {
    gp::GibbsModel model(3, {{{0}, 0.3}, {{0, 1}, -0.5}, {{1, 2}, 0.8}});
    const auto dist = gp::exact_distribution(model);
    const auto samples = gp::sample_exact(dist, 1000000, 5);
    EXPECT_GT(chi_squared_p_value(samples, oracle::probs(3, model.terms())), 1e-3);
}

TEST(SampleNoisy, ZeroSamplesRejected) {
    EXPECT_THROW(gp::sample_noisy(gp::GibbsModel(1), gp::NoiseSpec::uniform(1, 1.0), 0, 1),
                 gp::InvariantError);
}

TEST(SampleNoisy, NoNoiseIndistinguishableFromExact) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(3, 2.0);
    gp::GibbsModel input(3, {{{0}, 0.1}, {{0, 1}, 0.2}, {{1, 2}, -0.3}});
    const auto samples = gp::sample_noisy(input, noise, 1000000, 17);
    const auto eff = gp::effective_noisy_model(input, noise, std::vector<int>{1, 1, 1});
    EXPECT_GT(chi_squared_p_value(samples, oracle::probs(3, eff.terms())), 1e-3);
}

TEST(SampleNoisy, ConvergesToMixture) {
    std::mt19937_64 rng(4);
    const auto m = random_noisy(3, rng);
    const auto samples = gp::sample_noisy(input_of(m), noise_of(m), 1000000, 23);
    EXPECT_GT(chi_squared_p_value(samples, oracle::mixture(m)), 1e-3);
}

TEST(SampleNoisy, LargeNoiseDistinguishableFromNoiseless) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(2, 5.0);
    noise.h_sd = {0.3, 0.0};
    gp::GibbsModel input(2, {{{0}, 0.1}, {{0, 1}, 0.1}});
    const auto samples = gp::sample_noisy(input, noise, 100000, 2);
    gp::NoiseSpec quiet = noise;
    quiet.h_sd = {0.0, 0.0};
    const auto noiseless = gp::effective_noisy_model(input, quiet, std::vector<int>{1, 1});
    EXPECT_LT(chi_squared_p_value(samples, oracle::probs(2, noiseless.terms())), 1e-6);
}

TEST(SampleNoisy, Deterministic) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(2, 5.0);
    noise.h_sd = {0.05, 0.02};
    gp::GibbsModel input(2, {{{0, 1}, 0.1}});
    EXPECT_EQ(gp::sample_noisy(input, noise, 20000, 8), gp::sample_noisy(input, noise, 20000, 8));
}

TEST(SampleNoisy, ChainSpuriousCouplingWithinThreeSigma) {
    const gp::ToySpec3 spec{0.05, 0.05, 0.05, 0.05, 12.0};
    const auto toy = gp::toy_instance(spec);
    const uint64_t M = 10000000;
    const auto samples = gp::sample_noisy(toy.input, toy.noise, M, 77);
    gp::LearnConfig config;
    config.order = 2;
    const auto learned = gp::learn_model(samples, config).model;
    const double expected = spec.beta * gp::effective_coupling(spec);

    // Reconstruction sigma of the end-to-end coupling from the replicate protocol
    // applied to the exact effective model of the mixture.
    const auto mix = gp::noisy_mixture_distribution(toy.input, toy.noise);
    gp::GibbsModel reference(3);
    for (const gp::TermKey &key : {gp::TermKey{0, 1}, gp::TermKey{0, 2}, gp::TermKey{1, 2}}) {
        reference.set(key, walsh_log_coefficient(mix.probs, key));
    }
    const auto report = gp::estimate_error(reference, M, 8, config, 5);
    double sigma = 0.0;
    for (const auto &t : report.terms) {
        if (t.key == gp::TermKey{0, 2}) {
            sigma = t.sigma;
        }
    }
    ASSERT_GT(sigma, 0.0);
    EXPECT_LT(std::abs(learned.coefficient({0, 2}) - expected), 3 * sigma)
        << learned.coefficient({0, 2}) << " vs " << expected << " sigma " << sigma;
}

TEST(Gauge, IdentityAndInvolution) {
    gp::GibbsModel model(3, {{{0}, 0.1}, {{1}, -0.2}, {{0, 2}, 0.3}, {{1, 2}, -0.4}});
    EXPECT_EQ(gp::apply_gauge(model, gp::GaugeVector({1, 1, 1})), model);
    const gp::GaugeVector tau({-1, 1, -1});
    EXPECT_EQ(gp::apply_gauge(gp::apply_gauge(model, tau), tau), model);
    const auto g = gp::apply_gauge(model, tau);
    EXPECT_EQ(g.coefficient({0}), -0.1);
    EXPECT_EQ(g.coefficient({0, 2}), 0.3);
    EXPECT_EQ(g.coefficient({1, 2}), 0.4);

    gp::SampleSet samples(3, {{0b001, 4}, {0b110, 2}});
    EXPECT_EQ(gp::apply_gauge_samples(gp::apply_gauge_samples(samples, tau), tau).records(),
              samples.records());
    EXPECT_EQ(gp::apply_gauge_samples(samples, tau).count(0b100), 4u);
}

TEST(Gauge, DistributionEquivalence) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    gp::GibbsModel model(4);
    for (int i = 0; i < 4; i++) {
        model.set({i}, u(rng));
        for (int j = i + 1; j < 4; j++) {
            model.set({i, j}, u(rng));
        }
    }
    const auto base = gp::exact_distribution(model);
    for (uint64_t mask = 0; mask < 16; mask++) {
        const auto tau = gp::GaugeVector::from_flip_mask(mask, 4);
        EXPECT_EQ(tau.flip_mask(), mask);
        const auto gauged = gp::exact_distribution(gp::apply_gauge(model, tau));
        for (uint64_t c = 0; c < 16; c++) {
            EXPECT_NEAR(gauged.probs[c ^ mask], base.probs[c], 1e-15);
        }
        const auto moved = gp::apply_gauge_distribution(base, tau);
        for (uint64_t c = 0; c < 16; c++) {
            EXPECT_NEAR(moved.probs[c], gauged.probs[c], 1e-15);
        }
    }
}

TEST(Gauge, RejectsBadEntries) {
    EXPECT_THROW(gp::GaugeVector({1, 0}), gp::InvariantError);
}

TEST(Srt, VanishingMeansWithBiases) {
    std::mt19937_64 rng(31);
    for (int n = 1; n <= 4; n++) {
        auto m = random_noisy(n, rng);
        for (double &h : m.h) {
            h = 0.0;
        }
        for (double &b : m.bias) {
            b = 0.05;
        }
        const auto srt = gp::srt_effective_distribution(input_of(m), noise_of(m));
        EXPECT_TRUE(srt.exact);
        EXPECT_EQ(srt.num_gauges, 1 << n);
        for (int i = 0; i < n; i++) {
            EXPECT_LE(std::abs(srt.dist.mean(i)), 1e-12);
        }
    }
}

TEST(Srt, NoBiasNoNoiseIsUnchanged) {
    gp::GibbsModel input(3, {{{0}, 0.1}, {{0, 1}, 0.2}, {{1, 2}, -0.3}});
    const auto noise = gp::NoiseSpec::uniform(3, 2.0);
    const auto srt = gp::srt_effective_distribution(input, noise);
    const auto expected = oracle::probs(
        3, gp::effective_noisy_model(input, noise, std::vector<int>{1, 1, 1}).terms());
    for (size_t c = 0; c < expected.size(); c++) {
        EXPECT_NEAR(srt.dist.probs[c], expected[c], 1e-15);
    }
}

TEST(Srt, SingleBiasEqualsSymmetricBiasMixture) {
    const double beta = 4.0, J = 0.2, b = 0.05;
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(2, beta);
    noise.h_bias = {b, 0.0};
    const auto srt = gp::srt_effective_distribution(gp::GibbsModel(2, {{{0, 1}, J}}), noise);
    const auto plus = oracle::probs(2, {{{0}, beta * b}, {{0, 1}, beta * J}});
    const auto minus = oracle::probs(2, {{{0}, -beta * b}, {{0, 1}, beta * J}});
    for (int c = 0; c < 4; c++) {
        EXPECT_NEAR(srt.dist.probs[c], 0.5 * (plus[c] + minus[c]), 1e-15);
    }
    EXPECT_NEAR(srt.dist.correlation(0b11), std::tanh(beta * J), 1e-15);
}

TEST(Srt, MonteCarloGaugesAboveCap) {
    std::mt19937_64 rng(8);
    const auto m = random_noisy(4, rng);
    const auto exact = gp::srt_effective_distribution(input_of(m), noise_of(m));
    gp::SrtOptions options;
    options.cap_gauge = 2;
    options.num_random_gauges = 4000;
    options.seed = 3;
    const auto mc = gp::srt_effective_distribution(input_of(m), noise_of(m), options);
    EXPECT_FALSE(mc.exact);
    EXPECT_EQ(mc.num_gauges, 4000);
    EXPECT_GT(mc.max_standard_error, 0.0);
    for (size_t c = 0; c < exact.dist.probs.size(); c++) {
        EXPECT_LT(std::abs(mc.dist.probs[c] - exact.dist.probs[c]), 5 * mc.max_standard_error);
    }
}
