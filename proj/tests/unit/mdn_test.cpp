// Copyright 2026 The ctraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ctraj/error.hpp"
#include "ctraj/grad_check.hpp"
#include "ctraj/mdn.hpp"
#include "ctraj/ops.hpp"
#include "oracles.hpp"
#include "probes.hpp"

namespace ctraj
{
namespace
{

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

MixtureParams random_mixture(std::size_t M, std::size_t N, std::mt19937_64 & rng)
{
  MixtureParams p;
  p.components = M;
  p.agents = N;
  p.logits = testing::random_values(M, rng, -2, 2);
  p.means = testing::random_values(M * N * 2, rng, -1, 1);
  p.chol = testing::random_values(M * N * 3, rng, -0.7, 0.7);
  return p;
}

MixtureParams unit_mixture(std::size_t M, std::size_t N)
{
  MixtureParams p;
  p.components = M;
  p.agents = N;
  p.logits.assign(M, 0.0);
  p.means.assign(M * N * 2, 0.0);
  p.chol.assign(M * N * 3, 0.0);
  return p;
}

TEST(Cholesky, Examples)
{
  const auto id = cholesky_expand(0, 0, 0);
  EXPECT_EQ(id.L, (std::array<double, 4>{1, 0, 0, 1}));
  EXPECT_EQ(id.sigma, (std::array<double, 4>{1, 0, 0, 1}));
  const auto two = cholesky_expand(std::log(2.0), 0, std::log(2.0));
  EXPECT_NEAR(two.sigma[0], 4.0, 1e-12);
  EXPECT_NEAR(two.sigma[3], 4.0, 1e-12);
  EXPECT_EQ(two.sigma[1], 0.0);
  const auto r = cholesky_expand(0.3, 0.5, -0.2);
  const double a = std::exp(0.3), c = 0.5, b = std::exp(-0.2);
  EXPECT_NEAR(r.sigma[0], a * a, 1e-14);
  EXPECT_NEAR(r.sigma[1], a * c, 1e-14);
  EXPECT_NEAR(r.sigma[2], a * c, 1e-14);
  EXPECT_NEAR(r.sigma[3], c * c + b * b, 1e-14);
}

TEST(Cholesky, ClampsLogScales)
{
  const auto r = cholesky_expand(50.0, 0.0, -50.0);
  EXPECT_DOUBLE_EQ(r.L[0], std::exp(kLogScaleMax));
  EXPECT_DOUBLE_EQ(r.L[3], std::exp(kLogScaleMin));
}

TEST(GaussianDensity, Examples)
{
  const std::vector<double> zero{0.0, 0.0};
  const std::vector<Lower2> I{{1, 0, 1}}, twoI{{2, 0, 2}};
  EXPECT_NEAR(gaussian_log_density(zero, zero, I), -kLog2Pi, 1e-12);
  EXPECT_NEAR(gaussian_log_density(zero, zero, twoI), -std::log(4.0) - kLog2Pi, 1e-12);
  const std::vector<Lower2> bad{{-1, 0, 1}};
  EXPECT_THROW(gaussian_log_density(zero, zero, bad), NumericError);
}

TEST(GaussianDensity, MatchesDenseOracle)
{
  EXPECT_LT(testing::density_oracle_gap(100, 31), 1e-9);
}

TEST(Mixture, CollapseToSingleComponent)
{
  std::mt19937_64 rng(32);
  MixtureParams p = random_mixture(4, 3, rng);
  for (std::size_t m = 1; m < 4; ++m) {
    std::copy_n(p.means.begin(), 6, p.means.begin() + m * 6);
    std::copy_n(p.chol.begin(), 9, p.chol.begin() + m * 9);
  }
  const auto Y = testing::random_values(6, rng);
  std::vector<Lower2> L(3);
  for (std::size_t n = 0; n < 3; ++n) L[n] = p.factor(0, n);
  EXPECT_NEAR(mixture_log_likelihood(p, Y), gaussian_log_density(Y, p.mean(0), L), 1e-12);
}

TEST(Mixture, LogitShiftInvariance)
{
  std::mt19937_64 rng(33);
  for (int i = 0; i < 20; ++i) {
    MixtureParams p = random_mixture(5, 3, rng);
    const auto Y = testing::random_values(6, rng);
    const double before = mixture_log_likelihood(p, Y);
    for (auto & l : p.logits) l += 17.3;
    EXPECT_NEAR(mixture_log_likelihood(p, Y), before, 1e-12);
  }
}

TEST(Mixture, MatchesDirectWeightedSum)
{
  std::mt19937_64 rng(34);
  const MixtureParams p = random_mixture(2, 3, rng);
  const auto Y = testing::random_values(6, rng);
  const long double w0 = std::exp(static_cast<long double>(p.logits[0]));
  const long double w1 = std::exp(static_cast<long double>(p.logits[1]));
  long double total = 0.0L;
  for (std::size_t m = 0; m < 2; ++m) {
    std::vector<Lower2> L(3);
    for (std::size_t n = 0; n < 3; ++n) L[n] = p.factor(m, n);
    const long double dens =
      std::exp(testing::dense_mvn_log_density(Y, p.mean(m), testing::block_diagonal_sigma(L)));
    total += (m == 0 ? w0 : w1) / (w0 + w1) * dens;
  }
  EXPECT_NEAR(mixture_log_likelihood(p, Y), static_cast<double>(std::log(total)), 1e-10);
}

TEST(Entropy, Examples)
{
  EXPECT_NEAR(entropy_regularizer(std::vector<double>(8, 0.3)), 1.0, 1e-6);
  EXPECT_NEAR(entropy_regularizer(std::vector<double>{40.0, 0.0, 0.0}), 0.0, 1e-6);
  const double want = -(0.75 * std::log(0.75 + 1e-8) + 0.25 * std::log(0.25 + 1e-8)) / std::log(2.0);
  EXPECT_NEAR(entropy_regularizer(std::vector<double>{std::log(0.75), std::log(0.25)}), want, 1e-12);
  EXPECT_NEAR(want, 0.811278, 1e-6);
  EXPECT_EQ(entropy_regularizer(std::vector<double>{3.0}), 0.0);
}

TEST(Entropy, BoundedAndMaximalOnlyAtUniform)
{
  std::mt19937_64 rng(35);
  for (int i = 0; i < 200; ++i) {
    const auto l = testing::random_values(6, rng, -3, 3);
    const double e = entropy_regularizer(l);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
    EXPECT_LT(e, 1.0 - 1e-6);
  }
}

TEST(StepLoss, Examples)
{
  const MixtureParams single = unit_mixture(1, 11);
  const std::vector<double> Y(22, 0.0);
  EXPECT_NEAR(step_loss(single, Y), 11 * kLog2Pi, 1e-9);
  EXPECT_NEAR(11 * kLog2Pi, 20.2167, 1e-4);
  const MixtureParams uniform = unit_mixture(4, 2);
  const std::vector<double> Y2{0.3, -0.2, 0.1, 0.4};
  const double nll = -gaussian_log_density(Y2, uniform.mean(0), std::vector<Lower2>(2, {1, 0, 1}));
  EXPECT_NEAR(step_loss(uniform, Y2), nll - kEntropyWeight * entropy_regularizer(uniform.logits), 1e-12);
  EXPECT_NEAR(entropy_regularizer(uniform.logits), 1.0, 1e-7);
}

TEST(StepLoss, ComposesOracles)
{
  std::mt19937_64 rng(36);
  const MixtureParams p = random_mixture(3, 2, rng);
  const auto Y = testing::random_values(4, rng);
  EXPECT_NEAR(step_loss(p, Y), -mixture_log_likelihood(p, Y) - 0.05 * entropy_regularizer(p.logits), 1e-14);
}

TEST(StepLoss, TensorFormMatchesScalarAndPassesGradCheck)
{
  std::mt19937_64 rng(37);
  const std::size_t R = 4, M = 3, N = 2;
  const Tensor logits = testing::random_tensor({R, M}, rng, -1, 1, true);
  const Tensor means = testing::random_tensor({R, M, N, 2}, rng, -1, 1, true);
  const Tensor chol = testing::random_tensor({R, M, N, 3}, rng, -0.5, 0.5, true);
  const Tensor Y = testing::random_tensor({R, N, 2}, rng);
  double want = 0.0;
  const Tensor ll = mixture_log_likelihood(logits, means, chol, Y);
  for (std::size_t r = 0; r < R; ++r) {
    MixtureParams p;
    p.components = M;
    p.agents = N;
    p.logits.assign(logits.data().begin() + r * M, logits.data().begin() + (r + 1) * M);
    p.means.assign(means.data().begin() + r * M * N * 2, means.data().begin() + (r + 1) * M * N * 2);
    p.chol.assign(chol.data().begin() + r * M * N * 3, chol.data().begin() + (r + 1) * M * N * 3);
    const std::span<const double> y(Y.data().data() + r * N * 2, N * 2);
    EXPECT_NEAR(ll.data()[r], mixture_log_likelihood(p, y), 1e-12);
    want += step_loss(p, y) / R;
  }
  EXPECT_NEAR(step_loss(logits, means, chol, Y).item(), want, 1e-12);
  const auto report = grad_check([&] { return step_loss(logits, means, chol, Y); }, {logits, means, chol});
  EXPECT_LT(report.max_rel_error, 1e-4);
}

TEST(Sampling, VanishingNoiseReturnsMean)
{
  MixtureParams p = unit_mixture(1, 3);
  p.means = {0.5, -1, 2, 3, -4, 0.25};
  for (std::size_t i = 0; i < p.chol.size(); ++i) p.chol[i] = i % 3 == 1 ? 0.0 : -7.0;
  std::mt19937_64 rng(38);
  const auto y = sample_displacement(p, rng);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(y[i], p.means[i], 1e-2);
  std::mt19937_64 rng2(38);
  EXPECT_EQ(sample_component_mean(p, rng2), p.means);
}

TEST(Sampling, DominantComponentAlwaysChosen)
{
  MixtureParams p = unit_mixture(2, 1);
  p.logits = {40.0, 0.0};
  std::mt19937_64 rng(39);
  for (int i = 0; i < 100000; ++i) ASSERT_EQ(sample_component(p.logits, rng), 0u);
}

TEST(Sampling, DeterministicUnderSeed)
{
  std::mt19937_64 gen(40);
  const MixtureParams p = random_mixture(3, 2, gen);
  std::mt19937_64 a(7), b(7);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_displacement(p, a), sample_displacement(p, b));
}

TEST(Sampling, ComponentMeanFrequencies)
{
  MixtureParams p = unit_mixture(2, 1);
  p.means = {1.0, 0.0, -1.0, 0.0};
  std::mt19937_64 rng(41);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += sample_component_mean(p, rng)[0] > 0 ? 1 : 0;
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(Sampling, MomentsMatchMixture)
{
  const auto stats = testing::mixture_sampling_stats(100000, 42);
  EXPECT_LT(stats.max_frequency_error, 0.01);
  EXPECT_LT(stats.max_covariance_error, 0.05);
}

TEST(Sampling, MeanModeMatchesNarrowSamplingInDistribution)
{
  MixtureParams p = testing::fixed_test_mixture();
  for (std::size_t i = 0; i < p.chol.size(); ++i) p.chol[i] = i % 3 == 1 ? 0.0 : -7.0;
  std::mt19937_64 a(43), b(44);
  double ma = 0, mb = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    ma += sample_displacement(p, a)[1] / draws;
    mb += sample_component_mean(p, b)[1] / draws;
  }
  EXPECT_NEAR(ma, mb, 0.03);
}

}  // namespace
}  // namespace ctraj
