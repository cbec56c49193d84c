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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ctraj/error.hpp"
#include "ctraj/ops.hpp"
#include "oracles.hpp"
#include "primitive_checks.hpp"

namespace ctraj
{
namespace
{

std::vector<double> values(const Tensor & t) { return {t.data().begin(), t.data().end()}; }

TEST(Linear, IdentityAndDiagonal)
{
  const Tensor I = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  EXPECT_EQ(values(linear(Tensor::from_data({2}, {1, 0}), I, Tensor::zeros({2}))), (std::vector<double>{1, 0}));
  const Tensor W = Tensor::from_data({2, 2}, {2, 0, 0, 3});
  EXPECT_EQ(values(linear(Tensor::from_data({2}, {1, 1}), W, Tensor::full({2}, 1.0))),
            (std::vector<double>{3, 4}));
}

TEST(Linear, MatchesNaiveMatmul)
{
  std::mt19937_64 rng(3);
  const Tensor x = testing::random_tensor({3, 4}, rng), W = testing::random_tensor({4, 2}, rng);
  const Tensor b = testing::random_tensor({2}, rng);
  const auto want = testing::naive_linear(x.data(), W.data(), b.data(), 3, 4, 2);
  const auto got = linear(x, W, b);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.data()[i], want[i], 1e-6);
  EXPECT_THROW(linear(x, testing::random_tensor({3, 2}, rng)), ShapeError);
}

TEST(LogSumExp, Examples)
{
  EXPECT_NEAR(logsumexp_lastdim(Tensor::from_data({2}, {0, 0})).item(), std::log(2.0), 1e-12);
  for (const double c : {-5.0, 0.0, 12.5}) {
    EXPECT_NEAR(logsumexp_lastdim(Tensor::full({4}, c)).item(), c + std::log(4.0), 1e-12);
  }
  const double big = logsumexp_lastdim(Tensor::from_data({2}, {1000, 1000})).item();
  EXPECT_TRUE(std::isfinite(big));
  EXPECT_NEAR(big, 1000 + std::log(2.0), 1e-9);
}

TEST(LogSumExp, ShiftProperty)
{
  std::mt19937_64 rng(4);
  const Tensor x = testing::random_tensor({3, 6}, rng, -4, 4);
  const Tensor a = logsumexp_lastdim(x), b = logsumexp_lastdim(add_scalar(x, 3.25));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(b.data()[i], a.data()[i] + 3.25, 1e-9);
}

TEST(Softmax, Examples)
{
  const Tensor u = softmax_lastdim(Tensor::zeros({4}));
  for (const double v : u.data()) EXPECT_DOUBLE_EQ(v, 0.25);
  const Tensor d = softmax_lastdim(Tensor::from_data({2}, {30, 0}));
  EXPECT_NEAR(d.data()[0], 1.0, 1e-12);
  EXPECT_NEAR(d.data()[1], std::exp(-30.0), 1e-15);
}

TEST(Softmax, MatchesDirectEvaluationAndSumsToOne)
{
  std::mt19937_64 rng(5);
  const Tensor x = testing::random_tensor({8}, rng, -3, 3);
  double z = 0;
  for (const double v : x.data()) z += std::exp(v);
  const Tensor s = softmax_lastdim(x), shifted = softmax_lastdim(add_scalar(x, -41.0));
  double total = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(s.data()[i], std::exp(x.data()[i]) / z, 1e-7);
    EXPECT_NEAR(shifted.data()[i], s.data()[i], 1e-12);
    EXPECT_GE(s.data()[i], 0.0);
    total += s.data()[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(LayerNorm, Examples)
{
  const Tensor g = Tensor::full({3}, 1.0), b = Tensor::zeros({3});
  const Tensor flat = layer_norm(Tensor::full({3}, 2.5), g, b);
  for (const double v : flat.data()) EXPECT_EQ(v, 0.0);
  const Tensor y = layer_norm(Tensor::from_data({2}, {1, -1}), Tensor::full({2}, 1.0), Tensor::zeros({2}));
  EXPECT_NEAR(y.data()[0], 1.0, 1e-5);
  EXPECT_NEAR(y.data()[1], -1.0, 1e-5);
}

TEST(LayerNorm, Moments)
{
  std::mt19937_64 rng(6);
  const Tensor y = layer_norm(testing::random_tensor({8}, rng, -5, 5), Tensor::full({8}, 1.0), Tensor::zeros({8}));
  double m = 0, v = 0;
  for (const double x : y.data()) m += x / 8;
  for (const double x : y.data()) v += (x - m) * (x - m) / 8;
  EXPECT_LT(std::fabs(m), 1e-6);
  EXPECT_NEAR(v, 1.0, 1e-4);
}

TEST(RmsNorm, UnitRootMeanSquare)
{
  std::mt19937_64 rng(7);
  const Tensor y = rms_norm(testing::random_tensor({2, 16}, rng, -4, 4), Tensor::full({16}, 1.0));
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0;
    for (std::size_t i = 0; i < 16; ++i) s += y.data()[r * 16 + i] * y.data()[r * 16 + i];
    EXPECT_NEAR(s / 16, 1.0, 1e-4);
  }
}

TEST(MaxPool, Examples)
{
  EXPECT_EQ(values(max_pool_window(Tensor::from_data({3, 1}, {1, 3, 2}), 3)), (std::vector<double>{1, 3, 3}));
  EXPECT_EQ(values(max_pool_window(Tensor::from_data({2, 1}, {-1, -2}), 2)), (std::vector<double>{-1, -1}));
}

TEST(MaxPool, MatchesBruteForce)
{
  std::mt19937_64 rng(8);
  const Tensor x = testing::random_tensor({16, 4}, rng, -2, 2);
  for (const std::size_t w : {1u, 3u, 5u, 16u, 40u}) {
    const auto want = testing::naive_max_pool(x.data(), 1, 16, 4, w, kPoolPad);
    EXPECT_EQ(values(max_pool_window(x, w)), want) << "window " << w;
  }
  // window >= T is the running prefix max; 0 spells the same thing
  EXPECT_EQ(values(max_pool_window(x, 0)), values(max_pool_window(x, 16)));
}

TEST(MaxPool, TiesRouteGradientToLowestIndex)
{
  const Tensor x = Tensor::from_data({3, 1}, {2, 2, 1}, true);
  sum(max_pool_window(x, 0)).backward();
  EXPECT_EQ(x.grad()[0], 3.0);
  EXPECT_EQ(x.grad()[1], 0.0);
  EXPECT_EQ(x.grad()[2], 0.0);
}

TEST(Ops, ReshapePermuteSliceConcat)
{
  const Tensor x = Tensor::from_data({2, 3}, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(values(permute(x, {1, 0})), (std::vector<double>{0, 3, 1, 4, 2, 5}));
  EXPECT_EQ(values(slice_lastdim(x, 1, 2)), (std::vector<double>{1, 2, 4, 5}));
  EXPECT_EQ(values(concat_lastdim({x, slice_lastdim(x, 0, 1)})), (std::vector<double>{0, 1, 2, 0, 3, 4, 5, 3}));
  EXPECT_THROW(reshape(x, {4, 2}), ShapeError);
  const std::vector<std::size_t> idx{1, 1};
  EXPECT_EQ(values(gather_rows(x, idx)), (std::vector<double>{3, 4, 5, 3, 4, 5}));
}

TEST(Ops, ShapeMismatchThrows)
{
  EXPECT_THROW(add(Tensor::zeros({2}), Tensor::zeros({3})), ShapeError);
  EXPECT_THROW(add_lastdim(Tensor::zeros({2, 3}), Tensor::zeros({2})), ShapeError);
}

TEST(Ops, PrimitiveGradientsOverSeeds)
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const auto & check : testing::run_primitive_grad_checks(seed)) {
      EXPECT_LT(check.max_rel_error, 1e-5) << check.name << " seed " << seed;
    }
  }
}

}  // namespace
}  // namespace ctraj
