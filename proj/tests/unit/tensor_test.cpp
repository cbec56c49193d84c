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

#include <random>

#include "ctraj/error.hpp"
#include "ctraj/grad_check.hpp"
#include "ctraj/ops.hpp"
#include "ctraj/tensor.hpp"
#include "oracles.hpp"

namespace ctraj
{
namespace
{

TEST(Tensor, FactoriesAndShape)
{
  const Tensor t = Tensor::full({2, 3}, 1.5);
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.dim(-1), 3u);
  EXPECT_EQ(t.dim(0), 2u);
  for (const double v : t.data()) EXPECT_EQ(v, 1.5);
  EXPECT_EQ(Tensor::scalar(4.0).item(), 4.0);
  EXPECT_EQ(shape_str({2, 3}), "[2, 3]");
  EXPECT_THROW(Tensor::from_data({2, 2}, {1.0, 2.0}), ShapeError);
}

TEST(Tensor, HandlesShareStorage)
{
  Tensor a = Tensor::zeros({3});
  Tensor b = a;
  b.mutable_data()[1] = 7.0;
  EXPECT_EQ(a.data()[1], 7.0);
  const Tensor d = a.detach();
  a.mutable_data()[1] = 1.0;
  EXPECT_EQ(d.data()[1], 7.0);
}

TEST(Tensor, GradientAccumulatesOverReuse)
{
  // f = sum(x * x + x) -> df/dx = 2x + 1
  const Tensor x = Tensor::from_data({3}, {1.0, -2.0, 0.5}, true);
  sum(add(mul(x, x), x)).backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 3.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], -3.0);
  EXPECT_DOUBLE_EQ(x.grad()[2], 2.0);
  EXPECT_LT(grad_check([&] { return sum(add(mul(x, x), x)); }, x), 1e-7);
}

TEST(Tensor, BackwardRequiresScalar)
{
  const Tensor x = Tensor::from_data({2}, {1.0, 2.0}, true);
  EXPECT_THROW(mul(x, x).backward(), ShapeError);
}

TEST(Tensor, NoGradGuardDropsHistory)
{
  const Tensor x = Tensor::from_data({2}, {1.0, 2.0}, true);
  Tensor y;
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_mode_enabled());
    y = mul(x, x);
  }
  EXPECT_TRUE(grad_mode_enabled());
  EXPECT_FALSE(y.requires_grad());
}

TEST(GradCheck, LinearIsExact)
{
  std::mt19937_64 rng(1);
  const Tensor x = testing::random_tensor({3, 4}, rng, -1, 1, true);
  const Tensor W = testing::random_tensor({4, 2}, rng);
  const Tensor b = testing::random_tensor({2}, rng);
  EXPECT_LT(grad_check([&] { return sum(linear(x, W, b)); }, x), 1e-7);
}

TEST(GradCheck, LogSumExp)
{
  std::mt19937_64 rng(2);
  const Tensor x = testing::random_tensor({7}, rng, -3, 3, true);
  EXPECT_LT(grad_check([&] { return logsumexp_lastdim(x); }, x), 1e-6);
}

TEST(GradCheck, ReportsNonFinite)
{
  const Tensor x = Tensor::from_data({1}, {1e-7}, true);
  EXPECT_THROW(grad_check([&] { return sum(log(x)); }, x, 1e-5), NumericError);
}

}  // namespace
}  // namespace ctraj
