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

#include "ctraj/attention.hpp"
#include "ctraj/error.hpp"
#include "oracles.hpp"

namespace ctraj
{
namespace
{

TEST(SelfAttention, MatchesNaiveOracle)
{
  std::mt19937_64 rng(11);
  const std::size_t R = 2, N = 5, H = 3, dh = 4;
  const Tensor Q = testing::random_tensor({R, N, H, dh}, rng), K = testing::random_tensor({R, N, H, dh}, rng);
  const Tensor V = testing::random_tensor({R, N, H, dh}, rng);
  const auto want = testing::naive_self_attention(Q.data(), K.data(), V.data(), R, N, H, dh);
  const Tensor got = self_attention(Q, K, V);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.data()[i], want[i], 1e-12);
}

TEST(SelfAttention, UniformWeightsAverageValues)
{
  // identical keys make every query attend uniformly
  std::mt19937_64 rng(12);
  const std::size_t N = 4;
  const Tensor Q = testing::random_tensor({1, N, 1, 2}, rng);
  const Tensor K = Tensor::full({1, N, 1, 2}, 0.7);
  const Tensor V = testing::random_tensor({1, N, 1, 2}, rng);
  const Tensor out = self_attention(Q, K, V);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0;
    for (std::size_t n = 0; n < N; ++n) m += V.data()[n * 2 + c] / N;
    for (std::size_t q = 0; q < N; ++q) EXPECT_NEAR(out.data()[q * 2 + c], m, 1e-12);
  }
}

TEST(SelfAttention, SingleAgentReturnsValue)
{
  std::mt19937_64 rng(13);
  const Tensor Q = testing::random_tensor({1, 1, 2, 3}, rng), K = testing::random_tensor({1, 1, 2, 3}, rng);
  const Tensor V = testing::random_tensor({1, 1, 2, 3}, rng);
  const Tensor out = self_attention(Q, K, V);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(out.data()[i], V.data()[i], 1e-15);
}

TEST(PairAttention, MatchesNaiveOracle)
{
  std::mt19937_64 rng(14);
  const std::size_t R = 2, N = 4, H = 2, dh = 3;
  const Tensor Q = testing::random_tensor({R, N, H, dh}, rng);
  const Tensor K = testing::random_tensor({R, N, N, H, dh}, rng), V = testing::random_tensor({R, N, N, H, dh}, rng);
  const auto want = testing::naive_pair_attention(Q.data(), K.data(), V.data(), R, N, H, dh);
  const Tensor got = pair_attention(Q, K, V);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.data()[i], want[i], 1e-12);
  EXPECT_THROW(pair_attention(Q, Q, Q), ShapeError);
}

TEST(Mesh, MatchesDirectConstruction)
{
  std::mt19937_64 rng(15);
  const std::size_t N = 5, d = 3, c = 4;
  const Tensor Z = testing::random_tensor({1, N, d}, rng), X = testing::random_tensor({1, N, c}, rng);
  const Tensor M = build_mesh(Z, X);
  ASSERT_EQ(M.shape(), (Shape{1, N, N, c + 2 * d}));
  const std::size_t w = c + 2 * d;
  for (std::size_t q = 0; q < N; ++q) {
    for (std::size_t k = 0; k < N; ++k) {
      const double * e = M.data().data() + (q * N + k) * w;
      for (std::size_t i = 0; i < c; ++i) EXPECT_EQ(e[i], X.data()[q * c + i] - X.data()[k * c + i]);
      for (std::size_t i = 0; i < d; ++i) {
        EXPECT_EQ(e[c + i], Z.data()[q * d + i]);
        EXPECT_EQ(e[c + d + i], Z.data()[k * d + i]);
      }
    }
  }
}

TEST(Mesh, CoincidentAgentsHaveZeroOffsets)
{
  const Tensor Z = Tensor::from_data({1, 2, 1}, {1, 2});
  const Tensor X = Tensor::from_data({1, 2, 4}, {3, 4, 1, 1, 3, 4, 1, 1});
  const Tensor M = build_mesh(Z, X);
  const std::size_t w = 6;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(M.data()[1 * w + i], 0.0);
}

TEST(Mesh, TranslationInvariant)
{
  // dyadic coordinates keep the differences exact
  std::mt19937_64 rng(16);
  std::uniform_int_distribution<int> u(-64, 64);
  std::vector<double> x(3 * 4), y(3 * 4);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = u(rng) / 8.0;
    y[i] = x[i] + (i % 4 == 0 ? 5.0 : i % 4 == 1 ? -3.0 : 0.0);
  }
  const Tensor Z = testing::random_tensor({1, 3, 2}, rng);
  const Tensor a = build_mesh(Z, Tensor::from_data({1, 3, 4}, x)), b = build_mesh(Z, Tensor::from_data({1, 3, 4}, y));
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
}

}  // namespace
}  // namespace ctraj
