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

#ifndef CTRAJ__MDN_HPP_
#define CTRAJ__MDN_HPP_

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "ctraj/tensor.hpp"

namespace ctraj
{

// Log-scale Cholesky diagonals are clamped to this range before exponentiation.
constexpr double kLogScaleMin = -7.0;
constexpr double kLogScaleMax = 7.0;
constexpr double kEntropyEps = 1e-8;
constexpr double kEntropyWeight = 0.05;
constexpr std::size_t kDefaultMixtures = 8;

// Lower-triangular 2x2 factor [[a, 0], [c, b]] with a, b > 0.
struct Lower2
{
  double a, c, b;
};

struct CholeskyExpansion
{
  std::array<double, 4> L;      // row-major
  std::array<double, 4> sigma;  // row-major, L L^T
};

// Raw (l11, l21, l22) -> L = [[exp(l11), 0], [l21, exp(l22)]] and Sigma = L L^T,
// with l11 and l22 clamped to [kLogScaleMin, kLogScaleMax].
CholeskyExpansion cholesky_expand(double l11, double l21, double l22);
Lower2 lower_from_raw(double l11, double l21, double l22);

// Block-diagonal Gaussian log-density of Y [N, 2] with per-agent factors.
// Throws NumericError on a non-positive diagonal.
double gaussian_log_density(std::span<const double> Y, std::span<const double> mu, std::span<const Lower2> L);

/// Mixture of Gaussians over the joint displacement of N agents at one timestep.
struct MixtureParams
{
  std::size_t components{0};
  std::size_t agents{0};
  std::vector<double> logits;  // [M]
  std::vector<double> means;   // [M, N, 2]
  std::vector<double> chol;    // [M, N, 3] raw (l11, l21, l22), unclamped

  // Clamped factor of component m, agent n.
  Lower2 factor(std::size_t m, std::size_t n) const;
  std::span<const double> mean(std::size_t m) const { return {means.data() + m * agents * 2, agents * 2}; }
  void validate() const;
};

double mixture_log_likelihood(const MixtureParams & params, std::span<const double> Y);

// Normalized entropy of softmax(logits) in [0, 1]; defined as 0 for a single component.
double entropy_regularizer(std::span<const double> logits);

// -log p(Y) - kEntropyWeight * entropy.
double step_loss(const MixtureParams & params, std::span<const double> Y);

std::size_t sample_component(std::span<const double> logits, std::mt19937_64 & rng);

// One component index shared by all agents, then Y_n = mu_{m,n} + L_{m,n} z.
std::vector<double> sample_displacement(const MixtureParams & params, std::mt19937_64 & rng);

// Component index as above, returns its mean without noise.
std::vector<double> sample_component_mean(const MixtureParams & params, std::mt19937_64 & rng);

// --- differentiable batch versions ---------------------------------------

// logits [R, M], means [R, M, N, 2], chol [R, M, N, 3], Y [R, N, 2] -> log p [R].
Tensor mixture_log_likelihood(const Tensor & logits, const Tensor & means, const Tensor & chol, const Tensor & Y);

// [R, M] -> [R]
Tensor entropy_regularizer(const Tensor & logits);

// Mean over rows of -log p - entropy_weight * entropy.
Tensor step_loss(
  const Tensor & logits, const Tensor & means, const Tensor & chol, const Tensor & Y,
  double entropy_weight = kEntropyWeight);

}  // namespace ctraj

#endif  // CTRAJ__MDN_HPP_
