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

#include "ctraj/mdn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ctraj/error.hpp"
#include "ctraj/ops.hpp"

namespace ctraj
{

using detail::Node;

namespace
{

constexpr double kLog2Pi = 1.8378770664093454836;

double clamp_log_scale(double v) { return std::clamp(v, kLogScaleMin, kLogScaleMax); }

bool inside_clamp(double v) { return v > kLogScaleMin && v < kLogScaleMax; }

double logsumexp(std::span<const double> v)
{
  const double mx = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double x : v) z += std::exp(x - mx);
  return mx + std::log(z);
}

// Whitened residual z = L^{-1} r by forward substitution.
struct Whitened
{
  double z1, z2;
};

Whitened whiten(const Lower2 & L, double r1, double r2)
{
  const double z1 = r1 / L.a;
  return {z1, (r2 - L.c * z1) / L.b};
}

}  // namespace

Lower2 lower_from_raw(double l11, double l21, double l22)
{
  return {std::exp(clamp_log_scale(l11)), l21, std::exp(clamp_log_scale(l22))};
}

CholeskyExpansion cholesky_expand(double l11, double l21, double l22)
{
  const Lower2 f = lower_from_raw(l11, l21, l22);
  CholeskyExpansion out{};
  out.L = {f.a, 0.0, f.c, f.b};
  out.sigma = {f.a * f.a, f.a * f.c, f.a * f.c, f.c * f.c + f.b * f.b};
  return out;
}

double gaussian_log_density(std::span<const double> Y, std::span<const double> mu, std::span<const Lower2> L)
{
  const std::size_t n = L.size();
  if (Y.size() != 2 * n || mu.size() != 2 * n) {
    throw ShapeError(
      "gaussian_log_density: Y has " + std::to_string(Y.size()) + " values, mu " + std::to_string(mu.size()) +
      ", factors " + std::to_string(n));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(L[i].a > 0.0) || !(L[i].b > 0.0)) {
      throw NumericError("gaussian_log_density: non-positive Cholesky diagonal for agent " + std::to_string(i));
    }
    const auto [z1, z2] = whiten(L[i], Y[2 * i] - mu[2 * i], Y[2 * i + 1] - mu[2 * i + 1]);
    acc += z1 * z1 + z2 * z2 + 2.0 * (std::log(L[i].a) + std::log(L[i].b)) + 2.0 * kLog2Pi;
  }
  return -0.5 * acc;
}

Lower2 MixtureParams::factor(std::size_t m, std::size_t n) const
{
  const double * p = chol.data() + (m * agents + n) * 3;
  return lower_from_raw(p[0], p[1], p[2]);
}

void MixtureParams::validate() const
{
  if (components == 0 || logits.size() != components || means.size() != components * agents * 2 ||
      chol.size() != components * agents * 3) {
    throw ShapeError(
      "MixtureParams: inconsistent sizes for M=" + std::to_string(components) + ", N=" + std::to_string(agents));
  }
}

double mixture_log_likelihood(const MixtureParams & params, std::span<const double> Y)
{
  params.validate();
  const std::size_t M = params.components, N = params.agents;
  std::vector<double> joint(M);
  std::vector<Lower2> factors(N);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t n = 0; n < N; ++n) factors[n] = params.factor(m, n);
    joint[m] = params.logits[m] + gaussian_log_density(Y, params.mean(m), factors);
  }
  return logsumexp(joint) - logsumexp(params.logits);
}

double entropy_regularizer(std::span<const double> logits)
{
  const std::size_t M = logits.size();
  if (M < 2) return 0.0;
  const double lse = logsumexp(logits);
  double h = 0.0;
  for (double l : logits) {
    const double pi = std::exp(l - lse);
    h -= pi * std::log(pi + kEntropyEps);
  }
  return h / std::log(static_cast<double>(M));
}

double step_loss(const MixtureParams & params, std::span<const double> Y)
{
  return -mixture_log_likelihood(params, Y) - kEntropyWeight * entropy_regularizer(params.logits);
}

std::size_t sample_component(std::span<const double> logits, std::mt19937_64 & rng)
{
  const double lse = logsumexp(logits);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cdf = 0.0;
  for (std::size_t m = 0; m < logits.size(); ++m) {
    cdf += std::exp(logits[m] - lse);
    if (u < cdf) return m;
  }
  return logits.size() - 1;
}

std::vector<double> sample_displacement(const MixtureParams & params, std::mt19937_64 & rng)
{
  params.validate();
  const std::size_t m = sample_component(params.logits, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(params.agents * 2);
  const auto mu = params.mean(m);
  for (std::size_t n = 0; n < params.agents; ++n) {
    const Lower2 L = params.factor(m, n);
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    out[2 * n] = mu[2 * n] + L.a * z1;
    out[2 * n + 1] = mu[2 * n + 1] + L.c * z1 + L.b * z2;
  }
  return out;
}

std::vector<double> sample_component_mean(const MixtureParams & params, std::mt19937_64 & rng)
{
  params.validate();
  const std::size_t m = sample_component(params.logits, rng);
  const auto mu = params.mean(m);
  return {mu.begin(), mu.end()};
}

Tensor mixture_log_likelihood(const Tensor & logits, const Tensor & means, const Tensor & chol, const Tensor & Y)
{
  if (logits.rank() != 2 || Y.rank() != 3 || Y.dim(2) != 2) {
    throw ShapeError(
      "mixture_log_likelihood: logits " + shape_str(logits.shape()) + " / Y " + shape_str(Y.shape()) +
      " must be [R, M] / [R, N, 2]");
  }
  const std::size_t R = logits.dim(0), M = logits.dim(1), N = Y.dim(1);
  if (Y.dim(0) != R || means.shape() != Shape{R, M, N, 2} || chol.shape() != Shape{R, M, N, 3}) {
    throw ShapeError(
      "mixture_log_likelihood: means " + shape_str(means.shape()) + " / chol " + shape_str(chol.shape()) +
      " do not match logits " + shape_str(logits.shape()) + " and Y " + shape_str(Y.shape()));
  }
  const auto lg = logits.data(), mu = means.data(), ch = chol.data(), y = Y.data();
  std::vector<double> out(R);
  // per-(r, m) component log density, kept for backward
  std::vector<double> comp(R * M);
  std::vector<double> joint(M);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t m = 0; m < M; ++m) {
      double acc = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const double * c = ch.data() + ((r * M + m) * N + n) * 3;
        const double * u = mu.data() + ((r * M + m) * N + n) * 2;
        const double * t = y.data() + (r * N + n) * 2;
        const Lower2 L = lower_from_raw(c[0], c[1], c[2]);
        const auto [z1, z2] = whiten(L, t[0] - u[0], t[1] - u[1]);
        acc += -0.5 * (z1 * z1 + z2 * z2) - clamp_log_scale(c[0]) - clamp_log_scale(c[2]) - kLog2Pi;
      }
      comp[r * M + m] = acc;
      joint[m] = lg[r * M + m] + acc;
    }
    out[r] = logsumexp(joint) - logsumexp(lg.subspan(r * M, M));
  }

  return detail::make_result({R}, std::move(out), {logits, means, chol, Y}, [R, M, N, comp = std::move(comp)](Node & self) {
    Node & pl = *self.parents[0];
    Node & pm = *self.parents[1];
    Node & pc = *self.parents[2];
    Node & py = *self.parents[3];
    std::vector<double> w(M), pi(M);
    for (std::size_t r = 0; r < R; ++r) {
      const double g = self.grad[r];
      if (g == 0.0) continue;
      const double * lg = pl.data.data() + r * M;
      // posterior responsibilities w and prior weights pi
      double mw = -INFINITY, mp = -INFINITY;
      for (std::size_t m = 0; m < M; ++m) {
        mw = std::max(mw, lg[m] + comp[r * M + m]);
        mp = std::max(mp, lg[m]);
      }
      double zw = 0.0, zp = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        zw += (w[m] = std::exp(lg[m] + comp[r * M + m] - mw));
        zp += (pi[m] = std::exp(lg[m] - mp));
      }
      for (std::size_t m = 0; m < M; ++m) {
        w[m] /= zw;
        pi[m] /= zp;
      }
      if (pl.requires_grad) {
        auto & gl = pl.ensure_grad();
        for (std::size_t m = 0; m < M; ++m) gl[r * M + m] += g * (w[m] - pi[m]);
      }
      for (std::size_t m = 0; m < M; ++m) {
        const double gm = g * w[m];
        for (std::size_t n = 0; n < N; ++n) {
          const std::size_t ci = ((r * M + m) * N + n) * 3;
          const std::size_t mi = ((r * M + m) * N + n) * 2;
          const double * c = pc.data.data() + ci;
          const double * u = pm.data.data() + mi;
          const double * t = py.data.data() + (r * N + n) * 2;
          const Lower2 L = lower_from_raw(c[0], c[1], c[2]);
          const auto [z1, z2] = whiten(L, t[0] - u[0], t[1] - u[1]);
          // d logN / d residual
          const double dr1 = -(z1 / L.a - z2 * L.c / (L.a * L.b));
          const double dr2 = -z2 / L.b;
          if (pm.requires_grad) {
            auto & gmu = pm.ensure_grad();
            gmu[mi] -= gm * dr1;
            gmu[mi + 1] -= gm * dr2;
          }
          if (py.requires_grad) {
            auto & gy = py.ensure_grad();
            gy[(r * N + n) * 2] += gm * dr1;
            gy[(r * N + n) * 2 + 1] += gm * dr2;
          }
          if (pc.requires_grad) {
            auto & gc = pc.ensure_grad();
            if (inside_clamp(c[0])) gc[ci] += gm * (z1 * z1 - z2 * L.c * z1 / L.b - 1.0);
            gc[ci + 1] += gm * (z1 * z2 / L.b);
            if (inside_clamp(c[2])) gc[ci + 2] += gm * (z2 * z2 - 1.0);
          }
        }
      }
    }
  });
}

Tensor entropy_regularizer(const Tensor & logits)
{
  if (logits.rank() != 2) {
    throw ShapeError("entropy_regularizer: logits must be [R, M], got " + shape_str(logits.shape()));
  }
  const std::size_t M = logits.dim(1);
  if (M < 2) {
    return Tensor::zeros({logits.dim(0)});
  }
  const Tensor pi = softmax_lastdim(logits);
  const Tensor h = sum_lastdim(mul(pi, log(add_scalar(pi, kEntropyEps))));
  return scale(h, -1.0 / std::log(static_cast<double>(M)));
}

Tensor step_loss(const Tensor & logits, const Tensor & means, const Tensor & chol, const Tensor & Y, double entropy_weight)
{
  const Tensor ll = mixture_log_likelihood(logits, means, chol, Y);
  const Tensor ent = entropy_regularizer(logits);
  return mean(scale(add(ll, scale(ent, entropy_weight)), -1.0));
}

}  // namespace ctraj
