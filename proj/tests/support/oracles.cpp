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

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ctraj::testing
{

std::vector<double> random_values(std::size_t n, std::mt19937_64 & rng, double lo, double hi)
{
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto & x : v) x = u(rng);
  return v;
}

Tensor random_tensor(Shape shape, std::mt19937_64 & rng, double lo, double hi, bool requires_grad)
{
  const std::size_t n = shape_numel(shape);
  return Tensor::from_data(std::move(shape), random_values(n, rng, lo, hi), requires_grad);
}

long double dense_mvn_log_density(std::span<const double> y, std::span<const double> mu,
                                  const std::vector<long double> & sigma)
{
  const std::size_t d = y.size();
  if (sigma.size() != d * d) throw std::invalid_argument("sigma size");
  // augmented [sigma | r], Gaussian elimination with partial pivoting
  std::vector<long double> a(d * (d + 1));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) a[i * (d + 1) + j] = sigma[i * d + j];
    a[i * (d + 1) + d] = static_cast<long double>(y[i]) - mu[i];
  }
  long double logdet = 0.0L;
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < d; ++i) {
      if (std::fabs(a[i * (d + 1) + c]) > std::fabs(a[piv * (d + 1) + c])) piv = i;
    }
    if (piv != c) {
      for (std::size_t j = 0; j <= d; ++j) std::swap(a[c * (d + 1) + j], a[piv * (d + 1) + j]);
    }
    const long double p = a[c * (d + 1) + c];
    logdet += std::log(std::fabs(p));
    for (std::size_t i = c + 1; i < d; ++i) {
      const long double f = a[i * (d + 1) + c] / p;
      for (std::size_t j = c; j <= d; ++j) a[i * (d + 1) + j] -= f * a[c * (d + 1) + j];
    }
  }
  std::vector<long double> z(d);
  for (std::size_t i = d; i-- > 0;) {
    long double s = a[i * (d + 1) + d];
    for (std::size_t j = i + 1; j < d; ++j) s -= a[i * (d + 1) + j] * z[j];
    z[i] = s / a[i * (d + 1) + i];
  }
  long double quad = 0.0L;
  for (std::size_t i = 0; i < d; ++i) quad += (static_cast<long double>(y[i]) - mu[i]) * z[i];
  const long double log2pi = std::log(2.0L * std::numbers::pi_v<long double>);
  return -0.5L * (static_cast<long double>(d) * log2pi + logdet + quad);
}

std::vector<long double> block_diagonal_sigma(std::span<const Lower2> factors)
{
  const std::size_t d = 2 * factors.size();
  std::vector<long double> s(d * d, 0.0L);
  for (std::size_t n = 0; n < factors.size(); ++n) {
    const long double a = factors[n].a, c = factors[n].c, b = factors[n].b;
    const std::size_t o = 2 * n;
    // L L^T with L = [[a, 0], [c, b]]
    s[o * d + o] = a * a;
    s[o * d + o + 1] = a * c;
    s[(o + 1) * d + o] = a * c;
    s[(o + 1) * d + o + 1] = c * c + b * b;
  }
  return s;
}

std::vector<double> naive_self_attention(std::span<const double> Q, std::span<const double> K,
                                         std::span<const double> V, std::size_t R, std::size_t N, std::size_t H,
                                         std::size_t dh)
{
  std::vector<double> out(R * N * H * dh, 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  auto idx = [&](std::size_t r, std::size_t n, std::size_t h) { return ((r * N + n) * H + h) * dh; };
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t q = 0; q < N; ++q) {
        std::vector<double> s(N);
        double mx = -1e300;
        for (std::size_t k = 0; k < N; ++k) {
          double dot = 0.0;
          for (std::size_t e = 0; e < dh; ++e) dot += Q[idx(r, q, h) + e] * K[idx(r, k, h) + e];
          s[k] = dot * scale;
          mx = std::max(mx, s[k]);
        }
        double z = 0.0;
        for (auto & v : s) z += (v = std::exp(v - mx));
        for (std::size_t k = 0; k < N; ++k) {
          for (std::size_t e = 0; e < dh; ++e) out[idx(r, q, h) + e] += s[k] / z * V[idx(r, k, h) + e];
        }
      }
    }
  }
  return out;
}

std::vector<double> naive_pair_attention(std::span<const double> Q, std::span<const double> K,
                                         std::span<const double> V, std::size_t R, std::size_t N, std::size_t H,
                                         std::size_t dh)
{
  std::vector<double> out(R * N * H * dh, 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  auto qi = [&](std::size_t r, std::size_t n, std::size_t h) { return ((r * N + n) * H + h) * dh; };
  auto ki = [&](std::size_t r, std::size_t q, std::size_t k, std::size_t h) {
    return (((r * N + q) * N + k) * H + h) * dh;
  };
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t q = 0; q < N; ++q) {
        std::vector<double> s(N);
        double mx = -1e300;
        for (std::size_t k = 0; k < N; ++k) {
          double dot = 0.0;
          for (std::size_t e = 0; e < dh; ++e) dot += Q[qi(r, q, h) + e] * K[ki(r, q, k, h) + e];
          s[k] = dot * scale;
          mx = std::max(mx, s[k]);
        }
        double z = 0.0;
        for (auto & v : s) z += (v = std::exp(v - mx));
        for (std::size_t k = 0; k < N; ++k) {
          for (std::size_t e = 0; e < dh; ++e) out[qi(r, q, h) + e] += s[k] / z * V[ki(r, q, k, h) + e];
        }
      }
    }
  }
  return out;
}

std::vector<double> naive_max_pool(std::span<const double> x, std::size_t rows, std::size_t T, std::size_t C,
                                   std::size_t window, double pad)
{
  std::vector<double> out(rows * T * C);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t w = window == 0 ? T : window;
        double best = t + 1 < w ? pad : -1e308;
        for (std::size_t s = (t + 1 >= w ? t + 1 - w : 0); s <= t; ++s) best = std::max(best, x[(r * T + s) * C + c]);
        out[(r * T + t) * C + c] = best;
      }
    }
  }
  return out;
}

std::vector<double> naive_ssm_scan(std::span<const double> x, std::span<const double> dt, std::span<const double> rate,
                                   std::span<const double> B, std::span<const double> C, std::span<const double> D,
                                   std::size_t R, std::size_t L, std::size_t H, std::size_t P, std::size_t S)
{
  std::vector<double> y(R * L * H * P, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<double> h(H * P * S, 0.0);
    for (std::size_t t = 0; t < L; ++t) {
      for (std::size_t k = 0; k < H; ++k) {
        const double step = dt[(r * L + t) * H + k];
        const double decay = std::exp(-step * rate[k]);
        for (std::size_t p = 0; p < P; ++p) {
          const double xv = x[((r * L + t) * H + k) * P + p];
          double acc = 0.0;
          for (std::size_t s = 0; s < S; ++s) {
            double & st = h[(k * P + p) * S + s];
            st = decay * st + step * xv * B[(r * L + t) * S + s];
            acc += st * C[(r * L + t) * S + s];
          }
          y[((r * L + t) * H + k) * P + p] = acc + D[k] * xv;
        }
      }
    }
  }
  return y;
}

std::vector<double> naive_causal_conv(std::span<const double> x, std::span<const double> w, std::size_t R,
                                      std::size_t L, std::size_t C, std::size_t K)
{
  std::vector<double> y(R * L * C, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t t = 0; t < L; ++t) {
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
          const long src = static_cast<long>(t) - static_cast<long>(K) + 1 + static_cast<long>(j);
          if (src >= 0) acc += w[c * K + j] * x[(r * L + static_cast<std::size_t>(src)) * C + c];
        }
        y[(r * L + t) * C + c] = acc;
      }
    }
  }
  return y;
}

std::vector<double> naive_linear(std::span<const double> x, std::span<const double> W, std::span<const double> b,
                                 std::size_t rows, std::size_t in, std::size_t out)
{
  std::vector<double> y(rows * out, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b.empty() ? 0.0 : b[o];
      for (std::size_t i = 0; i < in; ++i) acc += x[r * in + i] * W[i * out + o];
      y[r * out + o] = acc;
    }
  }
  return y;
}

}  // namespace ctraj::testing
