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

#include "ctraj/attention.hpp"

#include <algorithm>
#include <cmath>

#include "ctraj/error.hpp"

namespace ctraj
{

using detail::Node;

namespace
{

struct Dims
{
  std::size_t R, N, H, dh;
};

Dims query_dims(const Tensor & Q, const char * op)
{
  if (Q.rank() != 4) {
    throw ShapeError(std::string(op) + ": query must be [R, N, H, dh], got " + shape_str(Q.shape()));
  }
  return {Q.dim(0), Q.dim(1), Q.dim(2), Q.dim(3)};
}

}  // namespace

Tensor self_attention(const Tensor & Q, const Tensor & K, const Tensor & V)
{
  const Dims s = query_dims(Q, "self_attention");
  if (K.shape() != Q.shape() || V.shape() != Q.shape()) {
    throw ShapeError(
      "self_attention: Q " + shape_str(Q.shape()) + ", K " + shape_str(K.shape()) + ", V " + shape_str(V.shape()));
  }
  const double scl = 1.0 / std::sqrt(static_cast<double>(s.dh));
  const std::size_t N = s.N, H = s.H, dh = s.dh;
  const auto q = Q.data(), k = K.data(), v = V.data();
  std::vector<double> out(Q.numel(), 0.0);
  // alpha[r, h, i, j]
  std::vector<double> alpha(s.R * H * N * N);
  std::vector<double> row(N);
  for (std::size_t r = 0; r < s.R; ++r) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < N; ++i) {
        const double * qi = q.data() + ((r * N + i) * H + h) * dh;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < N; ++j) {
          const double * kj = k.data() + ((r * N + j) * H + h) * dh;
          double dot = 0.0;
          for (std::size_t c = 0; c < dh; ++c) dot += qi[c] * kj[c];
          row[j] = dot * scl;
          mx = std::max(mx, row[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < N; ++j) z += (row[j] = std::exp(row[j] - mx));
        double * a = alpha.data() + ((r * H + h) * N + i) * N;
        double * oi = out.data() + ((r * N + i) * H + h) * dh;
        for (std::size_t j = 0; j < N; ++j) {
          a[j] = row[j] / z;
          const double * vj = v.data() + ((r * N + j) * H + h) * dh;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += a[j] * vj[c];
        }
      }
    }
  }
  return detail::make_result(Q.shape(), std::move(out), {Q, K, V}, [s, scl, alpha = std::move(alpha)](Node & self) {
    const std::size_t N = s.N, H = s.H, dh = s.dh;
    Node & pq = *self.parents[0];
    Node & pk = *self.parents[1];
    Node & pv = *self.parents[2];
    std::vector<double> & gq = pq.requires_grad ? pq.ensure_grad() : pq.grad;
    std::vector<double> & gk = pk.requires_grad ? pk.ensure_grad() : pk.grad;
    std::vector<double> & gv = pv.requires_grad ? pv.ensure_grad() : pv.grad;
    std::vector<double> ds(N);
    for (std::size_t r = 0; r < s.R; ++r) {
      for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t i = 0; i < N; ++i) {
          const double * a = alpha.data() + ((r * H + h) * N + i) * N;
          const std::size_t qi = ((r * N + i) * H + h) * dh;
          const double * doi = self.grad.data() + qi;
          double dot = 0.0;
          for (std::size_t j = 0; j < N; ++j) {
            const std::size_t vj = ((r * N + j) * H + h) * dh;
            double da = 0.0;
            for (std::size_t c = 0; c < dh; ++c) {
              da += doi[c] * pv.data[vj + c];
              if (pv.requires_grad) gv[vj + c] += a[j] * doi[c];
            }
            ds[j] = da;
            dot += a[j] * da;
          }
          for (std::size_t j = 0; j < N; ++j) {
            const double g = a[j] * (ds[j] - dot) * scl;
            const std::size_t kj = ((r * N + j) * H + h) * dh;
            for (std::size_t c = 0; c < dh; ++c) {
              if (pq.requires_grad) gq[qi + c] += g * pk.data[kj + c];
              if (pk.requires_grad) gk[kj + c] += g * pq.data[qi + c];
            }
          }
        }
      }
    }
  });
}

Tensor pair_attention(const Tensor & Q, const Tensor & K, const Tensor & V)
{
  const Dims s = query_dims(Q, "pair_attention");
  const Shape kv_shape{s.R, s.N, s.N, s.H, s.dh};
  if (K.shape() != kv_shape || V.shape() != kv_shape) {
    throw ShapeError(
      "pair_attention: Q " + shape_str(Q.shape()) + " needs K/V " + shape_str(kv_shape) + ", got " +
      shape_str(K.shape()) + " / " + shape_str(V.shape()));
  }
  const double scl = 1.0 / std::sqrt(static_cast<double>(s.dh));
  const std::size_t N = s.N, H = s.H, dh = s.dh;
  const auto q = Q.data(), k = K.data(), v = V.data();
  std::vector<double> out(Q.numel(), 0.0);
  std::vector<double> alpha(s.R * H * N * N);
  std::vector<double> row(N);
  // K/V index of (r, i, j, h)
  auto kv_at = [N, H, dh](std::size_t r, std::size_t i, std::size_t j, std::size_t h) {
    return (((r * N + i) * N + j) * H + h) * dh;
  };
  for (std::size_t r = 0; r < s.R; ++r) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < N; ++i) {
        const double * qi = q.data() + ((r * N + i) * H + h) * dh;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < N; ++j) {
          const double * kij = k.data() + kv_at(r, i, j, h);
          double dot = 0.0;
          for (std::size_t c = 0; c < dh; ++c) dot += qi[c] * kij[c];
          row[j] = dot * scl;
          mx = std::max(mx, row[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < N; ++j) z += (row[j] = std::exp(row[j] - mx));
        double * a = alpha.data() + ((r * H + h) * N + i) * N;
        double * oi = out.data() + ((r * N + i) * H + h) * dh;
        for (std::size_t j = 0; j < N; ++j) {
          a[j] = row[j] / z;
          const double * vij = v.data() + kv_at(r, i, j, h);
          for (std::size_t c = 0; c < dh; ++c) oi[c] += a[j] * vij[c];
        }
      }
    }
  }
  return detail::make_result(
    Q.shape(), std::move(out), {Q, K, V}, [s, scl, kv_at, alpha = std::move(alpha)](Node & self) {
      const std::size_t N = s.N, H = s.H, dh = s.dh;
      Node & pq = *self.parents[0];
      Node & pk = *self.parents[1];
      Node & pv = *self.parents[2];
      std::vector<double> & gq = pq.requires_grad ? pq.ensure_grad() : pq.grad;
      std::vector<double> & gk = pk.requires_grad ? pk.ensure_grad() : pk.grad;
      std::vector<double> & gv = pv.requires_grad ? pv.ensure_grad() : pv.grad;
      std::vector<double> ds(N);
      for (std::size_t r = 0; r < s.R; ++r) {
        for (std::size_t h = 0; h < H; ++h) {
          for (std::size_t i = 0; i < N; ++i) {
            const double * a = alpha.data() + ((r * H + h) * N + i) * N;
            const std::size_t qi = ((r * N + i) * H + h) * dh;
            const double * doi = self.grad.data() + qi;
            double dot = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
              const std::size_t vij = kv_at(r, i, j, h);
              double da = 0.0;
              for (std::size_t c = 0; c < dh; ++c) {
                da += doi[c] * pv.data[vij + c];
                if (pv.requires_grad) gv[vij + c] += a[j] * doi[c];
              }
              ds[j] = da;
              dot += a[j] * da;
            }
            for (std::size_t j = 0; j < N; ++j) {
              const double g = a[j] * (ds[j] - dot) * scl;
              const std::size_t kij = kv_at(r, i, j, h);
              for (std::size_t c = 0; c < dh; ++c) {
                if (pq.requires_grad) gq[qi + c] += g * pk.data[kij + c];
                if (pk.requires_grad) gk[kij + c] += g * pq.data[qi + c];
              }
            }
          }
        }
      }
    });
}

Tensor build_mesh(const Tensor & Z, const Tensor & X)
{
  if (Z.rank() != 3 || X.rank() != 3 || Z.dim(0) != X.dim(0) || Z.dim(1) != X.dim(1)) {
    throw ShapeError("build_mesh: Z " + shape_str(Z.shape()) + " and X " + shape_str(X.shape()) + " must be [R, N, *]");
  }
  const std::size_t R = Z.dim(0), N = Z.dim(1), d = Z.dim(2), c = X.dim(2);
  const std::size_t w = c + 2 * d;
  std::vector<double> out(R * N * N * w);
  const auto z = Z.data(), x = X.data();
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        double * e = out.data() + ((r * N + i) * N + j) * w;
        const double * xi = x.data() + (r * N + i) * c;
        const double * xj = x.data() + (r * N + j) * c;
        for (std::size_t u = 0; u < c; ++u) e[u] = xi[u] - xj[u];
        std::copy_n(z.data() + (r * N + i) * d, d, e + c);
        std::copy_n(z.data() + (r * N + j) * d, d, e + c + d);
      }
    }
  }
  return detail::make_result({R, N, N, w}, std::move(out), {Z, X}, [R, N, d, c, w](Node & self) {
    Node & pz = *self.parents[0];
    Node & px = *self.parents[1];
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
          const double * g = self.grad.data() + ((r * N + i) * N + j) * w;
          if (px.requires_grad) {
            auto & gx = px.ensure_grad();
            for (std::size_t u = 0; u < c; ++u) {
              gx[(r * N + i) * c + u] += g[u];
              gx[(r * N + j) * c + u] -= g[u];
            }
          }
          if (pz.requires_grad) {
            auto & gz = pz.ensure_grad();
            for (std::size_t u = 0; u < d; ++u) {
              gz[(r * N + i) * d + u] += g[c + u];
              gz[(r * N + j) * d + u] += g[c + d + u];
            }
          }
        }
      }
    }
  });
}

}  // namespace ctraj
