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

#include "ctraj/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ctraj/error.hpp"

namespace ctraj
{

using detail::Node;

void ssm_scan_step(
  std::size_t H, std::size_t P, std::size_t S, const double * x_t, const double * dt_t, const double * rate,
  const double * B_t, const double * C_t, const double * D, double * state, double * y_t)
{
  for (std::size_t h = 0; h < H; ++h) {
    const double decay = std::exp(-dt_t[h] * rate[h]);
    for (std::size_t p = 0; p < P; ++p) {
      const double u = dt_t[h] * x_t[h * P + p];
      double * st = state + (h * P + p) * S;
      double acc = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        st[s] = decay * st[s] + u * B_t[s];
        acc += st[s] * C_t[s];
      }
      y_t[h * P + p] = acc + D[h] * x_t[h * P + p];
    }
  }
}

void ssm_scan_sequential(const ScanDims & dims, const ScanInputs & in, std::span<double> y)
{
  const auto [R, L, H, P, S] = dims;
  std::vector<double> state(H * P * S);
  for (std::size_t r = 0; r < R; ++r) {
    std::fill(state.begin(), state.end(), 0.0);
    for (std::size_t t = 0; t < L; ++t) {
      const std::size_t rt = r * L + t;
      ssm_scan_step(
        H, P, S, in.x.data() + rt * H * P, in.dt.data() + rt * H, in.rate.data(), in.B.data() + rt * S,
        in.C.data() + rt * S, in.D.data(), state.data(), y.data() + rt * H * P);
    }
  }
}

void ssm_scan_chunked(const ScanDims & dims, const ScanInputs & in, std::size_t chunk, std::span<double> y)
{
  if (chunk == 0) {
    throw ShapeError("ssm_scan_chunked: chunk size must be positive");
  }
  const auto [R, L, H, P, S] = dims;
  std::vector<double> state(H * P * S);
  std::vector<double> cb(chunk * chunk);
  std::vector<double> cum(chunk);
  std::vector<double> w(chunk);
  for (std::size_t r = 0; r < R; ++r) {
    std::fill(state.begin(), state.end(), 0.0);
    for (std::size_t t0 = 0; t0 < L; t0 += chunk) {
      const std::size_t len = std::min(chunk, L - t0);
      const double * Bc = in.B.data() + (r * L + t0) * S;
      const double * Cc = in.C.data() + (r * L + t0) * S;
      for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          double dot = 0.0;
          for (std::size_t s = 0; s < S; ++s) dot += Cc[i * S + s] * Bc[j * S + s];
          cb[i * chunk + j] = dot;
        }
      }
      for (std::size_t h = 0; h < H; ++h) {
        double acc = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
          acc -= in.dt[(r * L + t0 + i) * H + h] * in.rate[h];
          cum[i] = acc;
        }
        for (std::size_t i = 0; i < len; ++i) {
          const std::size_t rt = r * L + t0 + i;
          for (std::size_t j = 0; j <= i; ++j) {
            w[j] = std::exp(cum[i] - cum[j]) * cb[i * chunk + j] * in.dt[(r * L + t0 + j) * H + h];
          }
          const double carry = std::exp(cum[i]);
          for (std::size_t p = 0; p < P; ++p) {
            double out = 0.0;
            for (std::size_t j = 0; j <= i; ++j) out += w[j] * in.x[((r * L + t0 + j) * H + h) * P + p];
            const double * st = state.data() + (h * P + p) * S;
            double from_state = 0.0;
            for (std::size_t s = 0; s < S; ++s) from_state += Cc[i * S + s] * st[s];
            y[rt * H * P + h * P + p] = out + carry * from_state + in.D[h] * in.x[(rt * H + h) * P + p];
          }
        }
        // pass the state to the next chunk
        const double end_decay = std::exp(cum[len - 1]);
        for (std::size_t p = 0; p < P; ++p) {
          double * st = state.data() + (h * P + p) * S;
          for (std::size_t s = 0; s < S; ++s) st[s] *= end_decay;
          for (std::size_t j = 0; j < len; ++j) {
            const std::size_t rj = r * L + t0 + j;
            const double u = std::exp(cum[len - 1] - cum[j]) * in.dt[rj * H + h] * in.x[(rj * H + h) * P + p];
            for (std::size_t s = 0; s < S; ++s) st[s] += u * Bc[j * S + s];
          }
        }
      }
    }
  }
}

Tensor ssm_scan(
  const Tensor & x, const Tensor & dt, const Tensor & rate, const Tensor & B, const Tensor & C, const Tensor & D,
  std::size_t chunk)
{
  if (x.rank() != 4) {
    throw ShapeError("ssm_scan: x must be [R, L, H, P], got " + shape_str(x.shape()));
  }
  const ScanDims dims{x.dim(0), x.dim(1), x.dim(2), x.dim(3), B.rank() == 3 ? B.dim(2) : 0};
  const auto [R, L, H, P, S] = dims;
  if (dt.shape() != Shape{R, L, H} || rate.shape() != Shape{H} || D.shape() != Shape{H} ||
      B.shape() != Shape{R, L, S} || C.shape() != Shape{R, L, S}) {
    throw ShapeError(
      "ssm_scan: inconsistent shapes x " + shape_str(x.shape()) + ", dt " + shape_str(dt.shape()) + ", rate " +
      shape_str(rate.shape()) + ", B " + shape_str(B.shape()) + ", C " + shape_str(C.shape()) + ", D " +
      shape_str(D.shape()));
  }
  std::vector<double> y(x.numel());
  const ScanInputs in{x.data(), dt.data(), rate.data(), B.data(), C.data(), D.data()};
  if (chunk == 0) {
    ssm_scan_sequential(dims, in, y);
  } else {
    ssm_scan_chunked(dims, in, chunk, y);
  }

  return detail::make_result(x.shape(), std::move(y), {x, dt, rate, B, C, D}, [dims](Node & self) {
    const auto [R, L, H, P, S] = dims;
    Node & px = *self.parents[0];
    Node & pdt = *self.parents[1];
    Node & prate = *self.parents[2];
    Node & pB = *self.parents[3];
    Node & pC = *self.parents[4];
    Node & pD = *self.parents[5];
    std::vector<double> gx(px.data.size(), 0.0), gdt(pdt.data.size(), 0.0), grate(H, 0.0);
    std::vector<double> gB(pB.data.size(), 0.0), gC(pC.data.size(), 0.0), gD(H, 0.0);

    const std::size_t state_size = H * P * S;
    // states[t] holds state after step t; index L is the zero initial state
    std::vector<double> states((L + 1) * state_size);
    std::vector<double> adj(state_size);
    for (std::size_t r = 0; r < R; ++r) {
      double * init = states.data() + L * state_size;
      std::fill(init, init + state_size, 0.0);
      for (std::size_t t = 0; t < L; ++t) {
        const std::size_t rt = r * L + t;
        const double * prev = t == 0 ? init : states.data() + (t - 1) * state_size;
        double * cur = states.data() + t * state_size;
        for (std::size_t h = 0; h < H; ++h) {
          const double decay = std::exp(-pdt.data[rt * H + h] * prate.data[h]);
          for (std::size_t p = 0; p < P; ++p) {
            const double u = pdt.data[rt * H + h] * px.data[(rt * H + h) * P + p];
            const std::size_t o = (h * P + p) * S;
            for (std::size_t s = 0; s < S; ++s) cur[o + s] = decay * prev[o + s] + u * pB.data[rt * S + s];
          }
        }
      }

      std::fill(adj.begin(), adj.end(), 0.0);
      for (std::size_t t = L; t-- > 0;) {
        const std::size_t rt = r * L + t;
        const double * cur = states.data() + t * state_size;
        const double * prev = t == 0 ? init : states.data() + (t - 1) * state_size;
        const double * dy = self.grad.data() + rt * H * P;
        const double * Bt = pB.data.data() + rt * S;
        const double * Ct = pC.data.data() + rt * S;
        // adj currently holds decay_{t+1} * adj_{t+1}; add the output path
        for (std::size_t h = 0; h < H; ++h) {
          for (std::size_t p = 0; p < P; ++p) {
            const double g = dy[h * P + p];
            const std::size_t o = (h * P + p) * S;
            for (std::size_t s = 0; s < S; ++s) {
              adj[o + s] += g * Ct[s];
              gC[rt * S + s] += g * cur[o + s];
            }
            gD[h] += g * px.data[(rt * H + h) * P + p];
            gx[(rt * H + h) * P + p] += g * pD.data[h];
          }
        }
        for (std::size_t h = 0; h < H; ++h) {
          const double dt_v = pdt.data[rt * H + h];
          const double a = prate.data[h];
          const double decay = std::exp(-dt_v * a);
          double g_dt = 0.0, g_rate = 0.0;
          for (std::size_t p = 0; p < P; ++p) {
            const double xv = px.data[(rt * H + h) * P + p];
            const std::size_t o = (h * P + p) * S;
            double g_u = 0.0, g_prev_decay = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
              g_u += adj[o + s] * Bt[s];
              g_prev_decay += adj[o + s] * prev[o + s];
              gB[rt * S + s] += adj[o + s] * dt_v * xv;
            }
            gx[(rt * H + h) * P + p] += g_u * dt_v;
            g_dt += g_u * xv - a * decay * g_prev_decay;
            g_rate += -dt_v * decay * g_prev_decay;
            // carry adjoint to step t-1
            for (std::size_t s = 0; s < S; ++s) adj[o + s] *= decay;
          }
          gdt[rt * H + h] += g_dt;
          grate[h] += g_rate;
        }
      }
    }

    auto flush = [](Node & p, const std::vector<double> & g) {
      if (!p.requires_grad) return;
      auto & dst = p.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    };
    flush(px, gx);
    flush(pdt, gdt);
    flush(prate, grate);
    flush(pB, gB);
    flush(pC, gC);
    flush(pD, gD);
  });
}

Tensor causal_conv1d(const Tensor & x, const Tensor & w)
{
  if (x.rank() != 3 || w.rank() != 2 || w.dim(0) != x.dim(2)) {
    throw ShapeError("causal_conv1d: x " + shape_str(x.shape()) + " incompatible with kernel " + shape_str(w.shape()));
  }
  const std::size_t R = x.dim(0), L = x.dim(1), C = x.dim(2), K = w.dim(1);
  std::vector<double> y(x.numel(), 0.0);
  const auto xd = x.data(), wd = w.data();
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t t = 0; t < L; ++t) {
      double * yt = y.data() + (r * L + t) * C;
      for (std::size_t j = 0; j < K; ++j) {
        if (t + j + 1 < K) continue;
        const std::size_t src = t + j + 1 - K;
        const double * xs = xd.data() + (r * L + src) * C;
        for (std::size_t c = 0; c < C; ++c) yt[c] += wd[c * K + j] * xs[c];
      }
    }
  }
  return detail::make_result(x.shape(), std::move(y), {x, w}, [R, L, C, K](Node & self) {
    Node & px = *self.parents[0];
    Node & pw = *self.parents[1];
    std::vector<double> & gx = px.requires_grad ? px.ensure_grad() : px.grad;
    std::vector<double> & gw = pw.requires_grad ? pw.ensure_grad() : pw.grad;
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t t = 0; t < L; ++t) {
        const double * gy = self.grad.data() + (r * L + t) * C;
        for (std::size_t j = 0; j < K; ++j) {
          if (t + j + 1 < K) continue;
          const std::size_t src = (r * L + t + j + 1 - K) * C;
          for (std::size_t c = 0; c < C; ++c) {
            if (px.requires_grad) gx[src + c] += pw.data[c * K + j] * gy[c];
            if (pw.requires_grad) gw[c * K + j] += px.data[src + c] * gy[c];
          }
        }
      }
    }
  });
}

}  // namespace ctraj
