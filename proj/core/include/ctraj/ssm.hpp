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

#ifndef CTRAJ__SSM_HPP_
#define CTRAJ__SSM_HPP_

#include <cstddef>
#include <span>

#include "ctraj/tensor.hpp"

namespace ctraj
{

// Sizes of a selective scan: R sequences of length L, H heads of width P, state size S.
struct ScanDims
{
  std::size_t R, L, H, P, S;
};

// Borrowed scan inputs, laid out row-major:
//   x [R, L, H, P], dt [R, L, H] (positive step sizes), rate [H] (positive decay rates),
//   B [R, L, S], C [R, L, S], D [H].
struct ScanInputs
{
  std::span<const double> x, dt, rate, B, C, D;
};

// Reference recurrence, per head h:
//   state_t = exp(-dt_t * rate_h) * state_{t-1} + dt_t * (x_t outer B_t)
//   y_t     = state_t C_t + D_h * x_t
void ssm_scan_sequential(const ScanDims & dims, const ScanInputs & in, std::span<double> y);

// Same result via chunk-local quadratic form plus inter-chunk state passing.
void ssm_scan_chunked(const ScanDims & dims, const ScanInputs & in, std::size_t chunk, std::span<double> y);

// One timestep of one sequence; `state` is [H, P, S] and is updated in place.
void ssm_scan_step(
  std::size_t H, std::size_t P, std::size_t S, const double * x_t, const double * dt_t, const double * rate,
  const double * B_t, const double * C_t, const double * D, double * state, double * y_t);

// Differentiable scan. chunk == 0 runs the sequential recurrence forward,
// otherwise the chunked form. Backward always recomputes states sequentially.
Tensor ssm_scan(
  const Tensor & x, const Tensor & dt, const Tensor & rate, const Tensor & B, const Tensor & C, const Tensor & D,
  std::size_t chunk = 0);

// Depthwise causal convolution. x [R, L, C], w [C, K]:
//   y[r, t, c] = sum_j w[c, j] * x[r, t - K + 1 + j, c], zero before t = 0.
Tensor causal_conv1d(const Tensor & x, const Tensor & w);

}  // namespace ctraj

#endif  // CTRAJ__SSM_HPP_
