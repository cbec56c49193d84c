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

#ifndef CTRAJ__OPS_HPP_
#define CTRAJ__OPS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "ctraj/tensor.hpp"

// Differentiable primitives. Shapes must match exactly unless an op says
// otherwise; the only broadcasting is over leading (batch) dimensions.
namespace ctraj
{

// Elementwise, identical shapes.
Tensor add(const Tensor & a, const Tensor & b);
Tensor sub(const Tensor & a, const Tensor & b);
Tensor mul(const Tensor & a, const Tensor & b);
Tensor maximum(const Tensor & a, const Tensor & b);

Tensor scale(const Tensor & x, double factor);
Tensor add_scalar(const Tensor & x, double value);

// x[..., d] + b[d]
Tensor add_lastdim(const Tensor & x, const Tensor & b);
// x[..., d] * g[d]
Tensor mul_lastdim(const Tensor & x, const Tensor & g);

Tensor exp(const Tensor & x);
Tensor log(const Tensor & x);
Tensor gelu(const Tensor & x);  // erf form
Tensor silu(const Tensor & x);
Tensor softplus(const Tensor & x);
Tensor clamp(const Tensor & x, double lo, double hi);

Tensor sum(const Tensor & x);   // -> scalar
Tensor mean(const Tensor & x);  // -> scalar
Tensor sum_lastdim(const Tensor & x);

// y = x W + b along the trailing dim. `b` may be undefined (no bias).
Tensor linear(const Tensor & x, const Tensor & W, const Tensor & b = {});

Tensor reshape(const Tensor & x, Shape shape);
Tensor permute(const Tensor & x, const std::vector<std::size_t> & perm);
Tensor concat_lastdim(const std::vector<Tensor> & parts);
Tensor slice_lastdim(const Tensor & x, std::size_t begin, std::size_t length);
// out[i, :] = table[indices[i], :]
Tensor gather_rows(const Tensor & table, std::span<const std::size_t> indices);

Tensor softmax_lastdim(const Tensor & x);
Tensor logsumexp_lastdim(const Tensor & x);

Tensor layer_norm(const Tensor & x, const Tensor & gain, const Tensor & bias, double eps = 1e-5);
Tensor rms_norm(const Tensor & x, const Tensor & gain, double eps = 1e-5);

constexpr double kPoolPad = -1e30;

// x[..., T, d] -> [..., T, d]; out[t] = channelwise max over x[t-window+1 .. t],
// positions before 0 read as pad_value; window 0 pools the full prefix. Ties send the
// gradient to the lowest index.
Tensor max_pool_window(const Tensor & x, std::size_t window, double pad_value = kPoolPad);

}  // namespace ctraj

#endif  // CTRAJ__OPS_HPP_
