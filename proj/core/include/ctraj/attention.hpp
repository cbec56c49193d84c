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

#ifndef CTRAJ__ATTENTION_HPP_
#define CTRAJ__ATTENTION_HPP_

#include "ctraj/tensor.hpp"

namespace ctraj
{

/// Multi-head scaled dot-product attention over the agent axis.
/// Q, K, V: [R, N, H, dh] -> [R, N, H, dh]. Scale is 1/sqrt(dh).
Tensor self_attention(const Tensor & Q, const Tensor & K, const Tensor & V);

/// Attention where every query owns its own key/value row.
/// Q: [R, N, H, dh]; K, V: [R, N(query), N(key), H, dh] -> [R, N, H, dh].
Tensor pair_attention(const Tensor & Q, const Tensor & K, const Tensor & V);

/// Pairwise mesh. Z: [R, N, d], X: [R, N, c] -> [R, N, N, c + 2d] with
/// entry [q, k] = [X_q - X_k ; Z_q ; Z_k].
Tensor build_mesh(const Tensor & Z, const Tensor & X);

}  // namespace ctraj

#endif  // CTRAJ__ATTENTION_HPP_
