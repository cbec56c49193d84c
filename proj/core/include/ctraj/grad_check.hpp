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

#ifndef CTRAJ__GRAD_CHECK_HPP_
#define CTRAJ__GRAD_CHECK_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "ctraj/tensor.hpp"

namespace ctraj
{

struct GradCheckReport
{
  double max_rel_error{0.0};
  std::size_t worst_tensor{0};
  std::size_t worst_index{0};
  double analytic{0.0};
  double numeric{0.0};
  std::size_t coordinates{0};
};

/**
 * @brief Compares reverse-mode gradients against central finite differences.
 *
 * `f` must rebuild its graph from the current values of `params` on every call
 * and return a scalar. The relative error of a coordinate is
 * |analytic - numeric| / max(1, |numeric|). When `max_coords_per_tensor` is
 * non-zero, an evenly strided subset of each tensor's coordinates is checked.
 *
 * Throws NumericError naming the coordinate if `f` turns non-finite.
 */
GradCheckReport grad_check(
  const std::function<Tensor()> & f, std::vector<Tensor> params, double step = 1e-5,
  std::size_t max_coords_per_tensor = 0);

inline double grad_check(const std::function<Tensor()> & f, Tensor theta, double step = 1e-5)
{
  return grad_check(f, std::vector<Tensor>{std::move(theta)}, step).max_rel_error;
}

}  // namespace ctraj

#endif  // CTRAJ__GRAD_CHECK_HPP_
