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

#include "ctraj/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctraj/error.hpp"

namespace ctraj
{

namespace
{

double eval_finite(const std::function<Tensor()> & f, std::size_t tensor, std::size_t index)
{
  const double v = f().item();
  if (!std::isfinite(v)) {
    throw NumericError(
      "grad_check: objective is non-finite when perturbing tensor " + std::to_string(tensor) + ", coordinate " +
      std::to_string(index));
  }
  return v;
}

}  // namespace

GradCheckReport grad_check(
  const std::function<Tensor()> & f, std::vector<Tensor> params, double step, std::size_t max_coords_per_tensor)
{
  for (auto & p : params) p.zero_grad();
  const Tensor out = f();
  if (!std::isfinite(out.item())) {
    throw NumericError("grad_check: objective is non-finite at the base point");
  }
  out.backward();
  std::vector<std::vector<double>> analytic;
  for (auto & p : params) {
    const auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].mutable_data();
    std::size_t stride = 1;
    if (max_coords_per_tensor != 0 && values.size() > max_coords_per_tensor) {
      stride = values.size() / max_coords_per_tensor;
    }
    for (std::size_t i = 0; i < values.size(); i += stride) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = eval_finite(f, k, i);
      values[i] = saved - step;
      const double down = eval_finite(f, k, i);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = std::abs(analytic[k][i] - numeric) / std::max(1.0, std::abs(numeric));
      ++report.coordinates;
      if (err > report.max_rel_error || report.coordinates == 1) {
        report.max_rel_error = std::max(err, report.max_rel_error);
        report.worst_tensor = k;
        report.worst_index = i;
        report.analytic = analytic[k][i];
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace ctraj
