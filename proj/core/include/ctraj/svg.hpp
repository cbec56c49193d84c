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

#ifndef CTRAJ__SVG_HPP_
#define CTRAJ__SVG_HPP_

#include <cstddef>
#include <span>
#include <string>

#include "ctraj/model.hpp"

namespace ctraj
{

struct SvgStyle
{
  double pixels_per_unit{10.0};
  double margin{20.0};
  double court_length{94.0};
  double court_width{50.0};
};

/**
 * One scenario on the court. `prediction` and `groundtruth` are [N, F, 2];
 * `groundtruth` may be empty. Each agent becomes one polyline of exactly F
 * points coloured by category; ground truth is drawn dashed underneath.
 */
std::string render_scenario_svg(std::span<const double> prediction, std::span<const double> groundtruth,
                                std::span<const AgentCategory> categories, std::size_t frames,
                                const std::string & title = {}, const SvgStyle & style = {});

}  // namespace ctraj

#endif  // CTRAJ__SVG_HPP_
