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

#ifndef CTRAJ__METRICS_HPP_
#define CTRAJ__METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ctraj/kv.hpp"

namespace ctraj
{

/// Ground truth [N, F, 2] and k sampled scenarios [k, N, F, 2], row-major.
struct EvalCase
{
  std::size_t agents{0};
  std::size_t frames{0};
  std::size_t samples{0};
  std::vector<double> groundtruth;
  std::vector<double> predictions;

  static EvalCase make(std::size_t agents, std::size_t frames, std::vector<double> groundtruth,
                       std::vector<double> predictions);
  void validate() const;
  // Appends one scenario [N, F, 2].
  void add_sample(std::span<const double> scenario);
};

double min_ade(const EvalCase & c);
double min_fde(const EvalCase & c);
double min_jade(const EvalCase & c);
double min_jfde(const EvalCase & c);
double average_jade(const EvalCase & c);

// First `frames` future frames of both ground truth and samples.
EvalCase horizon_slice(const EvalCase & c, std::size_t frames);

double scale_units(double value, double factor);

constexpr double kCourtUnitScale = 28.0 / 94.0;

struct MetricSet
{
  double min_ade{0}, min_fde{0}, min_jade{0}, min_jfde{0}, average_jade{0};

  MetricSet scaled(double factor) const;
};

MetricSet evaluate(const EvalCase & c);
// Mean of every metric over cases.
MetricSet evaluate_mean(std::span<const EvalCase> cases);

struct HorizonRow
{
  std::size_t frames{0};
  MetricSet metrics;
};

// One row per horizon (frames); all cases are sliced to each horizon.
std::vector<HorizonRow> evaluate_horizons(std::span<const EvalCase> cases, std::span<const std::size_t> horizons);

KeyValues metric_report_items(std::span<const HorizonRow> rows, double scale);
std::string metric_report_csv(std::span<const HorizonRow> rows);

}  // namespace ctraj

#endif  // CTRAJ__METRICS_HPP_
