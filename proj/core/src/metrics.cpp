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

#include "ctraj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ctraj/error.hpp"

namespace ctraj
{

EvalCase EvalCase::make(
  std::size_t agents, std::size_t frames, std::vector<double> groundtruth, std::vector<double> predictions)
{
  EvalCase c;
  c.agents = agents;
  c.frames = frames;
  const std::size_t per = agents * frames * 2;
  if (per == 0 || predictions.size() % per != 0) {
    throw ShapeError("EvalCase: " + std::to_string(predictions.size()) + " predicted values do not split into [k, " +
                     std::to_string(agents) + ", " + std::to_string(frames) + ", 2]");
  }
  c.samples = predictions.size() / per;
  c.groundtruth = std::move(groundtruth);
  c.predictions = std::move(predictions);
  c.validate();
  return c;
}

void EvalCase::validate() const
{
  const std::size_t per = agents * frames * 2;
  if (agents == 0 || frames == 0) throw ShapeError("EvalCase: need at least one agent and one frame");
  if (samples == 0) throw ShapeError("EvalCase: need at least one sample");
  if (groundtruth.size() != per) {
    throw ShapeError("EvalCase: ground truth has " + std::to_string(groundtruth.size()) + " values, expected " +
                     std::to_string(per));
  }
  if (predictions.size() != samples * per) {
    throw ShapeError("EvalCase: predictions have " + std::to_string(predictions.size()) + " values, expected " +
                     std::to_string(samples * per));
  }
}

void EvalCase::add_sample(std::span<const double> scenario)
{
  if (scenario.size() != agents * frames * 2) throw ShapeError("EvalCase::add_sample: scenario shape mismatch");
  predictions.insert(predictions.end(), scenario.begin(), scenario.end());
  ++samples;
}

namespace
{

// Distance of sample j, agent i, frame t to the ground truth.
double dist(const EvalCase & c, std::size_t j, std::size_t i, std::size_t t)
{
  const std::size_t g = (i * c.frames + t) * 2;
  const std::size_t p = j * c.agents * c.frames * 2 + g;
  return std::hypot(c.predictions[p] - c.groundtruth[g], c.predictions[p + 1] - c.groundtruth[g + 1]);
}

double agent_ade(const EvalCase & c, std::size_t j, std::size_t i)
{
  double s = 0.0;
  for (std::size_t t = 0; t < c.frames; ++t) s += dist(c, j, i, t);
  return s / static_cast<double>(c.frames);
}

// Same per-agent terms and summation order as min_ade, so rounding cannot put the
// joint metric below the marginal one.
double scenario_ade(const EvalCase & c, std::size_t j)
{
  double s = 0.0;
  for (std::size_t i = 0; i < c.agents; ++i) s += agent_ade(c, j, i);
  return s / static_cast<double>(c.agents);
}

double scenario_fde(const EvalCase & c, std::size_t j)
{
  double s = 0.0;
  for (std::size_t i = 0; i < c.agents; ++i) s += dist(c, j, i, c.frames - 1);
  return s / static_cast<double>(c.agents);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double min_ade(const EvalCase & c)
{
  c.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < c.agents; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < c.samples; ++j) best = std::min(best, agent_ade(c, j, i));
    total += best;
  }
  return total / static_cast<double>(c.agents);
}

double min_fde(const EvalCase & c)
{
  c.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < c.agents; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < c.samples; ++j) best = std::min(best, dist(c, j, i, c.frames - 1));
    total += best;
  }
  return total / static_cast<double>(c.agents);
}

double min_jade(const EvalCase & c)
{
  c.validate();
  double best = kInf;
  for (std::size_t j = 0; j < c.samples; ++j) best = std::min(best, scenario_ade(c, j));
  return best;
}

double min_jfde(const EvalCase & c)
{
  c.validate();
  double best = kInf;
  for (std::size_t j = 0; j < c.samples; ++j) best = std::min(best, scenario_fde(c, j));
  return best;
}

double average_jade(const EvalCase & c)
{
  c.validate();
  std::vector<double> ade(c.samples);
  double best = kInf;
  for (std::size_t j = 0; j < c.samples; ++j) best = std::min(best, ade[j] = scenario_ade(c, j));
  // min + mean excess: never below min_jade after rounding
  double excess = 0.0;
  for (const double a : ade) excess += a - best;
  return best + excess / static_cast<double>(c.samples);
}

EvalCase horizon_slice(const EvalCase & c, std::size_t frames)
{
  c.validate();
  if (frames == 0 || frames > c.frames) {
    throw ShapeError("horizon_slice: frames must be in [1, " + std::to_string(c.frames) + "], got " +
                     std::to_string(frames));
  }
  EvalCase out;
  out.agents = c.agents;
  out.frames = frames;
  out.samples = c.samples;
  for (std::size_t j = 0; j <= c.samples; ++j) {
    // j == samples copies the ground truth
    const double * src = j == c.samples ? c.groundtruth.data() : c.predictions.data() + j * c.agents * c.frames * 2;
    auto & dst = j == c.samples ? out.groundtruth : out.predictions;
    for (std::size_t i = 0; i < c.agents; ++i) {
      dst.insert(dst.end(), src + i * c.frames * 2, src + (i * c.frames + frames) * 2);
    }
  }
  return out;
}

double scale_units(double value, double factor)
{
  if (!(factor > 0.0)) throw ConfigError("unit scale must be positive", "eval.scale");
  return value * factor;
}

MetricSet MetricSet::scaled(double factor) const
{
  return {scale_units(min_ade, factor), scale_units(min_fde, factor), scale_units(min_jade, factor),
          scale_units(min_jfde, factor), scale_units(average_jade, factor)};
}

MetricSet evaluate(const EvalCase & c)
{
  return {min_ade(c), min_fde(c), min_jade(c), min_jfde(c), average_jade(c)};
}

MetricSet evaluate_mean(std::span<const EvalCase> cases)
{
  if (cases.empty()) throw ShapeError("evaluate_mean: no cases");
  MetricSet m;
  for (const auto & c : cases) {
    const MetricSet e = evaluate(c);
    m.min_ade += e.min_ade;
    m.min_fde += e.min_fde;
    m.min_jade += e.min_jade;
    m.min_jfde += e.min_jfde;
    m.average_jade += e.average_jade;
  }
  const double n = static_cast<double>(cases.size());
  return {m.min_ade / n, m.min_fde / n, m.min_jade / n, m.min_jfde / n, m.average_jade / n};
}

std::vector<HorizonRow> evaluate_horizons(std::span<const EvalCase> cases, std::span<const std::size_t> horizons)
{
  std::vector<HorizonRow> rows;
  for (const std::size_t h : horizons) {
    std::vector<EvalCase> sliced;
    sliced.reserve(cases.size());
    for (const auto & c : cases) sliced.push_back(horizon_slice(c, h));
    rows.push_back({h, evaluate_mean(sliced)});
  }
  return rows;
}

KeyValues metric_report_items(std::span<const HorizonRow> rows, double scale)
{
  KeyValues kv{{"scale", format_real(scale)}};
  for (const auto & r : rows) {
    const std::string p = "h" + std::to_string(r.frames) + ".";
    kv.emplace_back(p + "min_ade", format_real(r.metrics.min_ade));
    kv.emplace_back(p + "min_fde", format_real(r.metrics.min_fde));
    kv.emplace_back(p + "min_jade", format_real(r.metrics.min_jade));
    kv.emplace_back(p + "min_jfde", format_real(r.metrics.min_jfde));
    kv.emplace_back(p + "average_jade", format_real(r.metrics.average_jade));
  }
  return kv;
}

std::string metric_report_csv(std::span<const HorizonRow> rows)
{
  std::ostringstream out;
  out << "frames,minADE,minFDE,minJADE,minJFDE,averageJADE\n";
  for (const auto & r : rows) {
    out << r.frames << ',' << format_real(r.metrics.min_ade) << ',' << format_real(r.metrics.min_fde) << ','
        << format_real(r.metrics.min_jade) << ',' << format_real(r.metrics.min_jfde) << ','
        << format_real(r.metrics.average_jade) << '\n';
  }
  return out.str();
}

}  // namespace ctraj
