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

#include "ctraj/svg.hpp"

#include <sstream>

#include "ctraj/error.hpp"
#include "ctraj/kv.hpp"

namespace ctraj
{

namespace
{

const char * colour(AgentCategory c)
{
  switch (c) {
    case AgentCategory::kTeamA:
      return "#1f77b4";
    case AgentCategory::kTeamB:
      return "#d62728";
    case AgentCategory::kBall:
      return "#ff7f0e";
  }
  return "#000000";
}

std::string escape(const std::string & s)
{
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_scenario_svg(std::span<const double> prediction, std::span<const double> groundtruth,
                                std::span<const AgentCategory> categories, std::size_t frames,
                                const std::string & title, const SvgStyle & style)
{
  const std::size_t N = categories.size();
  if (prediction.size() != N * frames * 2) throw ShapeError("render: prediction does not match [N, F, 2]");
  if (!groundtruth.empty() && groundtruth.size() != N * frames * 2) {
    throw ShapeError("render: ground truth does not match [N, F, 2]");
  }
  const double s = style.pixels_per_unit, m = style.margin;
  const double w = style.court_length * s + 2 * m, h = style.court_width * s + 2 * m;
  auto px = [&](double x) { return format_real(m + x * s); };
  // court y grows upward
  auto py = [&](double y) { return format_real(m + (style.court_width - y) * s); };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_real(w) << "\" height=\"" << format_real(h)
      << "\" viewBox=\"0 0 " << format_real(w) << ' ' << format_real(h) << "\">\n";
  if (!title.empty()) out << "  <title>" << escape(title) << "</title>\n";
  out << "  <rect class=\"court\" x=\"" << format_real(m) << "\" y=\"" << format_real(m) << "\" width=\""
      << format_real(style.court_length * s) << "\" height=\"" << format_real(style.court_width * s)
      << "\" fill=\"#f4e3c1\" stroke=\"#333333\" stroke-width=\"2\"/>\n";
  out << "  <line class=\"court\" x1=\"" << px(style.court_length / 2) << "\" y1=\"" << py(0) << "\" x2=\""
      << px(style.court_length / 2) << "\" y2=\"" << py(style.court_width) << "\" stroke=\"#333333\"/>\n";

  auto polyline = [&](std::span<const double> data, std::size_t n, bool dashed) {
    out << "  <polyline class=\"" << (dashed ? "groundtruth" : "prediction") << "\" data-agent=\"" << n
        << "\" data-category=\"" << to_string(categories[n]) << "\" fill=\"none\" stroke=\"" << colour(categories[n])
        << "\" stroke-width=\"" << (dashed ? "1.5" : "2") << '"';
    if (dashed) out << " stroke-dasharray=\"6 4\" stroke-opacity=\"0.6\"";
    out << " points=\"";
    for (std::size_t t = 0; t < frames; ++t) {
      const double * p = data.data() + (n * frames + t) * 2;
      if (t) out << ' ';
      out << px(p[0]) << ',' << py(p[1]);
    }
    out << "\"/>\n";
  };
  if (frames > 0) {
    if (!groundtruth.empty()) {
      for (std::size_t n = 0; n < N; ++n) polyline(groundtruth, n, true);
    }
    for (std::size_t n = 0; n < N; ++n) polyline(prediction, n, false);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace ctraj
