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

#include "ctraj/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "ctraj/binary_io.hpp"
#include "ctraj/error.hpp"
#include "ctraj/kv.hpp"

namespace ctraj
{

std::span<const double> Dataset::sequence(std::size_t i) const
{
  if (i >= count) throw ShapeError("Dataset: sequence " + std::to_string(i) + " out of " + std::to_string(count));
  const std::size_t per = agents * frames * 2;
  return {positions.data() + i * per, per};
}

void Dataset::validate() const
{
  if (categories.size() != agents) {
    throw DataError("dataset: " + std::to_string(categories.size()) + " categories for " + std::to_string(agents) +
                    " agents");
  }
  if (positions.size() != count * agents * frames * 2) throw DataError("dataset: position buffer size mismatch");
  if (!meta.empty() && meta.size() != count) throw DataError("dataset: metadata count mismatch");
  for (const double v : positions) {
    if (!std::isfinite(v)) throw DataError("dataset: non-finite position");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const
{
  Dataset out;
  out.agents = agents;
  out.frames = frames;
  out.frame_rate = frame_rate;
  out.categories = categories;
  out.count = indices.size();
  out.positions.reserve(indices.size() * agents * frames * 2);
  for (const std::size_t i : indices) {
    const auto s = sequence(i);
    out.positions.insert(out.positions.end(), s.begin(), s.end());
    if (!meta.empty()) out.meta.push_back(meta[i]);
  }
  return out;
}

Dataset Dataset::frames_range(std::size_t begin, std::size_t length) const
{
  if (begin + length > frames) {
    throw DataError("dataset: frame range [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                    ") exceeds " + std::to_string(frames) + " frames");
  }
  Dataset out;
  out.count = count;
  out.agents = agents;
  out.frames = length;
  out.frame_rate = frame_rate;
  out.categories = categories;
  out.positions.reserve(count * agents * length * 2);
  for (std::size_t s = 0; s < count * agents; ++s) {
    const double * src = positions.data() + (s * frames + begin) * 2;
    out.positions.insert(out.positions.end(), src, src + length * 2);
  }
  return out;
}

TrajectoryBatch make_batch(const Dataset & data, std::span<const std::size_t> indices)
{
  TrajectoryBatch b;
  std::vector<double> x;
  x.reserve(indices.size() * data.agents * data.frames * 2);
  for (const std::size_t i : indices) {
    const auto s = data.sequence(i);
    x.insert(x.end(), s.begin(), s.end());
  }
  b.positions = Tensor::from_data({indices.size(), data.agents, data.frames, 2}, std::move(x));
  b.categories = data.categories;
  b.frame_rate = data.frame_rate;
  b.indices.assign(indices.begin(), indices.end());
  return b;
}

std::vector<std::vector<std::size_t>> batch_indices(
  std::size_t count, std::size_t batch_size, bool shuffle, std::mt19937_64 & rng)
{
  if (batch_size == 0) throw ConfigError("batch size must be positive", "train.batch_size");
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  if (shuffle) {
    // Fisher-Yates with an explicit draw so the order is identical across standard libraries
    for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t b = 0; b < count; b += batch_size) {
    out.emplace_back(order.begin() + b, order.begin() + std::min(count, b + batch_size));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CTRJ1

std::vector<std::uint8_t> encode_trajectories(const Dataset & data)
{
  data.validate();
  ByteWriter w;
  w.bytes(kTrajectoryMagic, sizeof(kTrajectoryMagic) - 1);
  w.u32(static_cast<std::uint32_t>(data.count));
  w.u32(static_cast<std::uint32_t>(data.agents));
  w.u32(static_cast<std::uint32_t>(data.frames));
  for (const auto c : data.categories) w.u8(static_cast<std::uint8_t>(c));
  w.f32(data.frame_rate);
  for (const double v : data.positions) w.f32(static_cast<float>(v));
  return w.take();
}

Dataset decode_trajectories(const std::vector<std::uint8_t> & bytes)
{
  ByteReader r(bytes);
  if (r.string(sizeof(kTrajectoryMagic) - 1, "magic") != kTrajectoryMagic) {
    throw ParseError("not a CTRJ1 trajectory file", 0);
  }
  Dataset d;
  d.count = r.u32("sequence count");
  d.agents = r.u32("agent count");
  d.frames = r.u32("frame count");
  for (std::size_t n = 0; n < d.agents; ++n) {
    const std::uint64_t at = r.offset();
    const unsigned code = r.u8("category code");
    if (code >= kNumCategories) throw ParseError("invalid category code " + std::to_string(code), at);
    d.categories.push_back(static_cast<AgentCategory>(code));
  }
  const std::uint64_t rate_at = r.offset();
  d.frame_rate = r.f32("frame rate");
  if (!(d.frame_rate > 0.0f) || !std::isfinite(d.frame_rate)) throw ParseError("invalid frame rate", rate_at);
  const std::uint64_t values = static_cast<std::uint64_t>(d.count) * d.agents * d.frames * 2;
  if (values * 4 != r.remaining()) {
    throw ParseError("payload holds " + std::to_string(r.remaining()) + " bytes, header implies " +
                     std::to_string(values * 4),
                     r.offset() + std::min<std::uint64_t>(values * 4, r.remaining()));
  }
  d.positions.resize(values);
  for (auto & v : d.positions) {
    const std::uint64_t at = r.offset();
    const float f = r.f32("position");
    if (!std::isfinite(f)) throw ParseError("non-finite position", at);
    v = f;
  }
  return d;
}

void write_trajectories(const std::string & path, const Dataset & data)
{
  write_file_atomic(path, encode_trajectories(data));
}

Dataset load_trajectories(const std::string & path)
{
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const std::runtime_error & e) {
    throw DataError(e.what());
  }
  return decode_trajectories(bytes);
}

// ---------------------------------------------------------------------------
// Manifest

void DatasetManifest::validate() const
{
  if (context + future != frames) {
    throw ConfigError("manifest: context + future must equal frames", "frames");
  }
  if (context == 0) throw ConfigError("manifest: context must be positive", "context");
  if (!(unit_scale > 0.0)) throw ConfigError("manifest: unit_scale must be positive", "unit_scale");
  const std::vector<const std::string *> paths{&train, &val, &test};
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      if (!paths[i]->empty() && *paths[i] == *paths[j]) {
        throw ConfigError("manifest: splits must be disjoint, '" + *paths[i] + "' is listed twice", "split");
      }
    }
  }
}

DatasetManifest read_manifest(const std::string & path)
{
  const KeyValues items = read_kv_file(path);
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string & p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (dir / fp).string();
  };
  DatasetManifest m;
  for (const auto & [k, v] : items) {
    if (k == "train") m.train = resolve(v);
    else if (k == "val") m.val = resolve(v);
    else if (k == "test") m.test = resolve(v);
    else if (k == "agents") m.agents = parse_size(k, v);
    else if (k == "frames") m.frames = parse_size(k, v);
    else if (k == "context") m.context = parse_size(k, v);
    else if (k == "future") m.future = parse_size(k, v);
    else if (k == "unit_scale") m.unit_scale = parse_real(k, v);
    else throw ConfigError("unknown manifest key '" + k + "'", k);
  }
  m.validate();
  return m;
}

void write_manifest(const std::string & path, const DatasetManifest & m)
{
  m.validate();
  write_kv_file(path, {{"train", m.train},
                       {"val", m.val},
                       {"test", m.test},
                       {"agents", std::to_string(m.agents)},
                       {"frames", std::to_string(m.frames)},
                       {"context", std::to_string(m.context)},
                       {"future", std::to_string(m.future)},
                       {"unit_scale", format_real(m.unit_scale)}});
}

SplitIndices split_indices(std::size_t count, double train_fraction, double val_fraction, std::uint64_t seed)
{
  if (train_fraction < 0 || val_fraction < 0 || train_fraction + val_fraction > 1.0) {
    throw ConfigError("split fractions must be non-negative and sum to at most 1", "data.train_fraction");
  }
  std::mt19937_64 rng(seed);
  const auto groups = batch_indices(count, std::max<std::size_t>(count, 1), true, rng);
  const std::vector<std::size_t> order = groups.empty() ? std::vector<std::size_t>{} : groups.front();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(count)));
  const auto n_val = std::min(count - n_train,
                              static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(count))));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

// ---------------------------------------------------------------------------
// Synthetic forking play

std::vector<AgentCategory> default_categories(std::size_t agents)
{
  std::vector<AgentCategory> c;
  if (agents == 0) return c;
  c.push_back(AgentCategory::kBall);
  const std::size_t players = agents - 1;
  const std::size_t team_a = (players + 1) / 2;
  for (std::size_t i = 0; i < players; ++i) c.push_back(i < team_a ? AgentCategory::kTeamA : AgentCategory::kTeamB);
  return c;
}

namespace
{

void reflect(double & p, double & v, double hi)
{
  if (p < 0.0) {
    p = -p;
    v = -v;
  } else if (p > hi) {
    p = 2.0 * hi - p;
    v = -v;
  }
}

}  // namespace

Dataset synth_forking_play(
  std::size_t count, std::size_t agents, std::size_t frames, std::mt19937_64 & rng, const SynthOptions & o)
{
  if (agents < 3) throw ConfigError("synthetic play needs at least 3 agents (ball + two players)", "data.agents");
  if (frames < 10) throw ConfigError("synthetic play needs at least 10 frames", "data.frames");
  const std::size_t fork = o.fork_frame == 0 ? frames / 2 : o.fork_frame;
  if (fork + 1 >= frames) throw ConfigError("fork frame must leave at least one displacement", "data.fork_frame");
  if (o.turn_frames == 0 || o.pass_frames_min == 0 || o.pass_frames_max < o.pass_frames_min) {
    throw ConfigError("invalid synthetic turn/pass durations", "data.turn_frames");
  }

  Dataset d;
  d.count = count;
  d.agents = agents;
  d.frames = frames;
  d.frame_rate = o.frame_rate;
  d.categories = default_categories(agents);
  d.positions.assign(count * agents * frames * 2, 0.0);
  d.meta.resize(count);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const double step_turn = o.turn_degrees * std::numbers::pi / 180.0 / static_cast<double>(o.turn_frames);
  const std::size_t players = agents - 1;

  for (std::size_t s = 0; s < count; ++s) {
    double * seq = d.positions.data() + s * agents * frames * 2;
    auto at = [&](std::size_t agent, std::size_t t) { return seq + (agent * frames + t) * 2; };
    SynthMeta & meta = d.meta[s];
    meta.fork_frame = fork;

    const double heading = two_pi * unit(rng);
    meta.branch = unit(rng) < 0.5 ? 1 : -1;

    for (std::size_t p = 1; p <= players; ++p) {
      double x = 37.0 + 20.0 * unit(rng);
      double y = 21.0 + 8.0 * unit(rng);
      const double h = heading + 0.6 * (unit(rng) - 0.5);
      const double speed = o.speed_min + (o.speed_max - o.speed_min) * unit(rng);
      double vx = speed * std::cos(h), vy = speed * std::sin(h);
      at(p, 0)[0] = x;
      at(p, 0)[1] = y;
      for (std::size_t t = 0; t + 1 < frames; ++t) {
        if (t >= fork && t < fork + o.turn_frames) {
          const double a = meta.branch * step_turn;
          const double rx = std::cos(a) * vx - std::sin(a) * vy;
          const double ry = std::sin(a) * vx + std::cos(a) * vy;
          vx = rx;
          vy = ry;
        }
        vx += o.accel_noise * normal(rng);
        vy += o.accel_noise * normal(rng);
        x += vx;
        y += vy;
        reflect(x, vx, kCourtLength);
        reflect(y, vy, kCourtWidth);
        at(p, t + 1)[0] = x;
        at(p, t + 1)[1] = y;
      }
    }

    // ball: held by a carrier, occasionally passed along a straight line
    std::size_t carrier = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(players)) % players;
    std::size_t t = 0;
    while (t < frames) {
      at(0, t)[0] = at(carrier, t)[0];
      at(0, t)[1] = at(carrier, t)[1];
      const std::size_t span = o.pass_frames_min +
        static_cast<std::size_t>(unit(rng) * static_cast<double>(o.pass_frames_max - o.pass_frames_min + 1)) %
          (o.pass_frames_max - o.pass_frames_min + 1);
      if (t + span < frames && unit(rng) < o.pass_rate) {
        std::size_t to = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(players - 1)) % (players - 1);
        if (to >= carrier) ++to;
        PassEvent e{carrier, to, t, t + span, {at(carrier, t)[0], at(carrier, t)[1]},
                    {at(to, t + span)[0], at(to, t + span)[1]}};
        for (std::size_t f = 1; f <= span; ++f) {
          const double u = static_cast<double>(f) / static_cast<double>(span);
          at(0, t + f)[0] = f == span ? e.end[0] : e.start[0] + u * (e.end[0] - e.start[0]);
          at(0, t + f)[1] = f == span ? e.end[1] : e.start[1] + u * (e.end[1] - e.start[1]);
        }
        meta.passes.push_back(e);
        carrier = to;
        t += span + 1;
        continue;
      }
      ++t;
    }
  }
  return d;
}

}  // namespace ctraj
