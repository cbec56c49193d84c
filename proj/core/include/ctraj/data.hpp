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

#ifndef CTRAJ__DATA_HPP_
#define CTRAJ__DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ctraj/model.hpp"
#include "ctraj/tensor.hpp"

namespace ctraj
{

// Straight-line ball pass from one carrier to another (synthetic data only).
struct PassEvent
{
  std::size_t from_agent, to_agent;
  std::size_t start_frame, end_frame;  // ball is at the carriers on these frames
  double start[2], end[2];             // ball position at start_frame / end_frame
};

struct SynthMeta
{
  std::size_t fork_frame{0};
  int branch{0};  // +1 turns left (counter-clockwise), -1 turns right
  std::vector<PassEvent> passes;
};

/// In-memory trajectories: positions [count, N, T, 2] in dataset units.
struct Dataset
{
  std::size_t count{0};
  std::size_t agents{0};
  std::size_t frames{0};
  float frame_rate{5.0f};
  std::vector<AgentCategory> categories;
  std::vector<double> positions;
  std::vector<SynthMeta> meta;  // empty unless generated

  std::span<const double> sequence(std::size_t i) const;
  void validate() const;
  // Copies the listed sequences (metadata included when present).
  Dataset subset(std::span<const std::size_t> indices) const;
  // Keeps frames [begin, begin + length) of every sequence.
  Dataset frames_range(std::size_t begin, std::size_t length) const;
};

struct TrajectoryBatch
{
  Tensor positions;  // [B, N, T, 2]
  std::vector<AgentCategory> categories;
  float frame_rate{5.0f};
  std::vector<std::size_t> indices;
};

TrajectoryBatch make_batch(const Dataset & data, std::span<const std::size_t> indices);

// Index groups for one epoch; shuffled with `rng` when requested, last batch may be partial.
std::vector<std::vector<std::size_t>> batch_indices(
  std::size_t count, std::size_t batch_size, bool shuffle, std::mt19937_64 & rng);

// ---------------------------------------------------------------------------
// CTRJ1 container: "CTRJ1", u32 count, u32 N, u32 T, u8 category[N], f32 frame_rate,
// f32 positions[count, N, T, 2], all little-endian.

constexpr char kTrajectoryMagic[] = "CTRJ1";

std::vector<std::uint8_t> encode_trajectories(const Dataset & data);
// Throws ParseError with the byte offset of the first problem.
Dataset decode_trajectories(const std::vector<std::uint8_t> & bytes);
void write_trajectories(const std::string & path, const Dataset & data);
Dataset load_trajectories(const std::string & path);

// ---------------------------------------------------------------------------

struct DatasetManifest
{
  std::string train, val, test;  // resolved relative to the manifest's directory
  std::size_t agents{0}, frames{0}, context{0}, future{0};
  double unit_scale{1.0};

  void validate() const;
};

DatasetManifest read_manifest(const std::string & path);
void write_manifest(const std::string & path, const DatasetManifest & manifest);

struct SplitIndices
{
  std::vector<std::size_t> train, val, test;
};

// Disjoint random split with the given fractions (test takes the remainder).
SplitIndices split_indices(std::size_t count, double train_fraction, double val_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct SynthOptions
{
  std::size_t fork_frame{0};  // first affected displacement is X[f+1] - X[f]; 0 selects T / 2
  double turn_degrees{60.0};
  std::size_t turn_frames{2};
  double speed_min{0.8}, speed_max{1.2};  // units per frame
  double accel_noise{0.12};               // velocity random-walk std per frame
  double pass_rate{0.1};                  // per-frame probability of starting a pass
  std::size_t pass_frames_min{2}, pass_frames_max{3};
  float frame_rate{5.0f};
};

constexpr double kCourtLength = 94.0;
constexpr double kCourtWidth = 50.0;

// Agent order: ball, team_a (ceil((N-1)/2) players), team_b.
std::vector<AgentCategory> default_categories(std::size_t agents);

Dataset synth_forking_play(
  std::size_t count, std::size_t agents, std::size_t frames, std::mt19937_64 & rng, const SynthOptions & options = {});

}  // namespace ctraj

#endif  // CTRAJ__DATA_HPP_
