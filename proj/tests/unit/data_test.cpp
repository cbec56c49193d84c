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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "ctraj/data.hpp"
#include "ctraj/error.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

namespace ctraj
{
namespace
{

Dataset random_dataset(std::size_t count, std::size_t N, std::size_t T, std::mt19937_64 & rng)
{
  Dataset d;
  d.count = count;
  d.agents = N;
  d.frames = T;
  d.frame_rate = 25.0f;
  d.categories = default_categories(N);
  d.positions = testing::random_values(count * N * T * 2, rng, -100, 100);
  for (auto & v : d.positions) v = static_cast<float>(v);
  return d;
}

std::uint64_t checksum(const std::vector<double> & v)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (const double x : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    h = (h ^ bits) * 1099511628211ULL;
  }
  return h;
}

TEST(Trajectories, RoundtripIsBitExact)
{
  std::mt19937_64 rng(121);
  const Dataset d = random_dataset(100, 4, 7, rng);
  const auto bytes = encode_trajectories(d);
  EXPECT_EQ(bytes.size(), 5 + 12 + 4 + 4 + 100 * 4 * 7 * 2 * 4u);
  const Dataset back = decode_trajectories(bytes);
  EXPECT_EQ(back.count, 100u);
  EXPECT_EQ(back.agents, 4u);
  EXPECT_EQ(back.frames, 7u);
  EXPECT_EQ(back.frame_rate, 25.0f);
  EXPECT_EQ(back.categories, d.categories);
  EXPECT_EQ(checksum(back.positions), checksum(d.positions));
  EXPECT_EQ(encode_trajectories(back), bytes);
}

TEST(Trajectories, FileRoundtrip)
{
  std::mt19937_64 rng(122);
  const Dataset d = random_dataset(3, 3, 10, rng);
  const auto path = (testing::scratch_dir("data") / "x.ctrj").string();
  write_trajectories(path, d);
  EXPECT_EQ(load_trajectories(path).positions, d.positions);
  EXPECT_THROW(load_trajectories(path + ".missing"), DataError);
}

TEST(Trajectories, TruncationIsAParseError)
{
  std::mt19937_64 rng(123);
  const auto bytes = encode_trajectories(random_dataset(2, 3, 4, rng));
  for (std::size_t n = 0; n < bytes.size(); n += 7) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + n);
    EXPECT_THROW(decode_trajectories(cut), ParseError) << n;
  }
  std::vector<std::uint8_t> extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(decode_trajectories(extra), ParseError);
}

TEST(Trajectories, ErrorsCarryOffsets)
{
  std::mt19937_64 rng(124);
  auto bytes = encode_trajectories(random_dataset(1, 3, 2, rng));
  auto bad = bytes;
  bad[0] = 'X';
  try {
    decode_trajectories(bad);
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  bad = bytes;
  bad[17 + 1] = 9;  // second category code
  try {
    decode_trajectories(bad);
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.offset(), 18u);
  }
  bad = bytes;
  const float nan = std::nanf("");
  std::memcpy(bad.data() + 24 + 4, &nan, 4);  // second coordinate
  try {
    decode_trajectories(bad);
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.offset(), 28u);
  }
}

TEST(Synth, DeterministicUnderSeed)
{
  std::mt19937_64 a(7), b(7);
  const Dataset x = synth_forking_play(20, 5, 30, a), y = synth_forking_play(20, 5, 30, b);
  EXPECT_EQ(x.positions, y.positions);
  EXPECT_EQ(x.meta.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(x.meta[i].branch, y.meta[i].branch);
  EXPECT_EQ(x.categories, default_categories(5));
  EXPECT_EQ(x.categories[0], AgentCategory::kBall);
}

TEST(Synth, BranchesAreBalanced)
{
  std::mt19937_64 rng(125);
  const Dataset d = synth_forking_play(10000, 3, 12, rng);
  std::size_t left = 0;
  for (const auto & m : d.meta) left += m.branch > 0 ? 1 : 0;
  const double freq = left / 10000.0;
  EXPECT_NEAR(freq, 0.5, 0.01);
  EXPECT_NEAR(freq, 0.5, 3 * std::sqrt(0.25 / 10000));
}

TEST(Synth, TeammatesTurnTogether)
{
  std::mt19937_64 rng(126);
  SynthOptions opt;
  opt.accel_noise = 0.0;
  const Dataset d = synth_forking_play(50, 5, 20, rng, opt);
  for (std::size_t i = 0; i < d.count; ++i) {
    const auto s = d.sequence(i);
    const std::size_t f = d.meta[i].fork_frame, T = d.frames;
    for (std::size_t n = 1; n < d.agents; ++n) {
      // heading change across the fork has the branch's sign
      const double* p = s.data() + n * T * 2;
      const double v0x = p[f * 2] - p[(f - 1) * 2], v0y = p[f * 2 + 1] - p[(f - 1) * 2 + 1];
      const std::size_t g = f + opt.turn_frames;
      const double v1x = p[g * 2] - p[(g - 1) * 2], v1y = p[g * 2 + 1] - p[(g - 1) * 2 + 1];
      const double cross = v0x * v1y - v0y * v1x;
      // reflections at the court edge can flip the sign; skip agents that touched a wall
      bool inside = true;
      for (std::size_t t = 0; t < T; ++t) {
        inside = inside && p[t * 2] > 1 && p[t * 2] < kCourtLength - 1 && p[t * 2 + 1] > 1 && p[t * 2 + 1] < kCourtWidth - 1;
      }
      if (inside) {
        EXPECT_GT(cross * d.meta[i].branch, 0.0) << "sequence " << i << " agent " << n;
      }
    }
  }
}

TEST(Synth, PassesAreStraightSegments)
{
  std::mt19937_64 rng(127);
  SynthOptions opt;
  opt.pass_rate = 0.5;
  const Dataset d = synth_forking_play(200, 5, 30, rng, opt);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < d.count; ++i) {
    const auto s = d.sequence(i);
    for (const auto & p : d.meta[i].passes) {
      for (std::size_t t = p.start_frame + 1; t < p.end_frame; ++t) {
        const double x = s[t * 2], y = s[t * 2 + 1];
        const double w = static_cast<double>(t - p.start_frame) / static_cast<double>(p.end_frame - p.start_frame);
        EXPECT_NEAR(x, p.start[0] + w * (p.end[0] - p.start[0]), 1e-9);
        EXPECT_NEAR(y, p.start[1] + w * (p.end[1] - p.start[1]), 1e-9);
        ++checked;
      }
      // endpoints sit on the carriers
      const std::size_t T = d.frames;
      EXPECT_EQ(s[p.start_frame * 2], s[(p.from_agent * T + p.start_frame) * 2]);
      EXPECT_EQ(s[p.end_frame * 2], s[(p.to_agent * T + p.end_frame) * 2]);
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST(Synth, RejectsTinyScenes)
{
  std::mt19937_64 rng(128);
  EXPECT_THROW(synth_forking_play(1, 2, 20, rng), ConfigError);
  EXPECT_THROW(synth_forking_play(1, 3, 9, rng), ConfigError);
}

TEST(Batches, Examples)
{
  std::mt19937_64 a(3), b(3);
  const auto one = batch_indices(10, 10, true, a);
  ASSERT_EQ(one.size(), 1u);
  (void)batch_indices(10, 10, true, b);
  const auto e1 = batch_indices(10, 3, true, a), e3 = batch_indices(10, 3, true, b);
  EXPECT_EQ(e1, e3);
  EXPECT_EQ(e1.size(), 4u);
  EXPECT_EQ(e1.back().size(), 1u);
  std::multiset<std::size_t> seen;
  for (const auto & batch : e1) seen.insert(batch.begin(), batch.end());
  std::multiset<std::size_t> want;
  for (std::size_t i = 0; i < 10; ++i) want.insert(i);
  EXPECT_EQ(seen, want);
  const auto ordered = batch_indices(5, 2, false, a);
  EXPECT_EQ(ordered, (std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}, {4}}));
  EXPECT_THROW(batch_indices(5, 0, false, a), ConfigError);
}

TEST(Batches, MakeBatchCopiesSequences)
{
  std::mt19937_64 rng(129);
  const Dataset d = random_dataset(5, 3, 4, rng);
  const std::vector<std::size_t> idx{4, 1};
  const TrajectoryBatch b = make_batch(d, idx);
  EXPECT_EQ(b.positions.shape(), (Shape{2, 3, 4, 2}));
  for (std::size_t i = 0; i < 24; ++i) {
    EXPECT_EQ(b.positions.data()[i], d.sequence(4)[i]);
    EXPECT_EQ(b.positions.data()[24 + i], d.sequence(1)[i]);
  }
  EXPECT_EQ(b.categories, d.categories);
}

TEST(Dataset, SubsetAndFrameRange)
{
  std::mt19937_64 rng(130);
  const Dataset d = synth_forking_play(6, 3, 12, rng);
  const std::vector<std::size_t> idx{5, 0};
  const Dataset s = d.subset(idx);
  EXPECT_EQ(s.count, 2u);
  EXPECT_EQ(s.meta[0].branch, d.meta[5].branch);
  const Dataset r = d.frames_range(2, 5);
  EXPECT_EQ(r.frames, 5u);
  EXPECT_EQ(r.sequence(1)[0], d.sequence(1)[4]);
  EXPECT_THROW(d.frames_range(10, 5), DataError);
}

TEST(Manifest, RoundtripAndValidation)
{
  const auto dir = testing::scratch_dir("manifest");
  DatasetManifest m;
  m.train = (dir / "train.ctrj").string();
  m.val = (dir / "val.ctrj").string();
  m.test = (dir / "test.ctrj").string();
  m.agents = 11;
  m.frames = 30;
  m.context = 10;
  m.future = 20;
  m.unit_scale = 28.0 / 94.0;
  write_manifest((dir / "m.txt").string(), m);
  const DatasetManifest back = read_manifest((dir / "m.txt").string());
  EXPECT_EQ(back.train, m.train);
  EXPECT_EQ(back.future, 20u);
  EXPECT_EQ(back.unit_scale, m.unit_scale);
  {
    std::ofstream f(dir / "rel.txt");
    f << "train = a.ctrj\nagents = 3\nframes = 4\ncontext = 1\nfuture = 3\n";
  }
  EXPECT_EQ(read_manifest((dir / "rel.txt").string()).train, (dir / "a.ctrj").string());
  m.future = 19;
  EXPECT_THROW(m.validate(), ConfigError);
  m.future = 20;
  m.val = m.train;
  EXPECT_THROW(m.validate(), ConfigError);
  {
    std::ofstream f(dir / "bad.txt");
    f << "trian = a.ctrj\n";
  }
  EXPECT_THROW(read_manifest((dir / "bad.txt").string()), ConfigError);
}

TEST(Split, DisjointAndComplete)
{
  const auto s = split_indices(100, 0.8, 0.1, 5);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.test.size(), 10u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_THROW(split_indices(10, 0.8, 0.3, 1), ConfigError);
}

}  // namespace
}  // namespace ctraj
