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

#include <fstream>

#include "ctraj/error.hpp"
#include "ctraj/kv.hpp"
#include "ctraj/model.hpp"
#include "ctraj/run_config.hpp"
#include "scratch.hpp"

namespace ctraj
{
namespace
{

TEST(KeyValues, ParsesCommentsAndBlanks)
{
  const KeyValues kv = parse_kv("# header\n\nseed = 4\n  model.mixtures=2  \n# trailing\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"seed", "4"}));
  EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"model.mixtures", "2"}));
  EXPECT_EQ(parse_kv(format_kv(kv)), kv);
}

TEST(KeyValues, MalformedLineReportsOffset)
{
  try {
    parse_kv("a = 1\nbroken line\n");
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.offset(), 6u);
  }
  EXPECT_THROW(parse_kv("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(read_kv_file("/nonexistent/ctraj.cfg"), ConfigError);
}

TEST(KeyValues, ValueParsers)
{
  EXPECT_EQ(parse_size("k", "12"), 12u);
  EXPECT_THROW(parse_size("k", "-1"), ConfigError);
  EXPECT_THROW(parse_size("k", "3x"), ConfigError);
  EXPECT_DOUBLE_EQ(parse_real("k", "28/94"), 28.0 / 94.0);
  EXPECT_DOUBLE_EQ(parse_real("k", "2.5e-3"), 2.5e-3);
  EXPECT_THROW(parse_real("k", "1/0"), ConfigError);
  EXPECT_TRUE(parse_bool("k", "true"));
  EXPECT_FALSE(parse_bool("k", "0"));
  EXPECT_THROW(parse_bool("k", "maybe"), ConfigError);
  EXPECT_EQ(parse_size_list("k", "1, 2,2"), (std::vector<std::size_t>{1, 2, 2}));
  for (const double v : {0.1, 1.0 / 3.0, 2e-6, 123456.789}) EXPECT_EQ(parse_real("k", format_real(v)), v);
  try {
    parse_size("model.mixtures", "lots");
    FAIL();
  } catch (const ConfigError & e) {
    EXPECT_EQ(e.key(), "model.mixtures");
  }
}

TEST(ModelConfigItems, Roundtrip)
{
  ModelConfig c;
  c.encoder.variant = EncoderVariant::kSsm;
  c.encoder.pointnet.depths = {2, 1, 3};
  c.relation.use_srte = false;
  c.mixtures = 3;
  c.agents = 5;
  const ModelConfig back = model_config_from_items(model_config_items(c));
  EXPECT_EQ(model_config_items(back), model_config_items(c));
  EXPECT_EQ(back.encoder.variant, EncoderVariant::kSsm);
  EXPECT_EQ(back.encoder.pointnet.depths, c.encoder.pointnet.depths);
  EXPECT_FALSE(back.relation.use_srte);
  ModelConfig d;
  EXPECT_FALSE(apply_model_key(d, "no_such_key", "1"));
  EXPECT_TRUE(apply_model_key(d, "mixtures", "4"));
  EXPECT_EQ(d.mixtures, 4u);
}

TEST(RunConfig, ParsesAllSections)
{
  const KeyValues kv = parse_kv(
    "seed = 7\nout_dir = out\nmodel.encoder = ssm\nmodel.mixtures = 4\ntrain.epochs = 3\n"
    "train.max_lr = 0.003\ntrain.shuffle = false\ndata.train = a.ctrj\nsample.k = 5\nsample.mode = mean\n"
    "eval.scale = 28/94\n");
  const RunConfig c = parse_run_config(kv, "/base");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.out_dir, "/base/out");
  EXPECT_EQ(c.model.encoder.variant, EncoderVariant::kSsm);
  EXPECT_EQ(c.model.mixtures, 4u);
  EXPECT_EQ(c.train.epochs, 3u);
  EXPECT_EQ(c.train.optim.max_lr, 0.003);
  EXPECT_FALSE(c.train.shuffle);
  EXPECT_EQ(c.data_train, "/base/a.ctrj");
  EXPECT_EQ(c.sample_k, 5u);
  EXPECT_EQ(c.sample_mode, SampleMode::kComponentMean);
  EXPECT_DOUBLE_EQ(c.eval_scale, 28.0 / 94.0);
  const RunConfig again = parse_run_config(run_config_items(c));
  EXPECT_EQ(run_config_items(again), run_config_items(c));
}

TEST(RunConfig, RejectsUnknownKeys)
{
  for (const char * key : {"sede", "model.mixturez", "train.lr", "data.foo", "optim.max_lr"}) {
    try {
      parse_run_config({{key, "1"}});
      FAIL() << key;
    } catch (const ConfigError & e) {
      EXPECT_EQ(e.key(), key);
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
    }
  }
  EXPECT_THROW(parse_run_config({{"model.encoder", "rnn"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"sample.mode", "best"}}), ConfigError);
}

TEST(RunConfig, LoadsRelativeToFile)
{
  const auto dir = testing::scratch_dir("runcfg");
  {
    std::ofstream f(dir / "run.cfg");
    f << "data.train = d/train.ctrj\n";
  }
  EXPECT_EQ(load_run_config((dir / "run.cfg").string()).data_train, (dir / "d/train.ctrj").string());
}

}  // namespace
}  // namespace ctraj
