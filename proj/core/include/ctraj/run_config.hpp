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

#ifndef CTRAJ__RUN_CONFIG_HPP_
#define CTRAJ__RUN_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "ctraj/kv.hpp"
#include "ctraj/model.hpp"
#include "ctraj/trainer.hpp"

namespace ctraj
{

/**
 * Everything a command needs, read from a flat `key = value` file:
 *
 *   seed, out_dir
 *   model.*   see model_config_items()
 *   train.*   epochs, batch_size, shuffle, entropy_weight, eval_every, halt_after, resume,
 *             max_lr, weight_decay, beta1, beta2, eps, clip_norm, warmup_fraction,
 *             div_factor, final_div_factor
 *   data.*    manifest | train, val, test (CTRJ1 paths)
 *   sample.*  k, mode (sample | mean)
 *   eval.*    scale
 *
 * Unknown keys are rejected with ConfigError naming the key.
 */
struct RunConfig
{
  std::uint64_t seed{0};
  std::string out_dir{"run"};
  ModelConfig model;
  TrainConfig train;
  std::string resume;
  std::string data_manifest, data_train, data_val, data_test;
  std::size_t sample_k{20};
  SampleMode sample_mode{SampleMode::kSample};
  double eval_scale{1.0};
};

// `base_dir` resolves relative data paths.
RunConfig parse_run_config(const KeyValues & items, const std::string & base_dir = {});
RunConfig load_run_config(const std::string & path);
// Fully resolved snapshot, parseable by parse_run_config.
KeyValues run_config_items(const RunConfig & config);

}  // namespace ctraj

#endif  // CTRAJ__RUN_CONFIG_HPP_
