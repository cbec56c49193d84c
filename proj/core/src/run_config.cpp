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

#include "ctraj/run_config.hpp"

#include <filesystem>

#include "ctraj/error.hpp"

namespace ctraj
{

namespace
{

std::string resolve(const std::string & base, const std::string & p)
{
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (std::filesystem::path(base) / p).lexically_normal().string();
}

bool apply_train_key(RunConfig & c, const std::string & key, const std::string & v, const std::string & base)
{
  const std::string full = "train." + key;
  TrainConfig & t = c.train;
  OptimConfig & o = t.optim;
  if (key == "epochs") t.epochs = parse_size(full, v);
  else if (key == "batch_size") t.batch_size = parse_size(full, v);
  else if (key == "shuffle") t.shuffle = parse_bool(full, v);
  else if (key == "entropy_weight") t.entropy_weight = parse_real(full, v);
  else if (key == "eval_every") t.eval_every = parse_size(full, v);
  else if (key == "halt_after") t.halt_after = parse_size(full, v);
  else if (key == "resume") c.resume = resolve(base, v);
  else if (key == "max_lr") o.max_lr = parse_real(full, v);
  else if (key == "weight_decay") o.weight_decay = parse_real(full, v);
  else if (key == "beta1") o.beta1 = parse_real(full, v);
  else if (key == "beta2") o.beta2 = parse_real(full, v);
  else if (key == "eps") o.eps = parse_real(full, v);
  else if (key == "clip_norm") o.clip_norm = parse_real(full, v);
  else if (key == "warmup_fraction") o.warmup_fraction = parse_real(full, v);
  else if (key == "div_factor") o.div_factor = parse_real(full, v);
  else if (key == "final_div_factor") o.final_div_factor = parse_real(full, v);
  else return false;
  return true;
}

}  // namespace

RunConfig parse_run_config(const KeyValues & items, const std::string & base_dir)
{
  RunConfig c;
  for (const auto & [key, v] : items) {
    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? std::string() : key.substr(0, dot);
    const std::string rest = dot == std::string::npos ? key : key.substr(dot + 1);
    bool known = true;
    if (key == "seed") c.seed = parse_u64(key, v);
    else if (key == "out_dir") c.out_dir = resolve(base_dir, v);
    else if (section == "model") known = apply_model_key(c.model, rest, v);
    else if (section == "train") known = apply_train_key(c, rest, v, base_dir);
    else if (key == "data.manifest") c.data_manifest = resolve(base_dir, v);
    else if (key == "data.train") c.data_train = resolve(base_dir, v);
    else if (key == "data.val") c.data_val = resolve(base_dir, v);
    else if (key == "data.test") c.data_test = resolve(base_dir, v);
    else if (key == "sample.k") c.sample_k = parse_size(key, v);
    else if (key == "sample.mode") {
      try {
        c.sample_mode = parse_sample_mode(v);
      } catch (const ConfigError & e) {
        throw ConfigError(e.what(), key);
      }
    } else if (key == "eval.scale") c.eval_scale = parse_real(key, v);
    else known = false;
    if (!known) throw ConfigError("unknown config key '" + key + "'", key);
  }
  c.train.seed = c.seed;
  c.model.validate();
  if (c.train.batch_size == 0) throw ConfigError("train.batch_size must be positive", "train.batch_size");
  if (c.train.epochs == 0) throw ConfigError("train.epochs must be positive", "train.epochs");
  if (!(c.train.optim.max_lr >= 0.0)) throw ConfigError("train.max_lr must be non-negative", "train.max_lr");
  if (c.sample_k == 0) throw ConfigError("sample.k must be positive", "sample.k");
  if (!(c.eval_scale > 0.0)) throw ConfigError("eval.scale must be positive", "eval.scale");
  return c;
}

RunConfig load_run_config(const std::string & path)
{
  const KeyValues items = read_kv_file(path);
  return parse_run_config(items, std::filesystem::path(path).parent_path().string());
}

KeyValues run_config_items(const RunConfig & c)
{
  const auto s = [](std::size_t v) { return std::to_string(v); };
  const TrainConfig & t = c.train;
  const OptimConfig & o = t.optim;
  KeyValues kv{{"seed", std::to_string(c.seed)}, {"out_dir", c.out_dir}};
  for (const auto & [k, v] : model_config_items(c.model)) kv.emplace_back("model." + k, v);
  KeyValues rest{
    {"train.epochs", s(t.epochs)},
    {"train.batch_size", s(t.batch_size)},
    {"train.shuffle", t.shuffle ? "true" : "false"},
    {"train.entropy_weight", format_real(t.entropy_weight)},
    {"train.eval_every", s(t.eval_every)},
    {"train.halt_after", s(t.halt_after)},
    {"train.max_lr", format_real(o.max_lr)},
    {"train.weight_decay", format_real(o.weight_decay)},
    {"train.beta1", format_real(o.beta1)},
    {"train.beta2", format_real(o.beta2)},
    {"train.eps", format_real(o.eps)},
    {"train.clip_norm", format_real(o.clip_norm)},
    {"train.warmup_fraction", format_real(o.warmup_fraction)},
    {"train.div_factor", format_real(o.div_factor)},
    {"train.final_div_factor", format_real(o.final_div_factor)},
    {"sample.k", s(c.sample_k)},
    {"sample.mode", std::string(to_string(c.sample_mode))},
    {"eval.scale", format_real(c.eval_scale)},
  };
  kv.insert(kv.end(), rest.begin(), rest.end());
  if (!c.resume.empty()) kv.emplace_back("train.resume", c.resume);
  if (!c.data_manifest.empty()) kv.emplace_back("data.manifest", c.data_manifest);
  if (!c.data_train.empty()) kv.emplace_back("data.train", c.data_train);
  if (!c.data_val.empty()) kv.emplace_back("data.val", c.data_val);
  if (!c.data_test.empty()) kv.emplace_back("data.test", c.data_test);
  return kv;
}

}  // namespace ctraj
