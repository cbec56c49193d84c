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

#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ctraj/checkpoint.hpp"
#include "ctraj/data.hpp"
#include "ctraj/error.hpp"
#include "ctraj/metrics.hpp"
#include "ctraj/model.hpp"
#include "ctraj/run_config.hpp"
#include "ctraj/svg.hpp"
#include "ctraj/trainer.hpp"

namespace ctraj::cli
{

namespace fs = std::filesystem;

namespace
{

// Bad invocation or unusable input: exit code 2.
class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

void require_file(const std::string & path, const char * what)
{
  if (path.empty() || !fs::is_regular_file(path)) throw UsageError(std::string(what) + " '" + path + "' not found");
}

Dataset load_input(const std::string & path, const char * what)
{
  require_file(path, what);
  try {
    return load_trajectories(path);
  } catch (const ParseError & e) {
    throw UsageError(std::string(what) + " '" + path + "': " + e.what());
  }
}

Checkpoint load_ckpt(const std::string & path)
{
  require_file(path, "checkpoint");
  try {
    return read_checkpoint(path);
  } catch (const ParseError & e) {
    throw UsageError("checkpoint '" + path + "': " + e.what());
  }
}

void write_text(const std::string & path, const std::string & text)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

void check_agents(const Dataset & data, const ModelConfig & model, const std::string & what)
{
  if (data.agents != model.agents) {
    throw UsageError(what + " has " + std::to_string(data.agents) + " agents, the model expects " +
                     std::to_string(model.agents));
  }
}

// Last `frames` frames of every sequence.
Dataset tail_frames(const Dataset & d, std::size_t frames) { return d.frames_range(d.frames - frames, frames); }

// ---------------------------------------------------------------------------

int cmd_train(const std::string & config_path, std::ostream & out)
{
  require_file(config_path, "config");
  RunConfig cfg = load_run_config(config_path);

  Dataset train_set, val_set;
  bool have_val = false;
  if (!cfg.data_manifest.empty()) {
    require_file(cfg.data_manifest, "manifest");
    const DatasetManifest m = read_manifest(cfg.data_manifest);
    if (m.context != cfg.model.context) {
      throw ConfigError("model.context (" + std::to_string(cfg.model.context) + ") differs from the manifest (" +
                        std::to_string(m.context) + ")", "model.context");
    }
    train_set = load_input(m.train, "training data");
    if (!m.val.empty()) {
      val_set = load_input(m.val, "validation data");
      have_val = true;
    }
  } else {
    if (cfg.data_train.empty()) throw ConfigError("data.train or data.manifest is required", "data.train");
    train_set = load_input(cfg.data_train, "training data");
    if (!cfg.data_val.empty()) {
      val_set = load_input(cfg.data_val, "validation data");
      have_val = true;
    }
  }
  check_agents(train_set, cfg.model, "training data");
  if (have_val) check_agents(val_set, cfg.model, "validation data");
  if (train_set.frames <= cfg.model.context) {
    throw UsageError("training sequences have " + std::to_string(train_set.frames) + " frames, context needs more than " +
                     std::to_string(cfg.model.context));
  }

  std::optional<Checkpoint> resume;
  if (!cfg.resume.empty()) resume = load_ckpt(cfg.resume);

  Model model(cfg.model, cfg.seed);
  TrainConfig tc = cfg.train;
  tc.out_dir = cfg.out_dir;
  fs::create_directories(cfg.out_dir);
  write_kv_file((fs::path(cfg.out_dir) / "config.resolved.txt").string(), run_config_items(cfg));

  const TrainResult r = train(model, train_set, have_val ? &val_set : nullptr, tc, resume ? &*resume : nullptr);
  out << "steps " << r.steps << " (skipped " << r.skipped << ")\n";
  if (!r.curve.empty()) out << "final train_nll " << format_real(r.curve.back().train_nll) << '\n';
  if (have_val) out << "best val_nll " << format_real(r.best_val) << '\n';
  out << "wrote " << (fs::path(cfg.out_dir) / "best.ckpt").string() << '\n';
  if (r.aborted) throw std::runtime_error(r.message);
  return kExitOk;
}

struct SampleArgs
{
  std::string checkpoint, input, output;
  std::size_t k{20};
  std::uint64_t seed{0};
  std::string mode{"sample"};
  std::size_t horizon{0};
};

int cmd_sample(const SampleArgs & a, std::ostream & out)
{
  const Checkpoint ckpt = load_ckpt(a.checkpoint);
  const Model model = load_model(ckpt);
  const ModelConfig & mc = model.config();
  const Dataset input = load_input(a.input, "input");
  check_agents(input, mc, "input");
  if (input.frames < mc.context) {
    throw UsageError("input has " + std::to_string(input.frames) + " frames, the model needs a context of " +
                     std::to_string(mc.context));
  }
  if (a.k == 0) throw UsageError("--k must be positive");
  const SampleMode mode = parse_sample_mode(a.mode);
  const std::size_t horizon = a.horizon == 0 ? mc.future : a.horizon;
  if (horizon == 0) throw UsageError("horizon must be positive");

  const Dataset context = input.frames_range(0, mc.context);
  Dataset result;
  result.count = input.count * a.k;
  result.agents = input.agents;
  result.frames = horizon;
  result.frame_rate = input.frame_rate;
  result.categories = input.categories;
  result.positions.reserve(result.count * result.agents * horizon * 2);
  for (std::size_t i = 0; i < input.count; ++i) {
    const auto seq = context.sequence(i);
    const Tensor ctx = Tensor::from_data({input.agents, mc.context, 2}, {seq.begin(), seq.end()});
    RolloutOptions ro;
    ro.samples = a.k;
    ro.horizon = horizon;
    ro.seed = substream_seed(a.seed, i);
    ro.mode = mode;
    const RolloutResult r = model.rollout(ctx, input.categories, ro);
    const auto f = r.futures.data();
    result.positions.insert(result.positions.end(), f.begin(), f.end());
  }
  write_trajectories(a.output, result);
  write_kv_file(a.output + ".txt", {{"generator", "ctraj sample"},
                                    {"checkpoint", fs::absolute(a.checkpoint).string()},
                                    {"input", fs::absolute(a.input).string()},
                                    {"inputs", std::to_string(input.count)},
                                    {"k", std::to_string(a.k)},
                                    {"seed", std::to_string(a.seed)},
                                    {"mode", std::string(to_string(mode))},
                                    {"context", std::to_string(mc.context)},
                                    {"horizon", std::to_string(horizon)},
                                    {"layout", "sequence i*k+j is scenario j of input i"}});
  out << "wrote " << result.count << " scenarios to " << a.output << '\n';
  return kExitOk;
}

// Splits predictions into per-case groups against the trailing ground-truth frames.
std::vector<EvalCase> build_cases(const Dataset & pred, const Dataset & gt)
{
  if (pred.agents != gt.agents) {
    throw UsageError("prediction has " + std::to_string(pred.agents) + " agents, ground truth " +
                     std::to_string(gt.agents));
  }
  if (gt.count == 0 || pred.count == 0 || pred.count % gt.count != 0) {
    throw UsageError("prediction count " + std::to_string(pred.count) + " is not a multiple of ground-truth count " +
                     std::to_string(gt.count));
  }
  if (pred.frames == 0 || gt.frames < pred.frames) {
    throw UsageError("ground truth has " + std::to_string(gt.frames) + " frames, predictions " +
                     std::to_string(pred.frames));
  }
  const std::size_t k = pred.count / gt.count;
  const Dataset future = tail_frames(gt, pred.frames);
  std::vector<EvalCase> cases;
  for (std::size_t i = 0; i < gt.count; ++i) {
    const auto g = future.sequence(i);
    const std::size_t per = pred.agents * pred.frames * 2;
    std::vector<double> p(pred.positions.begin() + i * k * per, pred.positions.begin() + (i + 1) * k * per);
    cases.push_back(EvalCase::make(pred.agents, pred.frames, {g.begin(), g.end()}, std::move(p)));
  }
  return cases;
}

struct EvalArgs
{
  std::string pred, gt, output;
  std::vector<std::size_t> horizons;
  std::string scale{"1"};
};

int cmd_eval(const EvalArgs & a, std::ostream & out)
{
  const Dataset pred = load_input(a.pred, "prediction");
  const Dataset gt = load_input(a.gt, "ground truth");
  const std::vector<EvalCase> cases = build_cases(pred, gt);
  std::vector<std::size_t> horizons = a.horizons;
  if (horizons.empty()) horizons.push_back(pred.frames);
  for (const std::size_t h : horizons) {
    if (h == 0 || h > pred.frames) {
      throw UsageError("horizon " + std::to_string(h) + " outside [1, " + std::to_string(pred.frames) + "]");
    }
  }
  const double scale = parse_real("--scale", a.scale);
  if (!(scale > 0.0)) throw UsageError("--scale must be positive");
  std::vector<HorizonRow> rows = evaluate_horizons(cases, horizons);
  for (auto & r : rows) r.metrics = r.metrics.scaled(scale);
  const std::string csv = metric_report_csv(rows);
  out << csv;
  if (!a.output.empty()) {
    KeyValues kv = metric_report_items(rows, scale);
    kv.insert(kv.begin(), {{"cases", std::to_string(cases.size())}, {"k", std::to_string(cases.front().samples)}});
    write_kv_file(a.output + ".txt", kv);
    write_text(a.output + ".csv", csv);
  }
  return kExitOk;
}

int cmd_render(const std::string & pred_path, const std::string & gt_path, const std::string & out_dir,
               std::ostream & out)
{
  const Dataset pred = load_input(pred_path, "prediction");
  std::optional<Dataset> gt;
  std::size_t k = 1;
  if (!gt_path.empty()) {
    gt = load_input(gt_path, "ground truth");
    build_cases(pred, *gt);  // shape checks only
    k = pred.count / gt->count;
  }
  const Dataset future = gt ? tail_frames(*gt, pred.frames) : Dataset{};
  fs::create_directories(out_dir);
  for (std::size_t s = 0; s < pred.count; ++s) {
    const std::size_t i = s / k, j = s % k;
    const auto p = pred.sequence(s);
    const std::span<const double> g = gt ? future.sequence(i) : std::span<const double>{};
    const std::string name = "scenario_" + std::to_string(i) + "_" + std::to_string(j);
    write_text((fs::path(out_dir) / (name + ".svg")).string(),
               render_scenario_svg(p, g, pred.categories, pred.frames, name));
  }
  out << "wrote " << pred.count << " SVG files to " << out_dir << '\n';
  return kExitOk;
}

struct SynthArgs
{
  std::string output;
  std::size_t count{512}, agents{5}, frames{30};
  std::uint64_t seed{0};
  std::size_t fork_frame{0};
};

int cmd_synth(const SynthArgs & a, std::ostream & out)
{
  std::mt19937_64 rng(a.seed);
  SynthOptions o;
  o.fork_frame = a.fork_frame;
  const Dataset d = synth_forking_play(a.count, a.agents, a.frames, rng, o);
  write_trajectories(a.output, d);
  out << "wrote " << d.count << " sequences (" << d.agents << " agents, " << d.frames << " frames) to " << a.output
      << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"ctraj: causal multi-agent trajectory model", "ctraj"};
  app.require_subcommand(1);

  std::string config_path;
  auto * train = app.add_subcommand("train", "train a model from a run config");
  train->add_option("--config", config_path, "run config (key = value)")->required();

  SampleArgs sa;
  auto * sample = app.add_subcommand("sample", "draw k future scenarios per input sequence");
  sample->add_option("--checkpoint", sa.checkpoint)->required();
  sample->add_option("--input", sa.input, "CTRJ1 file with at least `context` frames")->required();
  sample->add_option("--out", sa.output, "output CTRJ1 file (futures only)")->required();
  sample->add_option("--k", sa.k, "scenarios per input")->capture_default_str();
  sample->add_option("--seed", sa.seed)->capture_default_str();
  sample->add_option("--mode", sa.mode, "sample | mean")->capture_default_str();
  sample->add_option("--horizon", sa.horizon, "future frames (default: model.future)");

  EvalArgs ea;
  auto * eval = app.add_subcommand("eval", "score sampled scenarios against ground truth");
  eval->add_option("--pred", ea.pred)->required();
  eval->add_option("--gt", ea.gt)->required();
  eval->add_option("--horizons", ea.horizons, "frame counts, e.g. 5,10,20")->delimiter(',');
  eval->add_option("--scale", ea.scale, "unit scale, e.g. 28/94")->capture_default_str();
  eval->add_option("--out", ea.output, "report prefix (writes <prefix>.txt and <prefix>.csv)");

  std::string rp, rg, rd;
  auto * render = app.add_subcommand("render", "write one SVG per scenario");
  render->add_option("--pred", rp)->required();
  render->add_option("--gt", rg);
  render->add_option("--out", rd, "output directory")->required();

  SynthArgs ya;
  auto * synth = app.add_subcommand("synth", "generate synthetic forking-play sequences");
  synth->add_option("--out", ya.output)->required();
  synth->add_option("--count", ya.count)->capture_default_str();
  synth->add_option("--agents", ya.agents)->capture_default_str();
  synth->add_option("--frames", ya.frames)->capture_default_str();
  synth->add_option("--seed", ya.seed)->capture_default_str();
  synth->add_option("--fork-frame", ya.fork_frame, "first turning displacement (default: frames / 2)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(config_path, out);
    if (*sample) return cmd_sample(sa, out);
    if (*eval) return cmd_eval(ea, out);
    if (*render) return cmd_render(rp, rg, rd, out);
    if (*synth) return cmd_synth(ya, out);
  } catch (const ConfigError & e) {
    err << "config error" << (e.key().empty() ? "" : " [" + e.key() + "]") << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError & e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError & e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception & e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ctraj::cli
