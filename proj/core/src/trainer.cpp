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

#include "ctraj/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ctraj/error.hpp"
#include "ctraj/kv.hpp"
#include "ctraj/ops.hpp"

namespace ctraj
{

OptimState make_optim_state(const ParamStore & params)
{
  OptimState s;
  for (const auto & p : params.items()) {
    s.m.emplace_back(p.tensor.numel(), 0.0);
    s.v.emplace_back(p.tensor.numel(), 0.0);
  }
  return s;
}

bool adamw_step(ParamStore & params, OptimState & state, double lr, const OptimConfig & c, std::string * diagnostic)
{
  const auto & items = params.items();
  if (state.m.size() != items.size() || state.v.size() != items.size()) {
    throw ShapeError("adamw_step: optimizer state does not match the parameter store");
  }
  for (const auto & p : items) {
    for (const double g : p.tensor.grad()) {
      if (!std::isfinite(g)) {
        if (diagnostic) *diagnostic = "non-finite gradient in '" + p.name + "', step skipped";
        return false;
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < items.size(); ++i) {
    Tensor theta = items[i].tensor;
    const auto g = theta.grad();
    auto w = theta.mutable_data();
    auto & m = state.m[i];
    auto & v = state.v[i];
    if (m.size() != w.size() || v.size() != w.size()) throw ShapeError("adamw_step: moment shape mismatch");
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      w[k] -= lr * c.weight_decay * w[k];
      w[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + c.eps);
    }
    round_to_float(w);
    round_to_float(m);
    round_to_float(v);
  }
  return true;
}

double onecycle_lr(std::size_t step, std::size_t total_steps, const OptimConfig & c)
{
  if (total_steps == 0 || step > total_steps) {
    throw ConfigError("onecycle_lr: step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]",
                      "train.epochs");
  }
  const double initial = c.max_lr / c.div_factor;
  const double final = c.max_lr / c.final_div_factor;
  const double warm = c.warmup_fraction * static_cast<double>(total_steps);
  const double s = static_cast<double>(step);
  // weight w of the phase's start value; w = 1 at the start, 0 at the end
  auto anneal = [](double from, double to, double progress) {
    const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    return from * w + to * (1.0 - w);
  };
  if (s <= warm && warm > 0.0) return anneal(initial, c.max_lr, s / warm);
  return anneal(c.max_lr, final, (s - warm) / (static_cast<double>(total_steps) - warm));
}

double clip_grad_norm(ParamStore & params, double max_norm)
{
  double sq = 0.0;
  for (const auto & p : params.items()) {
    for (const double g : p.tensor.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && std::isfinite(norm) && norm > max_norm) {
    const double f = max_norm / (norm + 1e-6);
    for (const auto & p : params.items()) {
      Tensor t = p.tensor;
      for (auto & g : t.mutable_grad()) g *= f;
    }
  }
  return norm;
}

std::size_t total_train_steps(std::size_t dataset_size, const TrainConfig & config)
{
  if (config.batch_size == 0) throw ConfigError("batch size must be positive", "train.batch_size");
  const std::size_t per_epoch = (dataset_size + config.batch_size - 1) / config.batch_size;
  return per_epoch * config.epochs;
}

double evaluate_nll(const Model & model, const Dataset & data, std::size_t batch_size)
{
  if (data.count == 0) throw DataError("evaluate_nll: empty dataset");
  NoGradGuard no_grad;
  double total = 0.0;
  for (std::size_t b = 0; b < data.count; b += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b; i < std::min(data.count, b + batch_size); ++i) idx.push_back(i);
    const TrajectoryBatch batch = make_batch(data, idx);
    const auto terms = model.loss_terms(batch.positions, batch.categories);
    total += -sum(terms.log_likelihood).item() / static_cast<double>(terms.log_likelihood.dim(1));
  }
  return total / static_cast<double>(data.count);
}

void store_optim_state(Checkpoint & ckpt, const ParamStore & params, const OptimState & state)
{
  const auto & items = params.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Shape & s = items[i].tensor.shape();
    ckpt.tensors.push_back({"optim.m." + items[i].name, s, std::vector<float>(state.m[i].begin(), state.m[i].end())});
    ckpt.tensors.push_back({"optim.v." + items[i].name, s, std::vector<float>(state.v[i].begin(), state.v[i].end())});
  }
  ckpt.meta.emplace_back("optim.step", std::to_string(state.step));
}

OptimState load_optim_state(const Checkpoint & ckpt, const ParamStore & params)
{
  OptimState s;
  const std::string * step = ckpt.meta_value("optim.step");
  if (step == nullptr) throw ParseError("checkpoint has no optimizer state", 0);
  s.step = parse_size("optim.step", *step);
  for (const auto & p : params.items()) {
    for (const char * kind : {"optim.m.", "optim.v."}) {
      const CheckpointTensor * t = ckpt.find(kind + p.name);
      if (t == nullptr || t->shape != p.tensor.shape()) {
        throw ParseError("checkpoint optimizer tensor for '" + p.name + "' is missing or misshapen", 0);
      }
      (kind[6] == 'm' ? s.m : s.v).emplace_back(t->data.begin(), t->data.end());
    }
  }
  return s;
}

std::string loss_curve_csv(const std::vector<LossRecord> & curve)
{
  std::ostringstream out;
  out << "step,lr,train_nll,val_nll\n";
  for (const auto & r : curve) {
    out << r.step << ',' << format_real(r.lr) << ',' << format_real(r.train_nll) << ',';
    if (!std::isnan(r.val_nll)) out << format_real(r.val_nll);
    out << '\n';
  }
  return out.str();
}

namespace
{

void write_text(const std::filesystem::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

TrainResult train(Model & model, const Dataset & train_data, const Dataset * val_data, const TrainConfig & config,
                  const Checkpoint * resume)
{
  train_data.validate();
  if (train_data.count == 0) throw DataError("train: empty training set");
  const std::size_t total = total_train_steps(train_data.count, config);
  const std::size_t per_epoch = total / std::max<std::size_t>(config.epochs, 1);
  if (total == 0) throw ConfigError("train: schedule has no steps", "train.epochs");
  const std::size_t end = config.halt_after == 0 ? total : std::min(total, config.halt_after);

  ParamStore & params = model.params();
  OptimState state = make_optim_state(params);
  TrainResult result;
  std::size_t step = 0;
  if (resume != nullptr) {
    copy_parameters(*resume, model);
    state = load_optim_state(*resume, params);
    const std::string * s = resume->meta_value("trainer.step");
    const std::string * t = resume->meta_value("trainer.total_steps");
    if (s == nullptr || t == nullptr) throw ParseError("checkpoint has no trainer progress", 0);
    step = parse_size("trainer.step", *s);
    if (parse_size("trainer.total_steps", *t) != total) {
      throw ConfigError("resume: checkpoint schedule has " + *t + " steps, this run " + std::to_string(total),
                        "train.epochs");
    }
    if (const std::string * b = resume->meta_value("trainer.best_val")) result.best_val = parse_real("best_val", *b);
  }

  std::filesystem::path out_dir;
  if (!config.out_dir.empty()) {
    out_dir = config.out_dir;
    std::filesystem::create_directories(out_dir);
  }
  auto progress_meta = [&](std::size_t done) {
    return KeyValues{{"trainer.step", std::to_string(done)},
                     {"trainer.total_steps", std::to_string(total)},
                     {"trainer.seed", std::to_string(config.seed)},
                     {"trainer.best_val", format_real(result.best_val)}};
  };

  std::vector<std::vector<std::size_t>> batches;
  std::size_t batches_epoch = static_cast<std::size_t>(-1);
  for (; step < end; ++step) {
    const std::size_t epoch = step / per_epoch;
    if (epoch != batches_epoch) {
      std::mt19937_64 rng(substream_seed(config.seed, epoch));
      batches = batch_indices(train_data.count, config.batch_size, config.shuffle, rng);
      batches_epoch = epoch;
    }
    const TrajectoryBatch batch = make_batch(train_data, batches[step % per_epoch]);
    params.zero_grad();
    const auto terms = model.loss_terms(batch.positions, batch.categories);
    const Tensor nll = scale(mean(terms.log_likelihood), -1.0);
    Tensor objective = nll;
    if (terms.entropy.defined() && config.entropy_weight != 0.0) {
      objective = sub(nll, scale(mean(terms.entropy), config.entropy_weight));
    }
    if (!std::isfinite(objective.item())) {
      result.aborted = true;
      result.message = "non-finite loss at step " + std::to_string(step) + "; keeping the last good checkpoint";
      break;
    }
    objective.backward();
    clip_grad_norm(params, config.optim.clip_norm);
    const double lr = onecycle_lr(step, total, config.optim);
    std::string diag;
    if (!adamw_step(params, state, lr, config.optim, &diag)) {
      ++result.skipped;
      result.message = diag;
    }
    LossRecord rec{step, lr, nll.item()};

    const bool eval_now = val_data != nullptr && val_data->count > 0 &&
      ((config.eval_every != 0 && (step + 1) % config.eval_every == 0) ||
       (config.eval_every == 0 && (step + 1) % per_epoch == 0) || step + 1 == end);
    if (eval_now) {
      rec.val_nll = evaluate_nll(model, *val_data, config.batch_size);
      if (rec.val_nll < result.best_val) {
        result.best_val = rec.val_nll;
        result.best = model_checkpoint(model, progress_meta(step + 1));
        if (!out_dir.empty()) write_checkpoint((out_dir / "best.ckpt").string(), *result.best);
      }
    }
    result.curve.push_back(rec);
  }
  result.steps = step;

  result.last = model_checkpoint(model, progress_meta(step));
  store_optim_state(result.last, params, state);
  if (!result.best) result.best = model_checkpoint(model, progress_meta(step));
  if (!out_dir.empty()) {
    if (!result.aborted) write_checkpoint((out_dir / "last.ckpt").string(), result.last);
    if (!std::filesystem::exists(out_dir / "best.ckpt")) {
      write_checkpoint((out_dir / "best.ckpt").string(), *result.best);
    }
    write_text(out_dir / "loss.csv", loss_curve_csv(result.curve));
  }
  return result;
}

}  // namespace ctraj
