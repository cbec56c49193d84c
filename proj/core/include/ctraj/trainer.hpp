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

#ifndef CTRAJ__TRAINER_HPP_
#define CTRAJ__TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ctraj/checkpoint.hpp"
#include "ctraj/data.hpp"
#include "ctraj/model.hpp"
#include "ctraj/nn.hpp"

namespace ctraj
{

struct OptimConfig
{
  double max_lr{0.02};
  double weight_decay{0.01};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double clip_norm{1.0};  // global gradient norm; 0 disables clipping
  double warmup_fraction{0.3};
  double div_factor{25.0};
  double final_div_factor{1e4};
};

struct OptimState
{
  std::size_t step{0};  // completed (non-skipped) updates
  std::vector<std::vector<double>> m, v;
};

OptimState make_optim_state(const ParamStore & params);

/**
 * AdamW with decoupled weight decay:
 *   theta <- theta - lr * wd * theta
 *   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
 * Returns false (and leaves everything untouched) when any gradient is non-finite.
 * Parameters and moments are rounded to float32 afterwards.
 */
bool adamw_step(ParamStore & params, OptimState & state, double lr, const OptimConfig & config,
                std::string * diagnostic = nullptr);

// Cosine one-cycle: max_lr/div -> max_lr over the warmup fraction, then -> max_lr/final_div.
double onecycle_lr(std::size_t step, std::size_t total_steps, const OptimConfig & config);

// Scales gradients so their global L2 norm is at most max_norm; returns the norm before scaling.
double clip_grad_norm(ParamStore & params, double max_norm);

struct TrainConfig
{
  std::size_t epochs{1};
  std::size_t batch_size{32};
  std::uint64_t seed{0};
  bool shuffle{true};
  double entropy_weight{kEntropyWeight};
  std::size_t eval_every{0};  // steps between validation passes; 0 = once per epoch
  std::size_t halt_after{0};  // stop early after this many total steps (0 = run the schedule)
  OptimConfig optim;
  std::string out_dir;  // when set: best.ckpt, last.ckpt and loss.csv are written here
};

struct LossRecord
{
  std::size_t step{0};
  double lr{0};
  double train_nll{0};
  double val_nll{std::numeric_limits<double>::quiet_NaN()};
};

struct TrainResult
{
  std::vector<LossRecord> curve;
  std::size_t steps{0};
  std::size_t skipped{0};
  double best_val{std::numeric_limits<double>::infinity()};
  bool aborted{false};
  std::string message;
  std::optional<Checkpoint> best;
  Checkpoint last;
};

std::size_t total_train_steps(std::size_t dataset_size, const TrainConfig & config);

// Mean teacher-forced NLL (no entropy term) over a dataset, in batches.
double evaluate_nll(const Model & model, const Dataset & data, std::size_t batch_size);

/**
 * Teacher-forced training. The batch order of each epoch is derived from
 * (seed, epoch), so resuming from a "last" checkpoint continues the exact
 * sequence of updates of an uninterrupted run.
 */
TrainResult train(Model & model, const Dataset & train_data, const Dataset * val_data, const TrainConfig & config,
                  const Checkpoint * resume = nullptr);

std::string loss_curve_csv(const std::vector<LossRecord> & curve);

// Optimizer tensors use names "optim.m.<param>" / "optim.v.<param>".
void store_optim_state(Checkpoint & ckpt, const ParamStore & params, const OptimState & state);
OptimState load_optim_state(const Checkpoint & ckpt, const ParamStore & params);

}  // namespace ctraj

#endif  // CTRAJ__TRAINER_HPP_
