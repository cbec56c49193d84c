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

#ifndef CTRAJ__MODEL_HPP_
#define CTRAJ__MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctraj/encoders.hpp"
#include "ctraj/kv.hpp"
#include "ctraj/mdn.hpp"
#include "ctraj/nn.hpp"
#include "ctraj/relation.hpp"
#include "ctraj/tensor.hpp"

namespace ctraj
{

enum class AgentCategory : std::uint8_t
{
  kTeamA = 0,
  kTeamB = 1,
  kBall = 2,
};

constexpr std::size_t kNumCategories = 3;

AgentCategory parse_category(std::string_view name);
AgentCategory category_from_code(unsigned code);
std::string_view to_string(AgentCategory category);

struct ModelConfig
{
  EncoderConfig encoder;
  std::size_t embed_dim{64};  // learned category embedding width
  RelationConfig relation;
  std::size_t agent_dim{64};
  std::size_t agent_depth{1};
  std::size_t scene_dim{768};
  std::size_t scene_depth{3};  // the last scene layer is the mixture head
  std::size_t mixtures{kDefaultMixtures};
  std::size_t agents{11};
  std::size_t context{10};
  std::size_t future{20};

  std::size_t head_dim() const { return mixtures * (1 + agents * 5); }
  void validate() const;
};

// Flat `key = value` view of a config (keys without any section prefix).
KeyValues model_config_items(const ModelConfig & config);
// Returns false when `key` is not a model key.
bool apply_model_key(ModelConfig & config, const std::string & key, const std::string & value);
ModelConfig model_config_from_items(const KeyValues & items);

enum class SampleMode
{
  kSample,
  kComponentMean,
};

SampleMode parse_sample_mode(std::string_view name);
std::string_view to_string(SampleMode mode);

// Independent seed for the j-th scenario stream derived from a base seed.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

struct RolloutOptions
{
  std::size_t samples{20};
  std::size_t horizon{20};
  std::uint64_t seed{0};
  SampleMode mode{SampleMode::kSample};
  bool record_head{false};
};

struct RolloutResult
{
  Tensor futures;                         // [k, N, horizon, 2]
  std::vector<std::size_t> components;    // [horizon, k] chosen component per step
  std::vector<std::vector<double>> head;  // per step [k, head_dim] when recorded
};

/**
 * @brief Full trajectory model: per-agent history encoder, category embedding,
 * per-timestep relation encoder, scene aggregation and mixture head.
 *
 * The head output at frame t parameterizes the joint displacement
 * X[t+1] - X[t]. Agents must follow one fixed ordering (ball, team_a, team_b)
 * because the scene vector concatenates agents positionally.
 */
class Model
{
public:
  explicit Model(const ModelConfig & config, std::uint64_t seed = 0);

  const ModelConfig & config() const { return config_; }
  ParamStore & params() { return params_; }
  const ParamStore & params() const { return params_; }

  // positions [B, N, T, 2] -> head outputs [B, |frames|, head_dim] at the given frames.
  Tensor forward(const Tensor & positions, std::span<const AgentCategory> categories,
                 std::span<const std::size_t> frames) const;
  // All frames: [B, T, head_dim].
  Tensor forward(const Tensor & positions, std::span<const AgentCategory> categories) const;

  struct LossTerms
  {
    Tensor log_likelihood;  // [B, T - P]
    Tensor entropy;         // [B, T - P]; undefined for a single component
  };
  // Teacher-forced terms; entry s scores the prediction made at frame P - 1 + s.
  LossTerms loss_terms(const Tensor & positions, std::span<const AgentCategory> categories) const;

  // Per-step losses [B, T - P]: entry s scores the prediction made at frame P - 1 + s.
  Tensor step_losses(const Tensor & positions, std::span<const AgentCategory> categories,
                     double entropy_weight = kEntropyWeight) const;
  // Mean of step_losses (teacher forcing).
  Tensor loss(const Tensor & positions, std::span<const AgentCategory> categories,
              double entropy_weight = kEntropyWeight) const;
  // Mean negative log-likelihood over the same steps, without the entropy term.
  double nll(const Tensor & positions, std::span<const AgentCategory> categories) const;

  MixtureParams mixture_params(std::span<const double> head_row) const;

  // Autoregressive sampling from one context [N, P', 2]; every context frame is used.
  RolloutResult rollout(const Tensor & context, std::span<const AgentCategory> categories,
                        const RolloutOptions & options) const;

private:
  // z [R, N, d_enc], x [R, N, 4] -> head [R, head_dim]
  Tensor head(const Tensor & z, const Tensor & x, std::span<const AgentCategory> categories) const;
  void check_inputs(const Tensor & positions, std::span<const AgentCategory> categories) const;

  ModelConfig config_;
  ParamStore params_;
  HistoryEncoder encoder_;
  Tensor category_table_;
  Linear embed_;
  RelationEncoder relation_;
  Mlp agent_;
  Mlp scene_;
};

std::size_t count_parameters(const ModelConfig & config);

}  // namespace ctraj

#endif  // CTRAJ__MODEL_HPP_
