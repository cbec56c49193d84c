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

#include "ctraj/model.hpp"

#include <algorithm>
#include <random>

#include "ctraj/error.hpp"
#include "ctraj/ops.hpp"

namespace ctraj
{

AgentCategory parse_category(std::string_view name)
{
  if (name == "team_a") return AgentCategory::kTeamA;
  if (name == "team_b") return AgentCategory::kTeamB;
  if (name == "ball") return AgentCategory::kBall;
  throw ConfigError("unknown agent category '" + std::string(name) + "'", "category");
}

AgentCategory category_from_code(unsigned code)
{
  if (code >= kNumCategories) {
    throw ConfigError("unknown agent category code " + std::to_string(code), "category");
  }
  return static_cast<AgentCategory>(code);
}

std::string_view to_string(AgentCategory category)
{
  switch (category) {
    case AgentCategory::kTeamA:
      return "team_a";
    case AgentCategory::kTeamB:
      return "team_b";
    case AgentCategory::kBall:
      return "ball";
  }
  return "?";
}

SampleMode parse_sample_mode(std::string_view name)
{
  if (name == "sample") return SampleMode::kSample;
  if (name == "mean") return SampleMode::kComponentMean;
  throw ConfigError("unknown sample mode '" + std::string(name) + "' (expected sample or mean)", "sample.mode");
}

std::string_view to_string(SampleMode mode) { return mode == SampleMode::kSample ? "sample" : "mean"; }

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream)
{
  // splitmix64 finalizer over a golden-ratio stride
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Config

void ModelConfig::validate() const
{
  auto positive = [](std::size_t v, const char * key) {
    if (v == 0) throw ConfigError(std::string(key) + " must be positive", key);
  };
  positive(embed_dim, "model.embed_dim");
  positive(relation.d_model, "model.relation.d_model");
  positive(agent_dim, "model.agent_dim");
  positive(scene_dim, "model.scene_dim");
  positive(scene_depth, "model.scene_depth");
  positive(mixtures, "model.mixtures");
  positive(agents, "model.agents");
  positive(context, "model.context");
  if (encoder.variant == EncoderVariant::kSsm) {
    positive(encoder.ssm.d_model, "model.ssm.d_model");
    positive(encoder.ssm.d_state, "model.ssm.d_state");
    positive(encoder.ssm.d_conv, "model.ssm.d_conv");
    positive(encoder.ssm.expand, "model.ssm.expand");
    positive(encoder.ssm.head_dim, "model.ssm.head_dim");
  } else {
    positive(encoder.pointnet.hidden, "model.pointnet.hidden");
  }
}

KeyValues model_config_items(const ModelConfig & c)
{
  const auto s = [](std::size_t v) { return std::to_string(v); };
  const auto& p = c.encoder.pointnet;
  const auto& m = c.encoder.ssm;
  const auto& r = c.relation;
  return {
    {"encoder", std::string(to_string(c.encoder.variant))},
    {"pointnet.hidden", s(p.hidden)},
    {"pointnet.depths", s(p.depths[0]) + "," + s(p.depths[1]) + "," + s(p.depths[2])},
    {"pointnet.window", s(p.window)},
    {"ssm.d_model", s(m.d_model)},
    {"ssm.d_state", s(m.d_state)},
    {"ssm.d_conv", s(m.d_conv)},
    {"ssm.expand", s(m.expand)},
    {"ssm.head_dim", s(m.head_dim)},
    {"ssm.n_layer", s(m.n_layer)},
    {"ssm.chunk", s(m.chunk)},
    {"ssm.projector_depth", s(m.projector_depth)},
    {"embed_dim", s(c.embed_dim)},
    {"relation.d_model", s(r.d_model)},
    {"relation.heads", s(r.heads)},
    {"relation.standard_blocks", s(r.standard_blocks)},
    {"relation.standard_ff", s(r.standard_ff)},
    {"relation.srte_blocks", s(r.srte_blocks)},
    {"relation.srte_ff", s(r.srte_ff)},
    {"relation.use_srte", r.use_srte ? "true" : "false"},
    {"agent_dim", s(c.agent_dim)},
    {"agent_depth", s(c.agent_depth)},
    {"scene_dim", s(c.scene_dim)},
    {"scene_depth", s(c.scene_depth)},
    {"mixtures", s(c.mixtures)},
    {"agents", s(c.agents)},
    {"context", s(c.context)},
    {"future", s(c.future)},
  };
}

bool apply_model_key(ModelConfig & c, const std::string & key, const std::string & value)
{
  const std::string full = "model." + key;
  auto sz = [&](std::size_t & field) { field = parse_size(full, value); };
  auto & p = c.encoder.pointnet;
  auto & m = c.encoder.ssm;
  auto & r = c.relation;
  if (key == "encoder") {
    try {
      c.encoder.variant = parse_encoder_variant(value);
    } catch (const ConfigError & e) {
      throw ConfigError(e.what(), full);
    }
  } else if (key == "pointnet.hidden") sz(p.hidden);
  else if (key == "pointnet.depths") {
    const auto d = parse_size_list(full, value);
    if (d.size() != 3) throw ConfigError(full + " expects three depths", full);
    std::copy(d.begin(), d.end(), p.depths.begin());
  } else if (key == "pointnet.window") sz(p.window);
  else if (key == "ssm.d_model") sz(m.d_model);
  else if (key == "ssm.d_state") sz(m.d_state);
  else if (key == "ssm.d_conv") sz(m.d_conv);
  else if (key == "ssm.expand") sz(m.expand);
  else if (key == "ssm.head_dim") sz(m.head_dim);
  else if (key == "ssm.n_layer") sz(m.n_layer);
  else if (key == "ssm.chunk") sz(m.chunk);
  else if (key == "ssm.projector_depth") sz(m.projector_depth);
  else if (key == "embed_dim") sz(c.embed_dim);
  else if (key == "relation.d_model") sz(r.d_model);
  else if (key == "relation.heads") sz(r.heads);
  else if (key == "relation.standard_blocks") sz(r.standard_blocks);
  else if (key == "relation.standard_ff") sz(r.standard_ff);
  else if (key == "relation.srte_blocks") sz(r.srte_blocks);
  else if (key == "relation.srte_ff") sz(r.srte_ff);
  else if (key == "relation.use_srte") r.use_srte = parse_bool(full, value);
  else if (key == "agent_dim") sz(c.agent_dim);
  else if (key == "agent_depth") sz(c.agent_depth);
  else if (key == "scene_dim") sz(c.scene_dim);
  else if (key == "scene_depth") sz(c.scene_depth);
  else if (key == "mixtures") sz(c.mixtures);
  else if (key == "agents") sz(c.agents);
  else if (key == "context") sz(c.context);
  else if (key == "future") sz(c.future);
  else return false;
  return true;
}

ModelConfig model_config_from_items(const KeyValues & items)
{
  ModelConfig c;
  for (const auto & [k, v] : items) {
    if (!apply_model_key(c, k, v)) throw ConfigError("unknown model key '" + k + "'", "model." + k);
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Model

Model::Model(const ModelConfig & config, std::uint64_t seed) : config_(config)
{
  config_.validate();
  Initializer init(seed);
  encoder_ = HistoryEncoder(params_, init, "encoder", config_.encoder);
  category_table_ = params_.create("embed.category", {kNumCategories, config_.embed_dim});
  init.truncated_normal(category_table_, kInitStd);
  const std::size_t d = config_.relation.d_model;
  embed_ = Linear(params_, init, "embed.proj", encoder_.out_dim() + config_.embed_dim, d);
  relation_ = RelationEncoder(params_, init, "relation", config_.relation, kAugmentedDim);
  agent_ = Mlp(params_, init, "scene.agent", d + kAugmentedDim, config_.agent_dim, config_.agent_dim,
               config_.agent_depth, true);
  scene_ = Mlp(params_, init, "scene.mlp", config_.agents * agent_.out_features(), config_.scene_dim,
               config_.head_dim(), config_.scene_depth, false);
}

void Model::check_inputs(const Tensor & positions, std::span<const AgentCategory> categories) const
{
  if (positions.rank() != 4 || positions.dim(3) != 2) {
    throw ShapeError("model: positions must be [B, N, T, 2], got " + shape_str(positions.shape()));
  }
  if (positions.dim(1) != config_.agents || categories.size() != config_.agents) {
    throw ShapeError("model: configured for " + std::to_string(config_.agents) + " agents, got positions " +
                     shape_str(positions.shape()) + " with " + std::to_string(categories.size()) + " categories");
  }
}

Tensor Model::head(const Tensor & z, const Tensor & x, std::span<const AgentCategory> categories) const
{
  const std::size_t R = z.dim(0), N = z.dim(1);
  std::vector<std::size_t> codes(R * N);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t n = 0; n < N; ++n) codes[r * N + n] = static_cast<std::size_t>(categories[n]);
  }
  const Tensor e = reshape(gather_rows(category_table_, codes), {R, N, config_.embed_dim});
  Tensor h = gelu(embed_(concat_lastdim({z, e})));
  h = relation_.forward(h, x);
  const Tensor a = agent_(concat_lastdim({h, x}));
  return scene_(reshape(a, {R, N * agent_.out_features()}));
}

Tensor Model::forward(
  const Tensor & positions, std::span<const AgentCategory> categories, std::span<const std::size_t> frames) const
{
  check_inputs(positions, categories);
  const std::size_t B = positions.dim(0), N = positions.dim(1), T = positions.dim(2);
  for (const std::size_t f : frames) {
    if (f >= T) throw ShapeError("model: frame " + std::to_string(f) + " out of range for T=" + std::to_string(T));
  }
  const std::size_t de = encoder_.out_dim(), F = frames.size();
  const Tensor Z = encoder_.encode(positions);
  const Tensor X = velocity_augment(positions);

  std::vector<std::size_t> rows;
  rows.reserve(B * F);
  for (std::size_t b = 0; b < B; ++b) {
    for (const std::size_t f : frames) rows.push_back(b * T + f);
  }
  auto select = [&](const Tensor & t, std::size_t width) {
    const Tensor bt = reshape(permute(t, {0, 2, 1, 3}), {B * T, N * width});
    return reshape(gather_rows(bt, rows), {B * F, N, width});
  };
  const Tensor out = head(select(Z, de), select(X, kAugmentedDim), categories);
  return reshape(out, {B, F, config_.head_dim()});
}

Tensor Model::forward(const Tensor & positions, std::span<const AgentCategory> categories) const
{
  std::vector<std::size_t> frames(positions.rank() == 4 ? positions.dim(2) : 0);
  for (std::size_t t = 0; t < frames.size(); ++t) frames[t] = t;
  return forward(positions, categories, frames);
}

Model::LossTerms Model::loss_terms(const Tensor & positions, std::span<const AgentCategory> categories) const
{
  check_inputs(positions, categories);
  const std::size_t B = positions.dim(0), N = positions.dim(1), T = positions.dim(2);
  const std::size_t P = config_.context;
  if (T < 2) throw DataError("teacher forcing needs at least 2 frames, got " + std::to_string(T));
  if (P >= T) {
    throw DataError("context of " + std::to_string(P) + " frames leaves no target in a sequence of " +
                    std::to_string(T));
  }
  const std::size_t S = T - P, M = config_.mixtures;
  std::vector<std::size_t> frames(S);
  for (std::size_t s = 0; s < S; ++s) frames[s] = P - 1 + s;

  const Tensor raw = reshape(forward(positions, categories, frames), {B * S, config_.head_dim()});
  const Tensor logits = slice_lastdim(raw, 0, M);
  const Tensor means = reshape(slice_lastdim(raw, M, M * N * 2), {B * S, M, N, 2});
  const Tensor chol = reshape(slice_lastdim(raw, M + M * N * 2, M * N * 3), {B * S, M, N, 3});

  std::vector<double> y(B * S * N * 2);
  const auto x = positions.data();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t t = P - 1 + s;
      for (std::size_t n = 0; n < N; ++n) {
        const std::size_t base = (b * N + n) * T * 2;
        for (std::size_t c = 0; c < 2; ++c) {
          y[((b * S + s) * N + n) * 2 + c] = x[base + (t + 1) * 2 + c] - x[base + t * 2 + c];
        }
      }
    }
  }
  const Tensor Y = Tensor::from_data({B * S, N, 2}, std::move(y));
  LossTerms terms;
  terms.log_likelihood = reshape(mixture_log_likelihood(logits, means, chol, Y), {B, S});
  if (M > 1) terms.entropy = reshape(entropy_regularizer(logits), {B, S});
  return terms;
}

Tensor Model::step_losses(
  const Tensor & positions, std::span<const AgentCategory> categories, double entropy_weight) const
{
  const LossTerms t = loss_terms(positions, categories);
  Tensor out = scale(t.log_likelihood, -1.0);
  if (t.entropy.defined() && entropy_weight != 0.0) out = sub(out, scale(t.entropy, entropy_weight));
  return out;
}

Tensor Model::loss(const Tensor & positions, std::span<const AgentCategory> categories, double entropy_weight) const
{
  return mean(step_losses(positions, categories, entropy_weight));
}

double Model::nll(const Tensor & positions, std::span<const AgentCategory> categories) const
{
  NoGradGuard no_grad;
  return loss(positions, categories, 0.0).item();
}

MixtureParams Model::mixture_params(std::span<const double> row) const
{
  const std::size_t M = config_.mixtures, N = config_.agents;
  if (row.size() != config_.head_dim()) {
    throw ShapeError("mixture_params: head row has " + std::to_string(row.size()) + " values, expected " +
                     std::to_string(config_.head_dim()));
  }
  MixtureParams p;
  p.components = M;
  p.agents = N;
  p.logits.assign(row.begin(), row.begin() + M);
  p.means.assign(row.begin() + M, row.begin() + M + M * N * 2);
  p.chol.assign(row.begin() + M + M * N * 2, row.end());
  return p;
}

RolloutResult Model::rollout(
  const Tensor & context, std::span<const AgentCategory> categories, const RolloutOptions & options) const
{
  NoGradGuard no_grad;
  if (context.rank() != 3 || context.dim(2) != 2 || context.dim(0) != config_.agents) {
    throw ShapeError("rollout: context must be [" + std::to_string(config_.agents) + ", P, 2], got " +
                     shape_str(context.shape()));
  }
  if (categories.size() != config_.agents) throw ShapeError("rollout: category count does not match agents");
  const std::size_t N = context.dim(0), P = context.dim(1), K = options.samples, F = options.horizon;
  if (P == 0) throw DataError("rollout: empty context");
  if (K == 0) throw ConfigError("rollout: need at least one sample", "sample.k");
  const std::size_t de = encoder_.out_dim(), hd = config_.head_dim();

  std::vector<std::mt19937_64> rngs;
  for (std::size_t j = 0; j < K; ++j) rngs.emplace_back(substream_seed(options.seed, j));

  RolloutResult result;
  result.components.reserve(F * K);
  std::vector<double> futures(K * N * F * 2);
  std::vector<double> pos(K * N * 2), prev(K * N * 2);
  const auto ctx = context.data();
  auto stream = encoder_.start_stream(K * N);

  auto frame_tensor = [&](bool first) {
    std::vector<double> f(K * N * kAugmentedDim);
    for (std::size_t i = 0; i < K * N; ++i) {
      f[i * 4 + 0] = pos[i * 2];
      f[i * 4 + 1] = pos[i * 2 + 1];
      f[i * 4 + 2] = first ? 0.0 : pos[i * 2] - prev[i * 2];
      f[i * 4 + 3] = first ? 0.0 : pos[i * 2 + 1] - prev[i * 2 + 1];
    }
    return Tensor::from_data({K * N, kAugmentedDim}, std::move(f));
  };

  Tensor z, frame;
  for (std::size_t t = 0; t < P; ++t) {
    prev = pos;
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t n = 0; n < N; ++n) {
        pos[(j * N + n) * 2] = ctx[(n * P + t) * 2];
        pos[(j * N + n) * 2 + 1] = ctx[(n * P + t) * 2 + 1];
      }
    }
    frame = frame_tensor(t == 0);
    z = encoder_.step(frame, stream);
  }

  for (std::size_t s = 0; s < F; ++s) {
    const Tensor out = head(reshape(z, {K, N, de}), reshape(frame, {K, N, kAugmentedDim}), categories);
    const auto rows = out.data();
    if (options.record_head) result.head.emplace_back(rows.begin(), rows.end());
    prev = pos;
    for (std::size_t j = 0; j < K; ++j) {
      const MixtureParams params = mixture_params(rows.subspan(j * hd, hd));
      std::mt19937_64 probe = rngs[j];
      result.components.push_back(sample_component(params.logits, probe));
      const std::vector<double> d = options.mode == SampleMode::kSample ? sample_displacement(params, rngs[j])
                                                                        : sample_component_mean(params, rngs[j]);
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t c = 0; c < 2; ++c) {
          const double v = prev[(j * N + n) * 2 + c] + d[n * 2 + c];
          pos[(j * N + n) * 2 + c] = v;
          futures[((j * N + n) * F + s) * 2 + c] = v;
        }
      }
    }
    if (s + 1 < F) {
      frame = frame_tensor(false);
      z = encoder_.step(frame, stream);
    }
  }
  result.futures = Tensor::from_data({K, N, F, 2}, std::move(futures));
  return result;
}

std::size_t count_parameters(const ModelConfig & config) { return Model(config, 0).params().scalar_count(); }

}  // namespace ctraj
