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

#include "ctraj/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "ctraj/error.hpp"
#include "ctraj/ops.hpp"
#include "ctraj/ssm.hpp"

namespace ctraj
{

using detail::Node;

namespace
{

double softplus_scalar(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

double silu_scalar(double v) { return v / (1.0 + std::exp(-v)); }

}  // namespace

EncoderVariant parse_encoder_variant(std::string_view name)
{
  if (name == "pointnet") return EncoderVariant::kPointNet;
  if (name == "ssm") return EncoderVariant::kSsm;
  throw ConfigError("unknown encoder variant '" + std::string(name) + "' (expected pointnet or ssm)", "model.encoder");
}

std::string_view to_string(EncoderVariant variant)
{
  return variant == EncoderVariant::kPointNet ? "pointnet" : "ssm";
}

Tensor velocity_augment(const Tensor & X)
{
  if (X.rank() < 2 || X.dim(-1) != 2) {
    throw ShapeError("velocity_augment: expected [..., T, 2], got " + shape_str(X.shape()));
  }
  const std::size_t T = X.dim(-2);
  const std::size_t seqs = T == 0 ? 0 : X.numel() / (T * 2);
  const auto in = X.data();
  std::vector<double> out(seqs * T * 4);
  for (std::size_t s = 0; s < seqs; ++s) {
    for (std::size_t t = 0; t < T; ++t) {
      const double * x = in.data() + (s * T + t) * 2;
      double * o = out.data() + (s * T + t) * 4;
      o[0] = x[0];
      o[1] = x[1];
      o[2] = t == 0 ? 0.0 : x[0] - x[-2];
      o[3] = t == 0 ? 0.0 : x[1] - x[-1];
    }
  }
  Shape shape = X.shape();
  shape.back() = 4;
  return detail::make_result(std::move(shape), std::move(out), {X}, [seqs, T](Node & self) {
    auto & g = self.parents[0]->ensure_grad();
    for (std::size_t s = 0; s < seqs; ++s) {
      for (std::size_t t = 0; t < T; ++t) {
        const double * go = self.grad.data() + (s * T + t) * 4;
        double * gx = g.data() + (s * T + t) * 2;
        gx[0] += go[0];
        gx[1] += go[1];
        if (t > 0) {
          gx[0] += go[2];
          gx[1] += go[3];
          gx[-2] -= go[2];
          gx[-1] -= go[3];
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Causal PointNet

CausalPointNetEncoder::CausalPointNetEncoder(
  ParamStore & store, Initializer & init, const std::string & name, std::size_t in_dim, const PointNetConfig & config)
: config_(config)
{
  const std::size_t h = config.hidden;
  mlp1_ = Mlp(store, init, name + ".mlp1", in_dim, h, h, config.depths[0], true);
  mlp2_ = Mlp(store, init, name + ".mlp2", 2 * mlp1_.out_features(), h, h, config.depths[1], true);
  mlp3_ = Mlp(store, init, name + ".mlp3", mlp2_.out_features(), h, h, config.depths[2], false);
}

Tensor CausalPointNetEncoder::pool(const Tensor & x) const
{
  return max_pool_window(x, config_.window);
}

Tensor CausalPointNetEncoder::forward(const Tensor & inputs) const
{
  const Tensor a1 = mlp1_(inputs);
  const Tensor a2 = mlp2_(concat_lastdim({a1, pool(a1)}));
  return mlp3_(pool(a2));
}

Tensor CausalPointNetEncoder::pool_step(
  const Tensor & row, Tensor & running, std::vector<Tensor> & recent, std::size_t frames) const
{
  if (config_.window == 0) {
    running = frames == 0 ? row : maximum(running, row);
    return running;
  }
  recent.push_back(row);
  if (recent.size() > config_.window) recent.erase(recent.begin());
  Tensor out = recent.front();
  for (std::size_t i = 1; i < recent.size(); ++i) out = maximum(out, recent[i]);
  if (frames + 1 < config_.window) {
    out = maximum(Tensor::full(out.shape(), kPoolPad), out);
  }
  return out;
}

Tensor CausalPointNetEncoder::step(const Tensor & frame, Stream & stream) const
{
  NoGradGuard no_grad;
  const Tensor a1 = mlp1_(frame);
  const Tensor p1 = pool_step(a1, stream.pool1, stream.recent1, stream.frames);
  const Tensor a2 = mlp2_(concat_lastdim({a1, p1}));
  const Tensor p2 = pool_step(a2, stream.pool2, stream.recent2, stream.frames);
  ++stream.frames;
  return mlp3_(p2);
}

// ---------------------------------------------------------------------------
// State-space block

SsmBlock::SsmBlock(ParamStore & store, Initializer & init, const std::string & name, const SsmConfig & config)
: config_(config)
{
  if (config.head_dim == 0 || config.d_inner() % config.head_dim != 0) {
    throw ConfigError("ssm: expand * d_model must be divisible by head_dim", "model.ssm.head_dim");
  }
  const std::size_t di = config.d_inner(), S = config.d_state, H = config.heads();
  norm_ = store.create(name + ".norm.gain", {config.d_model});
  init.constant(norm_, 1.0);
  in_proj_ = store.create(name + ".in_proj.weight", {config.d_model, 2 * di + 2 * S + H});
  init.truncated_normal(in_proj_, kInitStd);
  conv_w_ = store.create(name + ".conv.weight", {conv_channels(), config.d_conv});
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.d_conv));
  init.uniform(conv_w_, -bound, bound);

  // step sizes log-uniform in [1e-3, 1e-1] through the inverse softplus
  dt_bias_ = store.create(name + ".dt_bias", {H});
  std::uniform_real_distribution<double> u(std::log(1e-3), std::log(1e-1));
  for (auto & v : dt_bias_.mutable_data()) {
    const double dt = std::exp(u(init.rng()));
    v = dt + std::log(-std::expm1(-dt));
  }
  round_to_float(dt_bias_.mutable_data());
  log_rate_ = store.create(name + ".log_rate", {H});
  for (std::size_t h = 0; h < H; ++h) {
    const double rate = H == 1 ? 1.0 : 1.0 + 15.0 * static_cast<double>(h) / static_cast<double>(H - 1);
    log_rate_.mutable_data()[h] = std::log(rate);
  }
  round_to_float(log_rate_.mutable_data());
  skip_ = store.create(name + ".skip", {H});
  init.constant(skip_, 1.0);
  gate_norm_ = store.create(name + ".gate_norm.gain", {di});
  init.constant(gate_norm_, 1.0);
  out_proj_ = store.create(name + ".out_proj.weight", {di, config.d_model});
  init.truncated_normal(out_proj_, kInitStd);
}

Tensor SsmBlock::forward(const Tensor & h) const
{
  const std::size_t R = h.dim(0), L = h.dim(1);
  const std::size_t di = config_.d_inner(), S = config_.d_state, H = config_.heads(), P = config_.head_dim;
  const Tensor proj = linear(rms_norm(h, norm_), in_proj_);
  const Tensor z = slice_lastdim(proj, 0, di);
  const Tensor xbc = silu(causal_conv1d(slice_lastdim(proj, di, di + 2 * S), conv_w_));
  const Tensor dt = softplus(add_lastdim(slice_lastdim(proj, 2 * di + 2 * S, H), dt_bias_));
  const Tensor x = reshape(slice_lastdim(xbc, 0, di), {R, L, H, P});
  const Tensor B = slice_lastdim(xbc, di, S);
  const Tensor C = slice_lastdim(xbc, di + S, S);
  const Tensor y = reshape(ssm_scan(x, dt, exp(log_rate_), B, C, skip_, config_.chunk), {R, L, di});
  return add(h, linear(rms_norm(mul(y, silu(z)), gate_norm_), out_proj_));
}

SsmBlock::Stream SsmBlock::start_stream(std::size_t rows) const
{
  Stream s;
  s.rows = rows;
  s.conv.assign(rows * (config_.d_conv - 1) * conv_channels(), 0.0);
  s.state.assign(rows * config_.heads() * config_.head_dim * config_.d_state, 0.0);
  return s;
}

Tensor SsmBlock::step(const Tensor & h, Stream & stream) const
{
  NoGradGuard no_grad;
  const std::size_t R = h.dim(0);
  if (R != stream.rows) {
    throw ShapeError("SsmBlock::step: stream has " + std::to_string(stream.rows) + " rows, input " + shape_str(h.shape()));
  }
  const std::size_t di = config_.d_inner(), S = config_.d_state, H = config_.heads(), P = config_.head_dim;
  const std::size_t K = config_.d_conv, Cc = conv_channels();
  const Tensor proj = linear(rms_norm(h, norm_), in_proj_);
  const std::size_t width = proj.dim(-1);
  const auto pd = proj.data();
  const auto w = conv_w_.data();
  std::vector<double> rate(H);
  for (std::size_t k = 0; k < H; ++k) rate[k] = std::exp(log_rate_.data()[k]);

  std::vector<double> gated(R * di);
  std::vector<double> conv_out(Cc), dt(H), y(di);
  for (std::size_t r = 0; r < R; ++r) {
    const double * row = pd.data() + r * width;
    const double * xbc = row + di;
    double * buf = stream.conv.data() + r * (K - 1) * Cc;
    for (std::size_t c = 0; c < Cc; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        const double v = j + 1 == K ? xbc[c] : buf[j * Cc + c];
        acc += w[c * K + j] * v;
      }
      conv_out[c] = silu_scalar(acc);
    }
    if (K > 1) {
      std::copy(buf + Cc, buf + (K - 1) * Cc, buf);
      std::copy(xbc, xbc + Cc, buf + (K - 2) * Cc);
    }
    for (std::size_t k = 0; k < H; ++k) dt[k] = softplus_scalar(row[2 * di + 2 * S + k] + dt_bias_.data()[k]);
    ssm_scan_step(
      H, P, S, conv_out.data(), dt.data(), rate.data(), conv_out.data() + di, conv_out.data() + di + S,
      skip_.data().data(), stream.state.data() + r * H * P * S, y.data());
    for (std::size_t i = 0; i < di; ++i) gated[r * di + i] = y[i] * silu_scalar(row[i]);
  }
  const Tensor g = Tensor::from_data({R, di}, std::move(gated));
  return add(h, linear(rms_norm(g, gate_norm_), out_proj_));
}

SsmEncoder::SsmEncoder(
  ParamStore & store, Initializer & init, const std::string & name, std::size_t in_dim, const SsmConfig & config)
: config_(config)
{
  projector_ = Mlp(store, init, name + ".projector", in_dim, config.d_model, config.d_model, config.projector_depth, false);
  if (projector_.out_features() != config.d_model) {
    throw ConfigError("ssm: projector depth 0 requires input width == d_model", "model.ssm.projector_depth");
  }
  for (std::size_t i = 0; i < config.n_layer; ++i) {
    blocks_.emplace_back(store, init, name + ".block" + std::to_string(i), config);
  }
  final_norm_ = store.create(name + ".final_norm.gain", {config.d_model});
  init.constant(final_norm_, 1.0);
}

Tensor SsmEncoder::forward(const Tensor & inputs) const
{
  Tensor h = projector_(inputs);
  for (const auto & b : blocks_) h = b.forward(h);
  return rms_norm(h, final_norm_);
}

SsmEncoder::Stream SsmEncoder::start_stream(std::size_t rows) const
{
  Stream s;
  for (const auto & b : blocks_) s.blocks.push_back(b.start_stream(rows));
  return s;
}

Tensor SsmEncoder::step(const Tensor & frame, Stream & stream) const
{
  NoGradGuard no_grad;
  Tensor h = projector_(frame);
  for (std::size_t i = 0; i < blocks_.size(); ++i) h = blocks_[i].step(h, stream.blocks[i]);
  return rms_norm(h, final_norm_);
}

// ---------------------------------------------------------------------------

HistoryEncoder::HistoryEncoder(ParamStore & store, Initializer & init, const std::string & name, const EncoderConfig & config)
: config_(config)
{
  if (config.variant == EncoderVariant::kPointNet) {
    pointnet_ = CausalPointNetEncoder(store, init, name + ".pointnet", kAugmentedDim, config.pointnet);
  } else {
    ssm_ = SsmEncoder(store, init, name + ".ssm", kAugmentedDim, config.ssm);
  }
}

std::size_t HistoryEncoder::out_dim() const
{
  return config_.variant == EncoderVariant::kPointNet ? pointnet_.out_dim() : ssm_.out_dim();
}

Tensor HistoryEncoder::forward(const Tensor & augmented) const
{
  return config_.variant == EncoderVariant::kPointNet ? pointnet_.forward(augmented) : ssm_.forward(augmented);
}

Tensor HistoryEncoder::encode(const Tensor & positions) const
{
  if (positions.rank() != 4 || positions.dim(3) != 2) {
    throw ShapeError("encode: positions must be [B, N, T, 2], got " + shape_str(positions.shape()));
  }
  const std::size_t B = positions.dim(0), N = positions.dim(1), T = positions.dim(2);
  const Tensor aug = reshape(velocity_augment(positions), {B * N, T, kAugmentedDim});
  return reshape(forward(aug), {B, N, T, out_dim()});
}

HistoryEncoder::Stream HistoryEncoder::start_stream(std::size_t rows) const
{
  Stream s;
  s.rows = rows;
  if (config_.variant == EncoderVariant::kPointNet) {
    s.pointnet = pointnet_.start_stream();
  } else {
    s.ssm = ssm_.start_stream(rows);
  }
  return s;
}

Tensor HistoryEncoder::step(const Tensor & augmented_frame, Stream & stream) const
{
  ++stream.frames;
  return config_.variant == EncoderVariant::kPointNet ? pointnet_.step(augmented_frame, stream.pointnet)
                                                     : ssm_.step(augmented_frame, stream.ssm);
}

}  // namespace ctraj
