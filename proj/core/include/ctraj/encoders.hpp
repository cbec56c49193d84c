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

#ifndef CTRAJ__ENCODERS_HPP_
#define CTRAJ__ENCODERS_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ctraj/nn.hpp"
#include "ctraj/tensor.hpp"

namespace ctraj
{

enum class EncoderVariant
{
  kPointNet,
  kSsm,
};

EncoderVariant parse_encoder_variant(std::string_view name);
std::string_view to_string(EncoderVariant variant);

/// Appends per-frame velocity v_t = x_t - x_{t-1} (v_0 = 0) to positions.
/// X: [..., T, 2] -> [..., T, 4] laid out as (x, y, vx, vy).
Tensor velocity_augment(const Tensor & X);

struct PointNetConfig
{
  std::size_t hidden{64};
  std::array<std::size_t, 3> depths{1, 2, 2};
  std::size_t window{0};  // lookback length; 0 pools over the full prefix
};

struct SsmConfig
{
  std::size_t d_model{64};
  std::size_t d_state{128};
  std::size_t d_conv{4};
  std::size_t expand{4};
  std::size_t head_dim{16};
  std::size_t n_layer{3};
  std::size_t chunk{32};  // 0 selects the sequential scan in the forward pass
  std::size_t projector_depth{2};

  std::size_t d_inner() const { return expand * d_model; }
  std::size_t heads() const { return d_inner() / head_dim; }
};

struct EncoderConfig
{
  EncoderVariant variant{EncoderVariant::kPointNet};
  PointNetConfig pointnet;
  SsmConfig ssm;
};

/**
 * @brief Causal PointNet: MLP -> lookback max-pool -> concat -> MLP -> lookback max-pool -> MLP.
 *
 * Operates on [R, T, in] and keeps every output at t a function of inputs at
 * frames <= t only.
 */
class CausalPointNetEncoder
{
public:
  struct Stream
  {
    std::size_t frames{0};
    // running maxima (full prefix) or recent pre-pool rows (finite window)
    Tensor pool1, pool2;
    std::vector<Tensor> recent1, recent2;
  };

  CausalPointNetEncoder() = default;
  CausalPointNetEncoder(
    ParamStore & store, Initializer & init, const std::string & name, std::size_t in_dim, const PointNetConfig & config);

  Tensor forward(const Tensor & inputs) const;
  Stream start_stream() const { return {}; }
  // One frame [R, in] -> [R, out]; no gradient tracking.
  Tensor step(const Tensor & frame, Stream & stream) const;
  std::size_t out_dim() const { return mlp3_.out_features(); }

private:
  Tensor pool(const Tensor & x) const;
  Tensor pool_step(const Tensor & row, Tensor & running, std::vector<Tensor> & recent, std::size_t frames) const;

  PointNetConfig config_;
  Mlp mlp1_, mlp2_, mlp3_;
};

/**
 * Gated selective state-space block (scalar decay per head, one B/C group).
 *
 *   u      = rmsnorm(h)
 *   z, xBC, dt_raw = split(u W_in)
 *   xBC    = silu(causal_conv(xBC))
 *   dt     = softplus(dt_raw + dt_bias), rate = exp(log_rate)
 *   y      = scan(x, dt, rate, B, C) + D x
 *   out    = h + rmsnorm(y * silu(z)) W_out
 */
class SsmBlock
{
public:
  struct Stream
  {
    std::size_t rows{0};
    std::vector<double> conv;   // [R, d_conv - 1, conv_channels], oldest first
    std::vector<double> state;  // [R, H, P, S]
  };

  SsmBlock() = default;
  SsmBlock(ParamStore & store, Initializer & init, const std::string & name, const SsmConfig & config);

  Tensor forward(const Tensor & h) const;  // [R, L, d_model]
  Stream start_stream(std::size_t rows) const;
  Tensor step(const Tensor & h, Stream & stream) const;  // [R, d_model]

private:
  std::size_t conv_channels() const { return config_.d_inner() + 2 * config_.d_state; }

  SsmConfig config_;
  Tensor norm_, in_proj_, conv_w_, dt_bias_, log_rate_, skip_, gate_norm_, out_proj_;
};

class SsmEncoder
{
public:
  struct Stream
  {
    std::vector<SsmBlock::Stream> blocks;
  };

  SsmEncoder() = default;
  SsmEncoder(ParamStore & store, Initializer & init, const std::string & name, std::size_t in_dim, const SsmConfig & config);

  Tensor forward(const Tensor & inputs) const;  // [R, T, in] -> [R, T, d_model]
  Stream start_stream(std::size_t rows) const;
  Tensor step(const Tensor & frame, Stream & stream) const;
  std::size_t out_dim() const { return config_.d_model; }

private:
  SsmConfig config_;
  Mlp projector_;
  std::vector<SsmBlock> blocks_;
  Tensor final_norm_;
};

/// Per-agent causal history encoder; agents are encoded independently.
class HistoryEncoder
{
public:
  struct Stream
  {
    std::size_t rows{0};
    std::size_t frames{0};
    CausalPointNetEncoder::Stream pointnet;
    SsmEncoder::Stream ssm;
  };

  HistoryEncoder() = default;
  HistoryEncoder(ParamStore & store, Initializer & init, const std::string & name, const EncoderConfig & config);

  // Augmented inputs [R, T, 4] -> [R, T, out_dim].
  Tensor forward(const Tensor & augmented) const;
  // Positions [B, N, T, 2] -> features [B, N, T, out_dim] (velocity augmentation included).
  Tensor encode(const Tensor & positions) const;

  Stream start_stream(std::size_t rows) const;
  // One augmented frame [R, 4] -> [R, out_dim].
  Tensor step(const Tensor & augmented_frame, Stream & stream) const;

  std::size_t out_dim() const;
  EncoderVariant variant() const { return config_.variant; }

private:
  EncoderConfig config_;
  CausalPointNetEncoder pointnet_;
  SsmEncoder ssm_;
};

constexpr std::size_t kAugmentedDim = 4;

}  // namespace ctraj

#endif  // CTRAJ__ENCODERS_HPP_
