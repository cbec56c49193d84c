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

#include "ctraj/nn.hpp"

#include "ctraj/error.hpp"
#include "ctraj/ops.hpp"

namespace ctraj
{

Tensor ParamStore::create(const std::string & name, Shape shape)
{
  if (index_.count(name)) {
    throw ConfigError("duplicate parameter name '" + name + "'", name);
  }
  index_.emplace(name, params_.size());
  params_.push_back({name, Tensor::zeros(std::move(shape), true)});
  return params_.back().tensor;
}

std::vector<Tensor> ParamStore::tensors() const
{
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto & p : params_) out.push_back(p.tensor);
  return out;
}

const Tensor * ParamStore::find(const std::string & name) const
{
  const auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second].tensor;
}

std::size_t ParamStore::scalar_count() const
{
  std::size_t n = 0;
  for (const auto & p : params_) n += p.tensor.numel();
  return n;
}

void ParamStore::zero_grad()
{
  for (auto & p : params_) p.tensor.zero_grad();
}

void round_to_float(std::span<double> values)
{
  for (auto & v : values) v = static_cast<double>(static_cast<float>(v));
}

void Initializer::truncated_normal(Tensor & t, double std)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto & v : t.mutable_data()) {
    double z = normal(rng_);
    while (z < -2.0 || z > 2.0) z = normal(rng_);
    v = z * std;
  }
  round_to_float(t.mutable_data());
}

void Initializer::constant(Tensor & t, double value)
{
  for (auto & v : t.mutable_data()) v = value;
  round_to_float(t.mutable_data());
}

void Initializer::uniform(Tensor & t, double lo, double hi)
{
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto & v : t.mutable_data()) v = u(rng_);
  round_to_float(t.mutable_data());
}

Linear::Linear(
  ParamStore & store, Initializer & init, const std::string & name, std::size_t in, std::size_t out, bool with_bias)
{
  weight = store.create(name + ".weight", {in, out});
  init.truncated_normal(weight, kInitStd);
  if (with_bias) {
    bias = store.create(name + ".bias", {out});
  }
}

Tensor Linear::operator()(const Tensor & x) const { return linear(x, weight, bias); }

Mlp::Mlp(
  ParamStore & store, Initializer & init, const std::string & name, std::size_t in, std::size_t hidden,
  std::size_t out, std::size_t depth, bool activate_last)
: activate_last_(activate_last), out_(depth == 0 ? in : out)
{
  for (std::size_t i = 0; i < depth; ++i) {
    const std::size_t a = i == 0 ? in : hidden;
    const std::size_t b = i + 1 == depth ? out : hidden;
    layers_.emplace_back(store, init, name + "." + std::to_string(i), a, b);
  }
}

Tensor Mlp::operator()(const Tensor & x) const
{
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i](h);
    if (i + 1 < layers_.size() || activate_last_) h = gelu(h);
  }
  return h;
}

LayerNormParams::LayerNormParams(ParamStore & store, const std::string & name, std::size_t dim)
{
  gain = store.create(name + ".gain", {dim});
  for (auto & v : gain.mutable_data()) v = 1.0;
  bias = store.create(name + ".bias", {dim});
}

Tensor LayerNormParams::operator()(const Tensor & x) const { return layer_norm(x, gain, bias); }

}  // namespace ctraj
