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

#ifndef CTRAJ__NN_HPP_
#define CTRAJ__NN_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctraj/tensor.hpp"

namespace ctraj
{

struct NamedTensor
{
  std::string name;
  Tensor tensor;
};

// Ordered, named collection of trainable leaves.
class ParamStore
{
public:
  // New zero-filled leaf with requires_grad=true. Names must be unique.
  Tensor create(const std::string & name, Shape shape);

  const std::vector<NamedTensor> & items() const { return params_; }
  std::vector<Tensor> tensors() const;
  const Tensor * find(const std::string & name) const;
  std::size_t scalar_count() const;
  void zero_grad();

private:
  std::vector<NamedTensor> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Rounds every value to the nearest float32 (parameters live on the float grid).
void round_to_float(std::span<double> values);

class Initializer
{
public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  // Normal(0, std) truncated to +-2 std.
  void truncated_normal(Tensor & t, double std);
  void constant(Tensor & t, double value);
  void uniform(Tensor & t, double lo, double hi);

  std::mt19937_64 & rng() { return rng_; }

private:
  std::mt19937_64 rng_;
};

constexpr double kInitStd = 0.02;

struct Linear
{
  Tensor weight;  // [in, out]
  Tensor bias;    // [out] or undefined

  Linear() = default;
  Linear(ParamStore & store, Initializer & init, const std::string & name, std::size_t in, std::size_t out,
         bool with_bias = true);

  Tensor operator()(const Tensor & x) const;
  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
};

// Stack of Linear layers with GELU between them. `activate_last` also applies
// GELU after the final layer. Depth 0 is the identity.
class Mlp
{
public:
  Mlp() = default;
  Mlp(ParamStore & store, Initializer & init, const std::string & name, std::size_t in, std::size_t hidden,
      std::size_t out, std::size_t depth, bool activate_last);

  Tensor operator()(const Tensor & x) const;
  std::size_t out_features() const { return out_; }
  std::size_t depth() const { return layers_.size(); }

private:
  std::vector<Linear> layers_;
  bool activate_last_{false};
  std::size_t out_{0};
};

struct LayerNormParams
{
  Tensor gain, bias;

  LayerNormParams() = default;
  LayerNormParams(ParamStore & store, const std::string & name, std::size_t dim);
  Tensor operator()(const Tensor & x) const;
};

}  // namespace ctraj

#endif  // CTRAJ__NN_HPP_
