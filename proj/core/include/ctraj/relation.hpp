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

#ifndef CTRAJ__RELATION_HPP_
#define CTRAJ__RELATION_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "ctraj/nn.hpp"
#include "ctraj/tensor.hpp"

namespace ctraj
{

struct RelationConfig
{
  std::size_t d_model{128};
  std::size_t heads{8};
  std::size_t standard_blocks{4};
  std::size_t standard_ff{512};
  std::size_t srte_blocks{4};
  std::size_t srte_ff{256};
  // false replaces the SRTE stack with the same number of standard blocks of width srte_ff
  bool use_srte{true};
};

// Pre-norm multi-head self-attention over agents plus a position-wise feedforward.
class StandardBlock
{
public:
  StandardBlock() = default;
  StandardBlock(ParamStore & store, Initializer & init, const std::string & name, std::size_t d, std::size_t heads,
                std::size_t ff);

  Tensor forward(const Tensor & h) const;  // [R, N, d]

private:
  std::size_t heads_{1};
  LayerNormParams ln1_, ln2_;
  Linear q_, k_, v_, o_;
  Mlp ff_;
};

/**
 * Spatial relation block: queries come from the agent feature, keys and values
 * from the query's row of the pairwise mesh [X_q - X_k ; z_q ; z_k].
 */
class SrteBlock
{
public:
  SrteBlock() = default;
  SrteBlock(ParamStore & store, Initializer & init, const std::string & name, std::size_t d, std::size_t heads,
            std::size_t ff, std::size_t x_dim);

  Tensor forward(const Tensor & h, const Tensor & x) const;  // h [R, N, d], x [R, N, x_dim]

private:
  std::size_t heads_{1};
  LayerNormParams ln1_, ln2_;
  Linear mesh_, q_, k_, v_, o_;
  Mlp ff_;
};

// Applies all blocks independently to each row (one row = one scene at one timestep).
class RelationEncoder
{
public:
  RelationEncoder() = default;
  RelationEncoder(ParamStore & store, Initializer & init, const std::string & name, const RelationConfig & config,
                  std::size_t x_dim);

  Tensor forward(const Tensor & h, const Tensor & x) const;
  const RelationConfig & config() const { return config_; }

private:
  RelationConfig config_;
  std::vector<StandardBlock> standard_;
  std::vector<SrteBlock> srte_;
};

}  // namespace ctraj

#endif  // CTRAJ__RELATION_HPP_
