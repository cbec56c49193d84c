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

#include "ctraj/relation.hpp"

#include "ctraj/attention.hpp"
#include "ctraj/error.hpp"
#include "ctraj/ops.hpp"

namespace ctraj
{

namespace
{

void check_heads(std::size_t d, std::size_t heads)
{
  if (heads == 0 || d % heads != 0) {
    throw ConfigError(
      "relation: d_model " + std::to_string(d) + " is not divisible by " + std::to_string(heads) + " heads",
      "model.relation.heads");
  }
}

Tensor split_heads(const Tensor & t, std::size_t heads)
{
  Shape s = t.shape();
  const std::size_t d = s.back();
  s.back() = heads;
  s.push_back(d / heads);
  return reshape(t, std::move(s));
}

}  // namespace

StandardBlock::StandardBlock(
  ParamStore & store, Initializer & init, const std::string & name, std::size_t d, std::size_t heads, std::size_t ff)
: heads_(heads),
  ln1_(store, name + ".ln1", d),
  ln2_(store, name + ".ln2", d),
  q_(store, init, name + ".q", d, d),
  k_(store, init, name + ".k", d, d),
  v_(store, init, name + ".v", d, d),
  o_(store, init, name + ".o", d, d),
  ff_(store, init, name + ".ff", d, ff, d, 2, false)
{
  check_heads(d, heads);
}

Tensor StandardBlock::forward(const Tensor & h) const
{
  const Tensor u = ln1_(h);
  const Tensor a = self_attention(split_heads(q_(u), heads_), split_heads(k_(u), heads_), split_heads(v_(u), heads_));
  const Tensor h1 = add(h, o_(reshape(a, h.shape())));
  return add(h1, ff_(ln2_(h1)));
}

SrteBlock::SrteBlock(
  ParamStore & store, Initializer & init, const std::string & name, std::size_t d, std::size_t heads, std::size_t ff,
  std::size_t x_dim)
: heads_(heads),
  ln1_(store, name + ".ln1", d),
  ln2_(store, name + ".ln2", d),
  mesh_(store, init, name + ".mesh", x_dim + 2 * d, d),
  q_(store, init, name + ".q", d, d),
  k_(store, init, name + ".k", d, d),
  v_(store, init, name + ".v", d, d),
  o_(store, init, name + ".o", d, d),
  ff_(store, init, name + ".ff", d, ff, d, 2, false)
{
  check_heads(d, heads);
}

Tensor SrteBlock::forward(const Tensor & h, const Tensor & x) const
{
  const Tensor u = ln1_(h);
  const Tensor e = gelu(mesh_(build_mesh(u, x)));  // [R, N, N, d]
  const Tensor a = pair_attention(split_heads(q_(u), heads_), split_heads(k_(e), heads_), split_heads(v_(e), heads_));
  const Tensor h1 = add(h, o_(reshape(a, h.shape())));
  return add(h1, ff_(ln2_(h1)));
}

RelationEncoder::RelationEncoder(
  ParamStore & store, Initializer & init, const std::string & name, const RelationConfig & config, std::size_t x_dim)
: config_(config)
{
  const std::size_t d = config.d_model;
  for (std::size_t i = 0; i < config.standard_blocks; ++i) {
    standard_.emplace_back(store, init, name + ".std" + std::to_string(i), d, config.heads, config.standard_ff);
  }
  for (std::size_t i = 0; i < config.srte_blocks; ++i) {
    if (config.use_srte) {
      srte_.emplace_back(store, init, name + ".srte" + std::to_string(i), d, config.heads, config.srte_ff, x_dim);
    } else {
      standard_.emplace_back(
        store, init, name + ".std" + std::to_string(config.standard_blocks + i), d, config.heads, config.srte_ff);
    }
  }
}

Tensor RelationEncoder::forward(const Tensor & h, const Tensor & x) const
{
  if (h.rank() != 3 || x.rank() != 3 || h.dim(0) != x.dim(0) || h.dim(1) != x.dim(1)) {
    throw ShapeError("relation: expected h [R, N, d] and x [R, N, c], got " + shape_str(h.shape()) + " and " +
                     shape_str(x.shape()));
  }
  Tensor out = h;
  for (const auto & b : standard_) out = b.forward(out);
  for (const auto & b : srte_) out = b.forward(out, x);
  return out;
}

}  // namespace ctraj
