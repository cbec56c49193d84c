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

#ifndef CTRAJ__CHECKPOINT_HPP_
#define CTRAJ__CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ctraj/kv.hpp"
#include "ctraj/model.hpp"
#include "ctraj/tensor.hpp"

namespace ctraj
{

/**
 * "CTCKPT1" container, little-endian:
 *
 *   magic[7] u32 version
 *   u32 meta_len, meta_len bytes of `key = value` text
 *   u32 count, then per tensor: u32 name_len, name, u32 ndim, u32 dims[ndim], f32 data[numel]
 */
struct CheckpointTensor
{
  std::string name;
  Shape shape;
  std::vector<float> data;
};

struct Checkpoint
{
  KeyValues meta;
  std::vector<CheckpointTensor> tensors;

  const CheckpointTensor * find(const std::string & name) const;
  const std::string * meta_value(const std::string & key) const;
};

constexpr char kCheckpointMagic[] = "CTCKPT1";
constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint & ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t> & bytes);

void write_checkpoint(const std::string & path, const Checkpoint & ckpt);
Checkpoint read_checkpoint(const std::string & path);

// Parameters as float32 tensors plus the model config under "model.*" keys.
Checkpoint model_checkpoint(const Model & model, const KeyValues & extra_meta = {});
ModelConfig checkpoint_model_config(const Checkpoint & ckpt);
// Builds the model and copies every parameter; missing or misshapen tensors raise ParseError.
Model load_model(const Checkpoint & ckpt);
void copy_parameters(const Checkpoint & ckpt, Model & model);

}  // namespace ctraj

#endif  // CTRAJ__CHECKPOINT_HPP_
