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

#include "ctraj/checkpoint.hpp"

#include "ctraj/binary_io.hpp"
#include "ctraj/error.hpp"

namespace ctraj
{

const CheckpointTensor * Checkpoint::find(const std::string & name) const
{
  for (const auto & t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const std::string * Checkpoint::meta_value(const std::string & key) const
{
  for (const auto & [k, v] : meta) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint & ckpt)
{
  ByteWriter w;
  w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
  w.u32(kCheckpointVersion);
  const std::string meta = format_kv(ckpt.meta);
  w.u32(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta.data(), meta.size());
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto & t : ckpt.tensors) {
    if (shape_numel(t.shape) != t.data.size()) {
      throw ShapeError("checkpoint: tensor '" + t.name + "' has " + std::to_string(t.data.size()) +
                       " values for shape " + shape_str(t.shape));
    }
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (const auto d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    for (const float v : t.data) w.f32(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t> & bytes)
{
  ByteReader r(bytes);
  const std::string magic = r.string(sizeof(kCheckpointMagic) - 1, "magic");
  if (magic != kCheckpointMagic) throw ParseError("not a CTCKPT1 checkpoint", 0);
  const std::uint64_t at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), at);
  }
  Checkpoint ckpt;
  const std::uint32_t meta_len = r.u32("metadata length");
  const std::uint64_t meta_at = r.offset();
  try {
    ckpt.meta = parse_kv(r.string(meta_len, "metadata"));
  } catch (const ParseError & e) {
    throw ParseError(std::string("checkpoint metadata: ") + e.what(), meta_at + e.offset());
  }
  const std::uint32_t count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointTensor t;
    t.name = r.string(r.u32("name length"), "tensor name");
    const std::uint32_t ndim = r.u32("rank");
    if (ndim > 8) throw ParseError("implausible tensor rank " + std::to_string(ndim), r.offset() - 4);
    for (std::uint32_t k = 0; k < ndim; ++k) t.shape.push_back(r.u32("dimension"));
    const std::size_t n = shape_numel(t.shape);
    if (n * 4 > r.remaining()) throw ParseError("tensor '" + t.name + "' data truncated", r.offset());
    t.data.resize(n);
    for (auto & v : t.data) v = r.f32("tensor data");
    ckpt.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after checkpoint", r.offset());
  return ckpt;
}

void write_checkpoint(const std::string & path, const Checkpoint & ckpt)
{
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::string & path) { return decode_checkpoint(read_file_bytes(path)); }

Checkpoint model_checkpoint(const Model & model, const KeyValues & extra_meta)
{
  Checkpoint ckpt;
  for (const auto & [k, v] : model_config_items(model.config())) ckpt.meta.emplace_back("model." + k, v);
  ckpt.meta.insert(ckpt.meta.end(), extra_meta.begin(), extra_meta.end());
  for (const auto & p : model.params().items()) {
    const auto d = p.tensor.data();
    ckpt.tensors.push_back({p.name, p.tensor.shape(), std::vector<float>(d.begin(), d.end())});
  }
  return ckpt;
}

ModelConfig checkpoint_model_config(const Checkpoint & ckpt)
{
  KeyValues items;
  for (const auto & [k, v] : ckpt.meta) {
    if (k.rfind("model.", 0) == 0) items.emplace_back(k.substr(6), v);
  }
  return model_config_from_items(items);
}

void copy_parameters(const Checkpoint & ckpt, Model & model)
{
  for (const auto & p : model.params().items()) {
    const CheckpointTensor * t = ckpt.find(p.name);
    if (t == nullptr) throw ParseError("checkpoint is missing parameter '" + p.name + "'", 0);
    if (t->shape != p.tensor.shape()) {
      throw ParseError("checkpoint parameter '" + p.name + "' has shape " + shape_str(t->shape) + ", model expects " +
                       shape_str(p.tensor.shape()), 0);
    }
    Tensor dst = p.tensor;
    auto d = dst.mutable_data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = t->data[i];
  }
}

Model load_model(const Checkpoint & ckpt)
{
  Model model(checkpoint_model_config(ckpt), 0);
  copy_parameters(ckpt, model);
  return model;
}

}  // namespace ctraj
