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

#include "ctraj/binary_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "ctraj/error.hpp"

namespace ctraj
{

static_assert(std::endian::native == std::endian::little, "containers assume a little-endian host");

void ByteWriter::bytes(const void * data, std::size_t size)
{
  const auto * p = static_cast<const std::uint8_t *>(data);
  buf_.insert(buf_.end(), p, p + size);
}

void ByteWriter::u32(std::uint32_t v) { bytes(&v, 4); }

void ByteWriter::f32(float v) { bytes(&v, 4); }

void ByteReader::need(std::size_t size, const char * what) const
{
  if (remaining() < size) {
    throw ParseError(std::string("unexpected end of input while reading ") + what, pos_);
  }
}

std::uint8_t ByteReader::u8(const char * what)
{
  need(1, what);
  return bytes_[pos_++];
}

std::uint32_t ByteReader::u32(const char * what)
{
  need(4, what);
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

float ByteReader::f32(const char * what)
{
  need(4, what);
  float v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

std::string ByteReader::string(std::size_t size, const char * what)
{
  need(size, what);
  std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), size);
  pos_ += size;
  return s;
}

std::vector<std::uint8_t> read_file_bytes(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::string & path, const std::vector<std::uint8_t> & bytes)
{
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ctraj
