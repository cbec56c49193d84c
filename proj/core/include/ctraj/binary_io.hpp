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

#ifndef CTRAJ__BINARY_IO_HPP_
#define CTRAJ__BINARY_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ctraj
{

// Little-endian encoder for the binary containers.
class ByteWriter
{
public:
  void bytes(const void * data, std::size_t size);
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void f32(float v);
  std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked decoder; every read failure raises ParseError at the current offset.
class ByteReader
{
public:
  explicit ByteReader(const std::vector<std::uint8_t> & bytes) : bytes_(bytes) {}

  std::uint8_t u8(const char * what);
  std::uint32_t u32(const char * what);
  float f32(const char * what);
  std::string string(std::size_t size, const char * what);

  std::uint64_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  void need(std::size_t size, const char * what) const;

  const std::vector<std::uint8_t> & bytes_;
  std::size_t pos_{0};
};

std::vector<std::uint8_t> read_file_bytes(const std::string & path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string & path, const std::vector<std::uint8_t> & bytes);

}  // namespace ctraj

#endif  // CTRAJ__BINARY_IO_HPP_
