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

#ifndef CTRAJ__ERROR_HPP_
#define CTRAJ__ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ctraj
{

// Tensor shapes do not agree with an operation's contract.
class ShapeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Invalid model, run or trainer configuration (unknown key, bad value, unknown variant).
class ConfigError : public std::invalid_argument
{
public:
  explicit ConfigError(const std::string & what, std::string key = {})
  : std::invalid_argument(what), key_(std::move(key))
  {
  }

  const std::string & key() const { return key_; }

private:
  std::string key_;
};

// Malformed binary or text input. `offset` is the byte offset where parsing failed.
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string & what, std::uint64_t offset)
  : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset)
  {
  }

  std::uint64_t offset() const { return offset_; }

private:
  std::uint64_t offset_;
};

// Data violates a semantic precondition (too few frames, mismatched agents, ...).
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite values where finite ones are required.
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctraj

#endif  // CTRAJ__ERROR_HPP_
