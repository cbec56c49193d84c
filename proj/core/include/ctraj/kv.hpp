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

#ifndef CTRAJ__KV_HPP_
#define CTRAJ__KV_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ctraj
{

// Ordered `key = value` pairs. Blank lines and lines starting with '#' are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Throws ParseError (byte offset of the bad line) on malformed lines and
// ConfigError on duplicate keys.
KeyValues parse_kv(std::string_view text);
KeyValues read_kv_file(const std::string & path);
std::string format_kv(const KeyValues & items);
void write_kv_file(const std::string & path, const KeyValues & items);

// Value parsers; failures raise ConfigError naming `key`.
std::size_t parse_size(const std::string & key, const std::string & value);
std::uint64_t parse_u64(const std::string & key, const std::string & value);
double parse_real(const std::string & key, const std::string & value);
bool parse_bool(const std::string & key, const std::string & value);
std::vector<std::size_t> parse_size_list(const std::string & key, const std::string & value);
std::vector<double> parse_real_list(const std::string & key, const std::string & value);

// Shortest text that parses back to exactly `value`.
std::string format_real(double value);

}  // namespace ctraj

#endif  // CTRAJ__KV_HPP_
