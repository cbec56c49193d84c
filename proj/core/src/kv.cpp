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

#include "ctraj/kv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "ctraj/error.hpp"

namespace ctraj
{

namespace
{

std::string_view trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_kv(std::string_view text)
{
  KeyValues out;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    if (!line.empty() && line.front() != '#') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError("expected 'key = value', got '" + std::string(line) + "'", pos);
      }
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ParseError("empty key", pos);
      if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", key);
      out.emplace_back(std::move(key), std::move(value));
    }
    pos = end + 1;
  }
  return out;
}

KeyValues read_kv_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv(ss.str());
}

std::string format_kv(const KeyValues & items)
{
  std::string out;
  for (const auto & [k, v] : items) out += k + " = " + v + "\n";
  return out;
}

void write_kv_file(const std::string & path, const KeyValues & items)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << format_kv(items);
}

std::size_t parse_size(const std::string & key, const std::string & value)
{
  return static_cast<std::size_t>(parse_u64(key, value));
}

std::uint64_t parse_u64(const std::string & key, const std::string & value)
{
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size() || value.empty()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'", key);
  }
  return v;
}

double parse_real(const std::string & key, const std::string & value)
{
  // allow simple ratios such as 28/94
  const auto slash = value.find('/');
  if (slash != std::string::npos) {
    const double num = parse_real(key, std::string(trim(std::string_view(value).substr(0, slash))));
    const double den = parse_real(key, std::string(trim(std::string_view(value).substr(slash + 1))));
    if (den == 0.0) throw ConfigError("'" + key + "' divides by zero", key);
    return num / den;
  }
  double v = 0.0;
  const char * b = value.data();
  if (!value.empty() && value.front() == '+') ++b;
  const auto [p, ec] = std::from_chars(b, value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size() || value.empty()) {
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'", key);
  }
  return v;
}

bool parse_bool(const std::string & key, const std::string & value)
{
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + value + "'", key);
}

namespace
{

template <typename T, typename F>
std::vector<T> parse_list(const std::string & key, const std::string & value, F parse_one)
{
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t end = value.find(',', pos);
    if (end == std::string::npos) end = value.size();
    const std::string item(trim(std::string_view(value).substr(pos, end - pos)));
    if (item.empty()) throw ConfigError("'" + key + "' has an empty list entry", key);
    out.push_back(parse_one(key, item));
    pos = end + 1;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> parse_size_list(const std::string & key, const std::string & value)
{
  return parse_list<std::size_t>(key, value, parse_size);
}

std::vector<double> parse_real_list(const std::string & key, const std::string & value)
{
  return parse_list<double>(key, value, parse_real);
}

std::string format_real(double value)
{
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, p);
}

}  // namespace ctraj
