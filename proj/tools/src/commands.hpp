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

#ifndef CTRAJ_TOOLS__COMMANDS_HPP_
#define CTRAJ_TOOLS__COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace ctraj::cli
{

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Runs `ctraj <subcommand> ...`; args excludes the program name.
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

}  // namespace ctraj::cli

#endif  // CTRAJ_TOOLS__COMMANDS_HPP_
