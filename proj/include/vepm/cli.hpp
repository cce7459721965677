// Copyright 2026 The vepm Authors.
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

#ifndef VEPM_CLI_HPP_
#define VEPM_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "vepm/config.hpp"
#include "vepm/squirrels_world.hpp"

namespace vepm::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "VEPM_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "results";

/// Starts from `base` and applies every key of the [sw] section.
sw::SwConfig apply_sw_section(sw::SwConfig base, const IniConfig& config);

/// Entry point of the command-line tool. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vepm::cli

#endif  // VEPM_CLI_HPP_
