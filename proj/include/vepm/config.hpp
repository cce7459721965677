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

// Flat key=value text with [section] headers. Used both for run
// configuration and for the manifest that records a resolved run.

#ifndef VEPM_CONFIG_HPP_
#define VEPM_CONFIG_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vepm {

class IniConfig {
 public:
  using Entries = std::vector<std::pair<std::string, std::string>>;

  /// Blank lines and lines starting with '#' or ';' are skipped. Keys before
  /// the first header belong to the "" section. Throws ConfigError with the
  /// line number on malformed input or a repeated key.
  static IniConfig parse(std::istream& in);
  static IniConfig load(const std::string& path);

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;
  /// Inserts or replaces; new sections and keys keep insertion order.
  void set(const std::string& section, const std::string& key, const std::string& value);
  const Entries* section(const std::string& name) const;
  const std::vector<std::pair<std::string, Entries>>& sections() const { return sections_; }

  /// Keys of `section` that are not in `known`, so callers can reject typos.
  std::vector<std::string> unknown_keys(const std::string& section, const std::vector<std::string>& known) const;

  void write(std::ostream& out) const;
  std::string to_string() const;

 private:
  Entries& section_for(const std::string& name);

  std::vector<std::pair<std::string, Entries>> sections_;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace vepm

#endif  // VEPM_CONFIG_HPP_
