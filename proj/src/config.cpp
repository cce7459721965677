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

#include "vepm/config.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "vepm/error.hpp"

namespace vepm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

IniConfig IniConfig::parse(std::istream& in) {
  IniConfig cfg;
  std::string current;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header '" + text + "'");
      }
      current = trim(text.substr(1, text.size() - 2));
      cfg.section_for(current);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" + text + "'");
    }
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (cfg.get(current, key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' repeated in section [" + current +
                        "]");
    }
    cfg.set(current, key, trim(text.substr(eq + 1)));
  }
  return cfg;
}

IniConfig IniConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

const IniConfig::Entries* IniConfig::section(const std::string& name) const {
  for (const auto& [n, entries] : sections_) {
    if (n == name) return &entries;
  }
  return nullptr;
}

bool IniConfig::has_section(const std::string& name) const { return section(name) != nullptr; }

IniConfig::Entries& IniConfig::section_for(const std::string& name) {
  for (auto& [n, entries] : sections_) {
    if (n == name) return entries;
  }
  sections_.emplace_back(name, Entries{});
  return sections_.back().second;
}

std::optional<std::string> IniConfig::get(const std::string& sec, const std::string& key) const {
  const Entries* entries = section(sec);
  if (entries == nullptr) return std::nullopt;
  for (const auto& [k, v] : *entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void IniConfig::set(const std::string& sec, const std::string& key, const std::string& value) {
  Entries& entries = section_for(sec);
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

std::vector<std::string> IniConfig::unknown_keys(const std::string& sec, const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  const Entries* entries = section(sec);
  if (entries == nullptr) return out;
  for (const auto& [k, v] : *entries) {
    if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
  }
  return out;
}

void IniConfig::write(std::ostream& out) const {
  bool first = true;
  for (const auto& [name, entries] : sections_) {
    if (!name.empty()) {
      if (!first) out << '\n';
      out << '[' << name << "]\n";
    }
    for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
    first = false;
  }
}

std::string IniConfig::to_string() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace vepm
