// Copyright 2026 The TEXP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "texp/config.h"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace texp {
namespace {

[[noreturn]] void Fail(const std::string& key, const std::string& message) {
  throw ConfigError(key + ": " + message);
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double ParseRealField(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE) {
    Fail(key, "expected a real number, got '" + text + "'");
  }
  return value;
}

std::int64_t ParseIntField(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long long value = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || errno == ERANGE) {
    Fail(key, "expected an integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

std::string Trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

ConfigFile ConfigFile::Parse(const std::string& text, const std::string& origin) {
  ConfigFile config;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_number) +
                        ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_number) + ": empty key");
    }
    if (config.Has(key)) {
      throw ConfigError(origin + ":" + std::to_string(line_number) +
                        ": duplicate key '" + key + "'");
    }
    config.values_[key] = Trim(line.substr(eq + 1));
  }
  return config;
}

ConfigFile ConfigFile::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return Parse(text.str(), path);
}

void ConfigFile::Set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void ConfigFile::SetAssignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("expected key=value, got '" + assignment + "'");
  }
  Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void ConfigFile::Merge(const ConfigFile& other, bool known_keys_only) {
  for (const auto& [key, value] : other.values_) {
    if (known_keys_only && !Has(key)) Fail(key, "unknown key for this experiment");
    values_[key] = value;
  }
}

std::string ConfigFile::GetString(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) Fail(key, "missing");
  return it->second;
}

double ConfigFile::GetReal(const std::string& key) const {
  return ParseRealField(key, GetString(key));
}

std::int64_t ConfigFile::GetInt(const std::string& key) const {
  return ParseIntField(key, GetString(key));
}

std::uint64_t ConfigFile::GetUnsigned(const std::string& key) const {
  const std::string text = GetString(key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || text[0] == '-' || *end != '\0' || errno == ERANGE) {
    Fail(key, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

bool ConfigFile::GetBool(const std::string& key) const {
  const std::string text = GetString(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  Fail(key, "expected true/false, got '" + text + "'");
}

std::vector<double> ConfigFile::GetRealList(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : SplitList(GetString(key))) {
    out.push_back(ParseRealField(key, item));
  }
  return out;
}

std::vector<int> ConfigFile::GetIntList(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : SplitList(GetString(key))) {
    out.push_back(static_cast<int>(ParseIntField(key, item)));
  }
  return out;
}

std::string ConfigFile::Canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
  return out;
}

}  // namespace texp
