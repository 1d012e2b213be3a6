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

#ifndef TEXP_CONFIG_H_
#define TEXP_CONFIG_H_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace texp {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Flat "key = value" text with dotted section prefixes ("train.lr = 0.05").
// '#' starts a comment; blank lines are ignored; list values are
// comma-separated.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile Parse(const std::string& text, const std::string& origin = "<string>");
  static ConfigFile Load(const std::string& path);

  void Set(const std::string& key, const std::string& value);
  // "key=value" form, as given on a command line.
  void SetAssignment(const std::string& assignment);
  bool Has(const std::string& key) const { return values_.count(key) > 0; }

  // Overlays `other` on this file. With `known_keys_only`, keys absent here
  // are rejected.
  void Merge(const ConfigFile& other, bool known_keys_only);

  std::string GetString(const std::string& key) const;
  double GetReal(const std::string& key) const;
  std::int64_t GetInt(const std::string& key) const;
  std::uint64_t GetUnsigned(const std::string& key) const;
  bool GetBool(const std::string& key) const;
  std::vector<double> GetRealList(const std::string& key) const;
  std::vector<int> GetIntList(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  // Sorted "key = value" lines; stable input for hashing.
  std::string Canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

std::string Trim(const std::string& text);

}  // namespace texp

#endif  // TEXP_CONFIG_H_
