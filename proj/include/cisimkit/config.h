// Copyright 2026 The cisimkit Authors.
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

#ifndef CISIMKIT_CONFIG_H_
#define CISIMKIT_CONFIG_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cisimkit {

// Minimal TOML-like key/value store:
//
//   # comment
//   [vocoder]
//   band_edges = [400, 887, 1750, 3282, 6000]
//   pre_emphasis_coeff = 0.97
//   [ace]
//   adapt = true
//
// Keys inside a [section] are addressed as "section.key". Values are kept
// as text and converted on access; arrays are comma-separated inside [].
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(const std::string& text);
  static KeyValueConfig Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  void Set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::optional<double> GetDouble(const std::string& key) const;
  std::optional<int> GetInt(const std::string& key) const;
  std::optional<bool> GetBool(const std::string& key) const;
  std::optional<std::string> GetString(const std::string& key) const;
  std::optional<std::vector<double>> GetDoubleList(const std::string& key) const;
  std::optional<std::vector<int>> GetIntList(const std::string& key) const;

  // Serializes back, grouping dotted keys into sections.
  std::string ToString() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Formats a list as "[a, b, c]" using the shortest round-tripping text.
std::string FormatList(const std::vector<double>& values);
std::string FormatNumber(double value);

}  // namespace cisimkit

#endif  // CISIMKIT_CONFIG_H_
