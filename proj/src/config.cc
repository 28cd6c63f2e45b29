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

#include "cisimkit/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cisimkit/error.h"

namespace cisimkit {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double ParseDouble(const std::string& key, const std::string& text) {
  const std::string t = Trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error("config key '" + key + "': expected a number, got '" + t + "'");
  }
  return value;
}

std::vector<std::string> SplitList(const std::string& key, const std::string& text) {
  const std::string t = Trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw Error("config key '" + key + "': expected a [list]");
  }
  std::vector<std::string> items;
  std::stringstream ss(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(const std::string& text) {
  KeyValueConfig config;
  std::stringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') throw Error("config line " + std::to_string(line_no) + ": bad section");
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw Error("config line " + std::to_string(line_no) + ": empty key");
    config.values_[section.empty() ? key : section + "." + key] = value;
  }
  return config;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

std::optional<double> KeyValueConfig::GetDouble(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return ParseDouble(key, it->second);
}

std::optional<int> KeyValueConfig::GetInt(const std::string& key) const {
  const auto v = GetDouble(key);
  if (!v) return std::nullopt;
  if (*v != static_cast<double>(static_cast<long long>(*v))) {
    throw Error("config key '" + key + "': expected an integer");
  }
  return static_cast<int>(*v);
}

std::optional<bool> KeyValueConfig::GetBool(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw Error("config key '" + key + "': expected true or false");
}

std::optional<std::string> KeyValueConfig::GetString(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<double>> KeyValueConfig::GetDoubleList(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  std::vector<double> out;
  for (const std::string& item : SplitList(key, it->second)) out.push_back(ParseDouble(key, item));
  return out;
}

std::optional<std::vector<int>> KeyValueConfig::GetIntList(const std::string& key) const {
  const auto list = GetDoubleList(key);
  if (!list) return std::nullopt;
  std::vector<int> out;
  for (double v : *list) {
    if (v != static_cast<double>(static_cast<long long>(v))) {
      throw Error("config key '" + key + "': expected integers");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string KeyValueConfig::ToString() const {
  std::map<std::string, std::map<std::string, std::string>> sections;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      sections[""][key] = value;
    } else {
      sections[key.substr(0, dot)][key.substr(dot + 1)] = value;
    }
  }
  std::ostringstream out;
  for (const auto& [name, entries] : sections) {
    if (!name.empty()) out << '[' << name << "]\n";
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  }
  return out.str();
}

std::string FormatNumber(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string FormatList(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += FormatNumber(values[i]);
  }
  return out + "]";
}

}  // namespace cisimkit
