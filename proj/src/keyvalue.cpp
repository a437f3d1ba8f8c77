// Copyright (c) 2026 The send-diar Authors
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

#include "send/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "send/error.hpp"

namespace send {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues KeyValues::parse(std::istream& in) {
  KeyValues kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) +
                           ": expected key=value",
                       lineno);
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ParseError("config line " + std::to_string(lineno) + ": empty key",
                       lineno);
    }
    kv.set(key, trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in);
}

void KeyValues::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

bool KeyValues::has(const std::string& key) const {
  return kv_.count(key) != 0;
}

std::string KeyValues::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not a number");
  }
  return v;
}

long KeyValues::get_long(const std::string& key, long fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& s = it->second;
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': '" + s +
                      "' is not an integer");
  }
  return v;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "1" || it->second == "true") return true;
  if (it->second == "0" || it->second == "false") return false;
  throw ConfigError("config key '" + key + "': '" + it->second +
                    "' is not a boolean");
}

std::vector<long> KeyValues::get_longs(const std::string& key,
                                       const std::vector<long>& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<long> out;
  std::string s = it->second;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ConfigError("config key '" + key + "': '" + tok +
                        "' is not an integer");
    }
    out.push_back(v);
  }
  return out;
}

void KeyValues::require_known(const std::set<std::string>& known,
                              const std::string& what) const {
  for (const auto& [k, v] : kv_) {
    if (known.count(k) == 0) {
      throw ConfigError(what + ": unknown key '" + k + "'");
    }
  }
}

void KeyValues::write(std::ostream& out) const {
  for (const auto& [k, v] : kv_) out << k << '=' << v << '\n';
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace send
