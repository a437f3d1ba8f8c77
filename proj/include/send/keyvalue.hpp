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

#ifndef SEND_KEYVALUE_HPP_
#define SEND_KEYVALUE_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace send {

/// Flat `key=value` text, one pair per line; `#` starts a comment.
class KeyValues {
 public:
  KeyValues() = default;
  static KeyValues parse(std::istream& in);
  static KeyValues load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<long> get_longs(const std::string& key,
                              const std::vector<long>& fallback) const;

  /// Throws ConfigError naming the first key not in `known`.
  void require_known(const std::set<std::string>& known,
                     const std::string& what) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> kv_;
};

std::string format_double(double v);

}  // namespace send

#endif  // SEND_KEYVALUE_HPP_
