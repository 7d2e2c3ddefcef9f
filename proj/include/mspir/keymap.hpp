// Copyright 2026 The mspir Authors
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

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mspir/error.hpp"

namespace mspir {

/// Key -> 0-based database index by lexicographic rank over a fixed key set.
/// Collision-free by construction; not a perfect hash.
class KeyMap {
 public:
  KeyMap() = default;

  static KeyMap build(std::vector<std::string> keys) {
    for (const auto& k : keys) check_key(k);
    std::sort(keys.begin(), keys.end());
    std::vector<std::string> dups;
    for (std::size_t t = 1; t < keys.size(); ++t) {
      if (keys[t] == keys[t - 1] && (dups.empty() || dups.back() != keys[t])) {
        dups.push_back(keys[t]);
      }
    }
    if (!dups.empty()) {
      std::string msg = "duplicate keys:";
      for (const auto& d : dups) msg += " '" + d + "'";
      throw ParameterError(msg);
    }
    KeyMap m;
    m.keys_ = std::move(keys);
    m.rank_.reserve(m.keys_.size());
    for (std::size_t t = 0; t < m.keys_.size(); ++t) {
      m.rank_.emplace(m.keys_[t], t);
    }
    return m;
  }

  // One key per line; a trailing '\r' is stripped, blank lines skipped.
  static std::vector<std::string> read_keys(std::istream& in) {
    std::vector<std::string> keys;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      keys.push_back(line);
    }
    return keys;
  }

  static KeyMap from_keys_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read keys file " + path.string());
    return build(read_keys(in));
  }

  std::optional<std::uint64_t> lookup(const std::string& key) const {
    auto it = rank_.find(key);
    if (it == rank_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return keys_.size(); }
  const std::vector<std::string>& keys() const { return keys_; }

  // "key\tindex" per line, in index order.
  void write(std::ostream& out) const {
    for (std::size_t t = 0; t < keys_.size(); ++t) {
      out << keys_[t] << '\t' << t << '\n';
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    write(out);
    if (!out) throw Error("write failed: " + path.string());
  }

  static KeyMap load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read map file " + path.string());
    std::vector<std::string> keys;
    std::string line;
    std::uint64_t expect = 0;
    while (std::getline(in, line)) {
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) {
        throw IntegrityError("map file: missing tab on line " +
                             std::to_string(expect + 1));
      }
      if (line.substr(tab + 1) != std::to_string(expect)) {
        throw IntegrityError("map file: index out of sequence on line " +
                             std::to_string(expect + 1));
      }
      keys.push_back(line.substr(0, tab));
      ++expect;
    }
    KeyMap m = build(keys);
    if (m.keys_ != keys) throw IntegrityError("map file: keys not sorted");
    return m;
  }

 private:
  static void check_key(const std::string& k) {
    if (k.empty()) throw ParameterError("empty key");
    if (k.find_first_of("\t\n") != std::string::npos) {
      throw ParameterError("key contains tab or newline");
    }
  }

  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::uint64_t> rank_;
};

}  // namespace mspir
