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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mspir/error.hpp"

namespace mspir {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// dst ^= src. Sizes must match.
inline void xor_into(std::span<std::uint8_t> dst, ByteView src) {
  if (dst.size() != src.size()) {
    throw ParameterError("xor_into: size mismatch");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
}

inline bool is_zero(ByteView b) {
  for (auto v : b) {
    if (v != 0) return false;
  }
  return true;
}

inline std::string to_hex(ByteView b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto v : b) {
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 0xF]);
  }
  return out;
}

// Little-endian helpers shared by the wire codec and the file formats.
namespace le {

template <typename T>
inline void put(Bytes& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(
        static_cast<std::uint64_t>(value) >> (8 * i)));
  }
}

template <typename T>
inline T get(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  }
  return static_cast<T>(v);
}

// Bounds-checked cursor over a byte buffer.
class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  template <typename T>
  T read() {
    need(sizeof(T));
    T v = get<T>(data_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }

  ByteView read_bytes(std::size_t count) {
    need(count);
    ByteView v = data_.subspan(pos_, count);
    pos_ += count;
    return v;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t count) const {
    if (count > data_.size() - pos_) {
      throw IntegrityError("truncated input");
    }
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace le
}  // namespace mspir
