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

#include <cstdint>

#include "mspir/error.hpp"

namespace mspir {

/// Seedable pseudorandom generator used everywhere a hint must be
/// re-derivable from a stored 64-bit seed.
///
/// This is SplitMix64 read as a counter-mode generator: the j-th output
/// (j = 0, 1, ...) is `mix64(seed + (j + 1) * 0x9E3779B97F4A7C15)`. Bounded
/// draws use Lemire's multiply-shift reduction with rejection, so they are
/// exactly uniform and independent of the standard library's distributions.
/// The whole construction is part of the on-disk compatibility contract:
/// changing any constant here invalidates every stored hint seed.
class Prg {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit Prg(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Output number `counter` of the stream keyed by `key`, without
  // materializing the generator.
  static constexpr std::uint64_t at(std::uint64_t key,
                                    std::uint64_t counter) noexcept {
    return mix64(key + (counter + 1) * kGamma);
  }

  std::uint64_t next() noexcept {
    state_ += kGamma;
    return mix64(state_);
  }

  // Uniform integer in [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw ParameterError("Prg::uniform: empty range");
    const std::uint64_t range = hi - lo + 1;
    if (range == 0) return next();  // full 64-bit range
    std::uint64_t x = next();
    unsigned __int128 prod = static_cast<unsigned __int128>(x) * range;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        x = next();
        prod = static_cast<unsigned __int128>(x) * range;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return lo + static_cast<std::uint64_t>(prod >> 64);
  }

  // Uniform double in [0, 1).
  double unit() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  std::uint64_t state() const noexcept { return state_; }
  void set_state(std::uint64_t s) noexcept { state_ = s; }

 private:
  std::uint64_t state_;
};

// Domain-separation tags for streams derived from one seed.
namespace prg_domain {
inline constexpr std::uint64_t kReplacementSlot = 0x5245504C41434531ULL;
inline constexpr std::uint64_t kClient = 0x434C49454E545247ULL;
}  // namespace prg_domain

}  // namespace mspir
