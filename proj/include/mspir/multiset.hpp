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
#include <bit>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mspir/error.hpp"
#include "mspir/prg.hpp"

// Uniform size-k multisets over [n] = {1, ..., n}, sampled through the
// stars-and-bars bijection with k-subsets of [n + k - 1].

namespace mspir {

struct MultisetSeed {
  std::uint64_t value = 0;
  friend bool operator==(MultisetSeed, MultisetSeed) = default;
};

/// Strictly increasing k-subset of [N].
class SubsetSample {
 public:
  SubsetSample() = default;
  SubsetSample(std::vector<std::uint64_t> elements, std::uint64_t universe)
      : elements_(std::move(elements)), universe_(universe) {
    for (std::size_t t = 0; t < elements_.size(); ++t) {
      if (elements_[t] < 1 || elements_[t] > universe_) {
        throw ParameterError("SubsetSample: element outside [1, N]");
      }
      if (t > 0 && elements_[t - 1] >= elements_[t]) {
        throw ParameterError("SubsetSample: not strictly increasing");
      }
    }
  }

  const std::vector<std::uint64_t>& elements() const { return elements_; }
  std::uint64_t universe() const { return universe_; }
  std::size_t size() const { return elements_.size(); }

  friend bool operator==(const SubsetSample&, const SubsetSample&) = default;

 private:
  std::vector<std::uint64_t> elements_;
  std::uint64_t universe_ = 0;
};

/// Nondecreasing sequence of indices in [1, n]; duplicates allowed.
class Multiset {
 public:
  Multiset() = default;
  Multiset(std::vector<std::uint64_t> elements, std::uint64_t universe)
      : elements_(std::move(elements)), universe_(universe) {
    for (std::size_t t = 0; t < elements_.size(); ++t) {
      if (elements_[t] < 1 || elements_[t] > universe_) {
        throw ParameterError("Multiset: element outside [1, n]");
      }
      if (t > 0 && elements_[t - 1] > elements_[t]) {
        throw ParameterError("Multiset: not sorted");
      }
    }
  }

  // Sorts first; for effective multisets whose replacement slot broke order.
  static Multiset from_unsorted(std::vector<std::uint64_t> elements,
                                std::uint64_t universe) {
    std::sort(elements.begin(), elements.end());
    return Multiset(std::move(elements), universe);
  }

  const std::vector<std::uint64_t>& elements() const { return elements_; }
  std::uint64_t universe() const { return universe_; }
  std::size_t size() const { return elements_.size(); }

  std::size_t count(std::uint64_t i) const {
    auto [lo, hi] = std::equal_range(elements_.begin(), elements_.end(), i);
    return static_cast<std::size_t>(hi - lo);
  }
  bool contains(std::uint64_t i) const { return count(i) > 0; }

  friend bool operator==(const Multiset&, const Multiset&) = default;
  friend auto operator<=>(const Multiset& a, const Multiset& b) {
    return a.elements_ <=> b.elements_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Multiset& m) {
    os << '(';
    for (std::size_t t = 0; t < m.elements_.size(); ++t) {
      if (t) os << ',';
      os << m.elements_[t];
    }
    return os << ')';
  }

 private:
  std::vector<std::uint64_t> elements_;
  std::uint64_t universe_ = 0;
};

namespace detail {

// Open-addressing set of nonzero u64 values, reused across Floyd calls.
class FloydScratch {
 public:
  void reset(std::size_t k) {
    std::size_t cap = std::bit_ceil(std::max<std::size_t>(16, 2 * k));
    if (slots_.size() != cap) {
      slots_.assign(cap, 0);
    } else {
      std::fill(slots_.begin(), slots_.end(), 0);
    }
    mask_ = cap - 1;
  }

  // Returns false if already present.
  bool insert(std::uint64_t v) {
    std::size_t h = static_cast<std::size_t>(Prg::mix64(v)) & mask_;
    while (slots_[h] != 0) {
      if (slots_[h] == v) return false;
      h = (h + 1) & mask_;
    }
    slots_[h] = v;
    return true;
  }

 private:
  std::vector<std::uint64_t> slots_;
  std::size_t mask_ = 0;
};

inline FloydScratch& floyd_scratch() {
  thread_local FloydScratch scratch;
  return scratch;
}

inline void check_floyd_args(std::uint64_t universe, std::uint64_t k) {
  if (k == 0) throw ParameterError("floyd_sample: k must be >= 1");
  if (k > universe) throw ParameterError("floyd_sample: k exceeds N");
}

// Floyd's algorithm: for j = N-k+1 .. N draw r uniform in [1, j]; insert r
// unless already present, in which case insert j. Appends in draw order.
inline void floyd_draw(std::uint64_t universe, std::uint64_t k,
                       MultisetSeed seed, std::vector<std::uint64_t>& out) {
  check_floyd_args(universe, k);
  Prg prg(seed.value);
  auto& set = floyd_scratch();
  set.reset(static_cast<std::size_t>(k));
  out.clear();
  out.reserve(static_cast<std::size_t>(k));
  for (std::uint64_t j = universe - k + 1; j <= universe; ++j) {
    std::uint64_t r = prg.uniform(1, j);
    if (!set.insert(r)) {
      set.insert(j);
      r = j;
    }
    out.push_back(r);
  }
}

}  // namespace detail

inline SubsetSample floyd_sample(std::uint64_t universe, std::uint64_t k,
                                 MultisetSeed seed) {
  std::vector<std::uint64_t> s;
  detail::floyd_draw(universe, k, seed, s);
  std::sort(s.begin(), s.end());
  return SubsetSample(std::move(s), universe);
}

// h_t = u_t - (t - 1)
inline Multiset multiset_from_subset(const SubsetSample& s, std::uint64_t n) {
  const auto& u = s.elements();
  if (n == 0 || s.universe() != n + u.size() - 1) {
    throw ParameterError("multiset_from_subset: universe must be n + k - 1");
  }
  std::vector<std::uint64_t> h(u.size());
  for (std::size_t t = 0; t < u.size(); ++t) h[t] = u[t] - t;
  return Multiset(std::move(h), n);
}

// u_t = h_t + (t - 1)
inline SubsetSample subset_from_multiset(const Multiset& m) {
  const auto& h = m.elements();
  std::vector<std::uint64_t> u(h.size());
  for (std::size_t t = 0; t < h.size(); ++t) u[t] = h[t] + t;
  return SubsetSample(std::move(u), m.universe() + h.size() - 1);
}

// Allocation-light expansion used on the hint-search hot path: writes the
// sorted multiset into `out`.
inline void expand_multiset_into(std::uint64_t n, std::uint64_t k,
                                 MultisetSeed seed,
                                 std::vector<std::uint64_t>& out) {
  if (n == 0) throw ParameterError("expand_multiset: n must be >= 1");
  detail::floyd_draw(n + k - 1, k, seed, out);
  std::sort(out.begin(), out.end());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] -= t;
}

inline Multiset expand_multiset_from_seed(std::uint64_t n, std::uint64_t k,
                                          MultisetSeed seed) {
  std::vector<std::uint64_t> out;
  expand_multiset_into(n, k, seed, out);
  return Multiset(std::move(out), n);
}

// Removes exactly one copy of i.
inline Multiset redact(const Multiset& m, std::uint64_t i) {
  const auto& e = m.elements();
  auto it = std::lower_bound(e.begin(), e.end(), i);
  if (it == e.end() || *it != i) {
    throw NotCoveredError("redact: index " + std::to_string(i) +
                          " not in multiset");
  }
  std::vector<std::uint64_t> out;
  out.reserve(e.size() - 1);
  out.insert(out.end(), e.begin(), it);
  out.insert(out.end(), it + 1, e.end());
  return Multiset(std::move(out), m.universe());
}

// Multiset union P ⊎ {i}.
inline Multiset insert_one(const Multiset& m, std::uint64_t i) {
  std::vector<std::uint64_t> out = m.elements();
  out.insert(std::upper_bound(out.begin(), out.end(), i), i);
  return Multiset(std::move(out), m.universe());
}

}  // namespace mspir
