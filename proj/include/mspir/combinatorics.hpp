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

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mspir/error.hpp"
#include "mspir/multiset.hpp"

// Exact counting and exhaustive enumeration. These back the verification
// oracles; production paths never materialize M.

namespace mspir {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr std::uint64_t kDefaultOracleCap = 1'000'000;

inline BigInt binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  BigInt acc = 1;
  for (std::uint64_t t = 1; t <= r; ++t) {
    acc *= n - r + t;
    acc /= t;
  }
  return acc;
}

// log C(n, r) via lgamma; used where the exact value would be enormous.
inline double log_binomial(double n, double r) {
  if (r < 0 || r > n) return -INFINITY;
  return std::lgamma(n + 1) - std::lgamma(r + 1) - std::lgamma(n - r + 1);
}

struct CombinatorialCounts {
  BigInt total_multisets;       // M = C(n+k-1, k)
  BigInt containing_multisets;  // S_y = C(n+k-2, k-1)
  BigRational inclusion_probability;  // p = k / (n+k-1) = S_y / M
};

inline CombinatorialCounts combinatorial_counts(std::uint64_t n,
                                                std::uint64_t k) {
  if (n < 1 || k < 1) {
    throw ParameterError("combinatorial_counts: need n >= 1 and k >= 1");
  }
  CombinatorialCounts c;
  c.total_multisets = binomial(n + k - 1, k);
  c.containing_multisets = binomial(n + k - 2, k - 1);
  c.inclusion_probability = BigRational(c.containing_multisets,
                                        c.total_multisets);
  return c;
}

// True iff C(n+k-1, k) <= cap, without building huge integers.
inline bool multiset_count_within(std::uint64_t n, std::uint64_t k,
                                  std::uint64_t cap) {
  if (n == 0) return true;
  if (log_binomial(static_cast<double>(n + k - 1), static_cast<double>(k)) >
      std::log(static_cast<double>(cap)) + 1.0) {
    return false;
  }
  return binomial(n + k - 1, k) <= cap;
}

/// All size-k multisets over [n], each once, in lexicographic order.
inline std::vector<Multiset> enumerate_multisets(
    std::uint64_t n, std::uint64_t k,
    std::uint64_t cap = kDefaultOracleCap) {
  if (n < 1) throw ParameterError("enumerate_multisets: n must be >= 1");
  if (!multiset_count_within(n, k, cap)) {
    throw OracleTooLargeError("enumerate_multisets: C(" +
                              std::to_string(n + k - 1) + ", " +
                              std::to_string(k) + ") exceeds cap " +
                              std::to_string(cap));
  }
  std::vector<Multiset> out;
  std::vector<std::uint64_t> cur(k, 1);
  while (true) {
    out.emplace_back(cur, n);
    // Odometer: bump the rightmost position below n, then flatten the tail.
    std::size_t pos = cur.size();
    while (pos > 0 && cur[pos - 1] == n) --pos;
    if (pos == 0) break;
    ++cur[pos - 1];
    for (std::size_t t = pos; t < cur.size(); ++t) cur[t] = cur[pos - 1];
  }
  return out;
}

struct RedactionBijectionCheck {
  bool holds = false;
  std::uint64_t covering_count = 0;  // |R_i|
  BigInt expected_count;             // C(n+k-2, k-1)

  explicit operator bool() const { return holds; }
};

/// Exhaustively checks that P -> P ⊎ {i} maps the (k-1)-multisets onto
/// exactly the k-multisets containing i, that |R_i| = C(n+k-2, k-1), and
/// that redaction at i inverts the map on R_i.
inline RedactionBijectionCheck verify_redaction_bijection(
    std::uint64_t n, std::uint64_t k, std::uint64_t i,
    std::uint64_t cap = kDefaultOracleCap) {
  if (k < 1) throw ParameterError("verify_redaction_bijection: k >= 1");
  if (i < 1 || i > n) {
    throw ParameterError("verify_redaction_bijection: i outside [1, n]");
  }
  RedactionBijectionCheck r;
  r.expected_count = binomial(n + k - 2, k - 1);

  std::set<Multiset> covering;
  for (auto& m : enumerate_multisets(n, k, cap)) {
    if (m.contains(i)) covering.insert(std::move(m));
  }
  r.covering_count = covering.size();

  std::set<Multiset> image;
  bool inverse_ok = true;
  const auto smaller = k == 1 ? std::vector<Multiset>{Multiset({}, n)}
                              : enumerate_multisets(n, k - 1, cap);
  for (const auto& p : smaller) {
    Multiset h = insert_one(p, i);
    if (!(redact(h, i) == p)) inverse_ok = false;
    image.insert(std::move(h));
  }
  for (const auto& h : covering) {
    if (!(insert_one(redact(h, i), i) == h)) inverse_ok = false;
  }

  r.holds = inverse_ok && image == covering &&
            image.size() == smaller.size() &&
            BigInt(r.covering_count) == r.expected_count;
  return r;
}

}  // namespace mspir
