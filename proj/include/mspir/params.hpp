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
#include <cmath>
#include <cstdint>

#include "mspir/combinatorics.hpp"
#include "mspir/error.hpp"

namespace mspir {

/// Hint-pool sizing. `k` entries per hint, `m` hints, coverage constant `C`.
/// `delta_slack` is the Chernoff slack; it is unrelated to the failure
/// probability used by the Markov bound.
struct CoverageParams {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  std::uint64_t m = 0;
  double coverage_constant = 4.0;
  double delta_slack = 0.6;
  std::uint64_t beta = 0;

  // delta^2 * C > 1: every entry keeps a constant fraction of its expected
  // cover count w.h.p.
  bool intended_coverage() const {
    return delta_slack * delta_slack * coverage_constant > 1.0;
  }

  friend bool operator==(const CoverageParams&, const CoverageParams&) =
      default;
};

// ceil(sqrt(n)) without floating-point edge cases.
inline std::uint64_t ceil_sqrt(std::uint64_t n) {
  if (n == 0) return 0;
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while (r * r < n) ++r;
  return r;
}

// m = ceil(2 C ln(n) n / k)
inline std::uint64_t hint_count_for(std::uint64_t n, std::uint64_t k,
                                    double coverage_constant) {
  const double m = 2.0 * coverage_constant * std::log(static_cast<double>(n)) *
                   static_cast<double>(n) / static_cast<double>(k);
  return static_cast<std::uint64_t>(std::ceil(m));
}

inline CoverageParams compute_params(std::uint64_t n, std::uint64_t beta,
                                     double coverage_constant = 4.0,
                                     double delta_slack = 0.6) {
  if (n < 2) throw ParameterError("compute_params: n must be >= 2");
  if (!(coverage_constant > 0)) {
    throw ParameterError("compute_params: C must be > 0");
  }
  if (!(delta_slack > 0 && delta_slack < 1)) {
    throw ParameterError("compute_params: delta_slack must lie in (0, 1)");
  }
  CoverageParams p;
  p.n = n;
  p.k = ceil_sqrt(n);
  p.m = hint_count_for(n, p.k, coverage_constant);
  p.coverage_constant = coverage_constant;
  p.delta_slack = delta_slack;
  p.beta = beta;
  return p;
}

struct CoverageBounds {
  // n * C(M - S_y, m) / C(M, m), clamped to [0, 1].
  double markov_failure_bound = 1;
  // n^(1 - delta^2 C), clamped to [0, 1].
  double chernoff_failure_bound = 1;
  // E[Y_y] = m k / (n + k - 1), kept as an exact fraction.
  std::uint64_t expected_cover_numerator = 0;
  std::uint64_t expected_cover_denominator = 1;

  double expected_cover_count() const {
    return static_cast<double>(expected_cover_numerator) /
           static_cast<double>(expected_cover_denominator);
  }
};

inline CoverageBounds coverage_bounds(const CoverageParams& p,
                                      std::uint64_t exact_cap =
                                          kDefaultOracleCap) {
  if (p.n < 1 || p.k < 1) throw ParameterError("coverage_bounds: bad params");
  CoverageBounds b;
  b.expected_cover_numerator = p.m * p.k;
  b.expected_cover_denominator = p.n + p.k - 1;

  const double n = static_cast<double>(p.n);
  if (p.m == 0) {
    b.markov_failure_bound = 1.0;
  } else if (multiset_count_within(p.n, p.k, exact_cap)) {
    const auto counts = combinatorial_counts(p.n, p.k);
    const BigInt avoid = counts.total_multisets - counts.containing_multisets;
    if (BigInt(p.m) > avoid) {
      b.markov_failure_bound = 0.0;
    } else {
      // Exact ratio C(M - S_y, m) / C(M, m) as a product of m factors.
      BigRational ratio = 1;
      for (std::uint64_t t = 0; t < p.m; ++t) {
        ratio *= BigRational(avoid - t, counts.total_multisets - t);
      }
      const double r = static_cast<double>(ratio);
      b.markov_failure_bound = std::min(1.0, n * r);
    }
  } else {
    // Log-space product of (M - S_y - t) / (M - t) = 1 - S_y / (M - t).
    // S_y / M = k / (n + k - 1); M is astronomically larger than m here, so
    // S_y / (M - t) = p / (1 - t/M) with t/M evaluated in log space.
    const double prob = static_cast<double>(p.k) /
                        static_cast<double>(p.n + p.k - 1);
    const double log_total = log_binomial(static_cast<double>(p.n + p.k - 1),
                                          static_cast<double>(p.k));
    double log_ratio = 0;
    for (std::uint64_t t = 0; t < p.m; ++t) {
      const double frac =
          t == 0 ? 0.0 : std::exp(std::log(static_cast<double>(t)) - log_total);
      const double q = prob / (1.0 - frac);
      if (q >= 1.0) {
        log_ratio = -INFINITY;
        break;
      }
      log_ratio += std::log1p(-q);
    }
    b.markov_failure_bound = std::min(1.0, std::exp(std::log(n) + log_ratio));
  }

  const double exponent =
      1.0 - p.delta_slack * p.delta_slack * p.coverage_constant;
  b.chernoff_failure_bound = std::clamp(std::pow(n, exponent), 0.0, 1.0);
  return b;
}

}  // namespace mspir
