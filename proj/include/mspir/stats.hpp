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
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "mspir/error.hpp"

namespace mspir::stats {

struct ChiSquareResult {
  double statistic = 0;
  double degrees_of_freedom = 0;
  double p_value = 1;

  bool rejects(double significance) const { return p_value < significance; }
};

inline double chi_square_survival(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

// Goodness of fit of observed counts against equal expected counts.
inline ChiSquareResult chi_square_uniform(
    std::span<const std::uint64_t> observed) {
  if (observed.empty()) throw ParameterError("chi_square_uniform: no bins");
  double total = 0;
  for (auto o : observed) total += static_cast<double>(o);
  ChiSquareResult r;
  r.degrees_of_freedom = static_cast<double>(observed.size() - 1);
  if (total == 0) return r;
  const double expected = total / static_cast<double>(observed.size());
  for (auto o : observed) {
    const double d = static_cast<double>(o) - expected;
    r.statistic += d * d / expected;
  }
  r.p_value = chi_square_survival(r.statistic, r.degrees_of_freedom);
  return r;
}

// Homogeneity test of two count vectors over the same categories (2 x K
// contingency table). Categories empty in both samples are dropped.
inline ChiSquareResult chi_square_two_sample(
    std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) {
    throw ParameterError("chi_square_two_sample: category count mismatch");
  }
  double na = 0, nb = 0;
  for (auto v : a) na += static_cast<double>(v);
  for (auto v : b) nb += static_cast<double>(v);
  ChiSquareResult r;
  if (na == 0 || nb == 0) return r;
  const double total = na + nb;
  std::size_t used = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double col = static_cast<double>(a[c]) + static_cast<double>(b[c]);
    if (col == 0) continue;
    ++used;
    const double ea = na * col / total;
    const double eb = nb * col / total;
    const double da = static_cast<double>(a[c]) - ea;
    const double db = static_cast<double>(b[c]) - eb;
    r.statistic += da * da / ea + db * db / eb;
  }
  r.degrees_of_freedom = used > 0 ? static_cast<double>(used - 1) : 0;
  r.p_value = chi_square_survival(r.statistic, r.degrees_of_freedom);
  return r;
}

// 0.5 * sum |a/na - b/nb|
inline double total_variation(std::span<const std::uint64_t> a,
                              std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) {
    throw ParameterError("total_variation: category count mismatch");
  }
  double na = 0, nb = 0;
  for (auto v : a) na += static_cast<double>(v);
  for (auto v : b) nb += static_cast<double>(v);
  if (na == 0 || nb == 0) return na == nb ? 0.0 : 1.0;
  double tv = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    tv += std::abs(static_cast<double>(a[c]) / na -
                   static_cast<double>(b[c]) / nb);
  }
  return 0.5 * tv;
}

}  // namespace mspir::stats
