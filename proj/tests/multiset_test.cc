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


#include "mspir/multiset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "mspir/combinatorics.hpp"
#include "mspir/prg.hpp"
#include "mspir/stats.hpp"

namespace mspir {
namespace {

using Vec = std::vector<std::uint64_t>;

// Independent oracle: every strictly increasing k-subset of [N], built by
// recursion rather than the library's odometer.
void all_subsets(std::uint64_t N, std::uint64_t k, std::uint64_t from, Vec& cur,
                 std::vector<Vec>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::uint64_t v = from; v <= N; ++v) {
    cur.push_back(v);
    all_subsets(N, k, v + 1, cur, out);
    cur.pop_back();
  }
}

std::vector<Vec> all_subsets(std::uint64_t N, std::uint64_t k) {
  std::vector<Vec> out;
  Vec cur;
  all_subsets(N, k, 1, cur, out);
  return out;
}

// Independent oracle: all nondecreasing k-sequences over [n].
void all_multisets(std::uint64_t n, std::uint64_t k, std::uint64_t from,
                   Vec& cur, std::vector<Vec>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::uint64_t v = from; v <= n; ++v) {
    cur.push_back(v);
    all_multisets(n, k, v, cur, out);
    cur.pop_back();
  }
}

std::vector<Vec> all_multisets(std::uint64_t n, std::uint64_t k) {
  std::vector<Vec> out;
  Vec cur;
  all_multisets(n, k, 1, cur, out);
  return out;
}

TEST(FloydSample, SingletonUniverse) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_EQ(floyd_sample(1, 1, {s}).elements(), Vec({1}));
  }
}

TEST(FloydSample, FullUniverse) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_EQ(floyd_sample(4, 4, {s * 977}).elements(), Vec({1, 2, 3, 4}));
  }
}

TEST(FloydSample, RejectsBadArguments) {
  EXPECT_THROW(floyd_sample(3, 0, {1}), ParameterError);
  EXPECT_THROW(floyd_sample(3, 4, {1}), ParameterError);
}

TEST(FloydSample, Deterministic) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    EXPECT_EQ(floyd_sample(50, 7, {s}), floyd_sample(50, 7, {s}));
  }
}

TEST(FloydSample, UniformOverTwoSubsetsOfSix) {
  const auto subsets = all_subsets(6, 2);
  ASSERT_EQ(subsets.size(), 15u);
  std::map<Vec, std::size_t> slot;
  for (std::size_t t = 0; t < subsets.size(); ++t) slot[subsets[t]] = t;

  std::vector<std::uint64_t> counts(subsets.size());
  for (std::uint64_t j = 0; j < 150'000; ++j) {
    const auto s = floyd_sample(6, 2, {Prg::at(0xF10D, j)});
    ++counts[slot.at(s.elements())];
  }
  const auto r = stats::chi_square_uniform(counts);
  EXPECT_FALSE(r.rejects(0.001)) << "chi2=" << r.statistic;
}

TEST(Bijection, WorkedExample) {
  const SubsetSample s({2, 3, 5}, 5);
  const Multiset m = multiset_from_subset(s, 3);
  EXPECT_EQ(m.elements(), Vec({2, 2, 3}));
  EXPECT_EQ(subset_from_multiset(Multiset({2, 2, 3}, 3)).elements(),
            Vec({2, 3, 5}));
}

TEST(Bijection, MinimalSubsetIsAllOnes) {
  for (std::uint64_t n = 1; n <= 5; ++n) {
    for (std::uint64_t k = 1; k <= 4; ++k) {
      Vec low(k), ones(k, 1);
      for (std::uint64_t t = 0; t < k; ++t) low[t] = t + 1;
      EXPECT_EQ(multiset_from_subset(SubsetSample(low, n + k - 1), n).elements(),
                ones);
      EXPECT_EQ(subset_from_multiset(Multiset(ones, n)).elements(), low);
    }
  }
}

TEST(Bijection, ImageOfAllSubsetsIsAllMultisets) {
  std::set<Vec> image;
  for (const auto& s : all_subsets(6, 3)) {
    image.insert(multiset_from_subset(SubsetSample(s, 6), 4).elements());
  }
  const auto expect = all_multisets(4, 3);
  EXPECT_EQ(image.size(), 20u);
  EXPECT_EQ(image, std::set<Vec>(expect.begin(), expect.end()));
}

TEST(Bijection, RoundTripExhaustive) {
  for (std::uint64_t n = 1; n <= 6; ++n) {
    for (std::uint64_t k = 1; k <= 4; ++k) {
      const auto N = n + k - 1;
      std::set<Vec> image;
      for (const auto& s : all_subsets(N, k)) {
        const SubsetSample ss(s, N);
        const auto m = multiset_from_subset(ss, n);
        EXPECT_EQ(subset_from_multiset(m), ss);
        image.insert(m.elements());
      }
      for (const auto& mv : all_multisets(n, k)) {
        const Multiset m(mv, n);
        EXPECT_EQ(multiset_from_subset(subset_from_multiset(m), n), m);
      }
      EXPECT_EQ(BigInt(image.size()), binomial(n + k - 1, k))
          << "n=" << n << " k=" << k;
    }
  }
}

TEST(Expand, SingleElementUniverse) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    EXPECT_EQ(expand_multiset_from_seed(1, 3, {s}).elements(), Vec({1, 1, 1}));
  }
}

TEST(Expand, PinnedOutputs) {
  // Guards the PRG + Floyd contract: changing either changes stored hints.
  const auto a = expand_multiset_from_seed(3, 2, {0x5EED});
  const auto b = expand_multiset_from_seed(3, 2, {0x5EED});
  EXPECT_EQ(a, b);
  EXPECT_EQ(Prg::at(0, 0), Prg::mix64(0x9E3779B97F4A7C15ULL));
  EXPECT_EQ(Prg::mix64(0), 0u);
}

TEST(Expand, UniformOverFiveChooseTwoMultisets) {
  const auto ms = all_multisets(5, 2);
  ASSERT_EQ(ms.size(), 15u);
  std::map<Vec, std::size_t> slot;
  for (std::size_t t = 0; t < ms.size(); ++t) slot[ms[t]] = t;
  std::vector<std::uint64_t> counts(ms.size());
  for (std::uint64_t j = 0; j < 150'000; ++j) {
    ++counts[slot.at(expand_multiset_from_seed(5, 2, {Prg::at(7, j)}).elements())];
  }
  EXPECT_FALSE(stats::chi_square_uniform(counts).rejects(0.001));
}

TEST(Expand, OutputAlwaysValid) {
  Prg rng(99);
  for (int t = 0; t < 2000; ++t) {
    const auto n = rng.uniform(1, 300);
    const auto k = rng.uniform(1, 40);
    const auto m = expand_multiset_from_seed(n, k, {rng.next()});
    ASSERT_EQ(m.size(), k);
    ASSERT_TRUE(std::is_sorted(m.elements().begin(), m.elements().end()));
    ASSERT_GE(m.elements().front(), 1u);
    ASSERT_LE(m.elements().back(), n);
  }
}

TEST(Redact, RemovesOneCopy) {
  EXPECT_EQ(redact(Multiset({2, 2, 3}, 3), 2).elements(), Vec({2, 3}));
  EXPECT_EQ(redact(Multiset({1, 1}, 1), 1).elements(), Vec({1}));
  EXPECT_THROW(redact(Multiset({1, 4, 7}, 7), 5), NotCoveredError);
}

TEST(Redact, InsertIsInverse) {
  for (const auto& mv : all_multisets(4, 3)) {
    const Multiset m(mv, 4);
    for (auto i : std::set<std::uint64_t>(mv.begin(), mv.end())) {
      EXPECT_EQ(insert_one(redact(m, i), i), m);
    }
  }
}

TEST(MultisetType, RejectsInvalid) {
  EXPECT_THROW(Multiset({3, 2}, 3), ParameterError);
  EXPECT_THROW(Multiset({0, 1}, 3), ParameterError);
  EXPECT_THROW(Multiset({1, 4}, 3), ParameterError);
  EXPECT_THROW(SubsetSample({2, 2}, 3), ParameterError);
}

}  // namespace
}  // namespace mspir
