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


#include <gtest/gtest.h>

#include "mspir/privacy.hpp"

namespace mspir {
namespace {

TranscriptTestConfig small(std::uint64_t trials) {
  TranscriptTestConfig cfg;
  cfg.trials = trials;
  cfg.seed = 7;
  return cfg;
}

TEST(Transcript, CategoriesAreAllTwoMultisets) {
  auto rep = transcript_distribution_test({1}, {1}, small(10));
  // C(4+2-1, 2) = 10
  EXPECT_EQ(rep.categories.size(), 10u);
  ASSERT_EQ(rep.rounds.size(), 1u);
  std::uint64_t total = 0;
  for (auto c : rep.rounds[0].counts_a) total += c;
  EXPECT_EQ(total, 10u);
}

TEST(Transcript, DifferentTargetsLookAlike) {
  for (auto mode : {proto::ServerMode::kCooperative, proto::ServerMode::kDefault}) {
    auto cfg = small(4000);
    cfg.mode = mode;
    auto rep = transcript_distribution_test({1, 1, 1}, {2, 3, 4}, cfg);
    EXPECT_EQ(rep.silent_rounds, 0u);
    for (const auto& r : rep.rounds) {
      EXPECT_FALSE(r.two_sample.rejects(0.001)) << "round " << r.round;
      EXPECT_FALSE(r.uniform_a.rejects(0.001)) << "round " << r.round;
      EXPECT_FALSE(r.uniform_b.rejects(0.001)) << "round " << r.round;
      EXPECT_LT(r.total_variation, 0.05);
    }
  }
}

// Negative control: with silent cache hits, repeating a target leaves rounds
// with nothing on the wire and the harness must see that.
TEST(Transcript, SilentCacheHitsAreVisible) {
  auto cfg = small(200);
  cfg.cache_hits = CacheHitPolicy::kSilent;
  auto rep = transcript_distribution_test({1, 1}, {2, 3}, cfg);
  EXPECT_GT(rep.silent_rounds, 0u);
}

// Negative control for the statistic itself: skewed counts get rejected.
TEST(Transcript, ChiSquareDetectsSkew) {
  std::vector<std::uint64_t> a(10, 1000), b(10, 1000);
  b[0] = 1300;
  b[1] = 700;
  EXPECT_TRUE(stats::chi_square_two_sample(a, b).rejects(0.001));
  EXPECT_TRUE(stats::chi_square_uniform(b).rejects(0.001));
  EXPECT_FALSE(stats::chi_square_two_sample(a, a).rejects(0.001));
}

TEST(Transcript, RejectsBadConfig) {
  EXPECT_THROW(transcript_distribution_test({1, 2}, {1}, small(1)),
               ParameterError);
  EXPECT_THROW(transcript_distribution_test({1, 1, 1, 1}, {1, 2, 3, 4}, small(1)),
               ParameterError);
  auto cfg = small(1);
  cfg.k = 1;
  EXPECT_THROW(transcript_distribution_test({1}, {2}, cfg), ParameterError);
}

}  // namespace
}  // namespace mspir
