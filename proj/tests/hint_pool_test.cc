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


#include "mspir/hint_pool.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "mspir/database.hpp"
#include "mspir/stats.hpp"
#include "test_util.hpp"

namespace mspir {
namespace {

using testing_util::entries_of;
using testing_util::pool_is_sound;
using testing_util::recompute_parity;

CoverageParams small_params(std::uint64_t n, std::uint64_t k, std::uint64_t m,
                            std::uint64_t beta) {
  CoverageParams p;
  p.n = n;
  p.k = k;
  p.m = m;
  p.beta = beta;
  return p;
}

Bytes entry(const Database& db, std::uint64_t i) {
  auto e = db.entry(i - 1);
  return {e.begin(), e.end()};
}

TEST(Preprocess, ParitiesMatchRawDatabase) {
  const auto db = Database::generate(4, 1, 11);
  const auto pool = preprocess(entries_of(db), small_params(4, 2, 20, 1), 5);
  ASSERT_EQ(pool.hints().size(), 20u);
  for (const auto& h : pool.hints()) {
    EXPECT_EQ(recompute_parity(h, db, 2), h.parity);
    const auto e = expand_multiset_from_seed(4, 2, h.seed).elements();
    EXPECT_EQ(h.replacement_index, e[h.replacement_position - 1]);
  }
  EXPECT_TRUE(pool_is_sound(pool, db));
}

TEST(Preprocess, SingleEntryDatabase) {
  const auto db = Database::generate(1, 4, 3);
  for (std::uint64_t k : {2u, 3u}) {
    const auto pool = preprocess(entries_of(db), small_params(1, k, 6, 4), 9);
    for (const auto& h : pool.hints()) {
      EXPECT_EQ(effective_multiset(h, 1, k).elements(),
                std::vector<std::uint64_t>(k, 1));
      if (k % 2 == 0) {
        EXPECT_TRUE(is_zero(h.parity));
      } else {
        EXPECT_EQ(h.parity, entry(db, 1));
      }
    }
  }
}

TEST(Preprocess, DuplicateSeedsDiscarded) {
  const auto p = small_params(16, 4, 10, 2);
  PoolOptions opts;
  opts.continuous = false;
  // Counter 1 re-issues counter 0's seed.
  opts.seed_source = [](std::uint64_t c) {
    return counter_seed(77, c == 1 ? 0 : c);
  };
  const auto db = Database::generate(16, 2, 1);
  const auto pool = preprocess(entries_of(db), p, 77, opts);
  ASSERT_EQ(pool.hints().size(), 10u);
  std::set<std::vector<std::uint64_t>> distinct;
  std::size_t copies_of_zero = 0;
  for (const auto& h : pool.hints()) {
    distinct.insert(expand_multiset_from_seed(16, 4, h.seed).elements());
    copies_of_zero += h.seed == counter_seed(77, 0);
  }
  EXPECT_EQ(distinct.size(), 10u);
  EXPECT_EQ(copies_of_zero, 1u);
  EXPECT_EQ(pool.next_seed_counter(), 11u);
}

TEST(Preprocess, StreamErrors) {
  const auto p = small_params(4, 2, 5, 2);
  PoolBuilder b(p, 1);
  EXPECT_THROW(b.accept(2, Bytes(2)), IntegrityError);
  b.accept(1, Bytes(2));
  EXPECT_THROW(b.accept(2, Bytes(3)), IntegrityError);
  b.accept(2, Bytes(2));
  EXPECT_THROW(std::move(b).finish(), IntegrityError);

  PoolBuilder over(p, 1);
  for (std::uint64_t i = 1; i <= 4; ++i) over.accept(i, Bytes(2));
  EXPECT_THROW(over.accept(5, Bytes(2)), IntegrityError);
}

TEST(Preprocess, UncoveredEntriesStoredInFull) {
  // Two hints over 50 entries leave most entries uncovered.
  const auto db = Database::generate(50, 3, 2);
  const auto pool = preprocess(entries_of(db), small_params(50, 3, 2, 3), 4);
  std::set<std::uint64_t> covered;
  for (const auto& h : pool.hints()) {
    const auto eff = effective_multiset(h, 50, 3);
    for (auto e : eff.elements()) covered.insert(e);
  }
  EXPECT_EQ(pool.uncovered_store().size(), 50 - covered.size());
  for (const auto& [i, v] : pool.uncovered_store()) {
    EXPECT_FALSE(covered.count(i));
    EXPECT_EQ(v, entry(db, i));
  }
}

Hint make_hint(const Database& db, std::uint64_t k, MultisetSeed seed) {
  Hint h;
  h.seed = seed;
  h.replacement_position = replacement_position_for(seed, k);
  h.replacement_index = expand_multiset_from_seed(db.size(), k, seed)
                            .elements()[h.replacement_position - 1];
  h.replacement_value = entry(db, h.replacement_index);
  h.parity = recompute_parity(h, db, k);
  return h;
}

// Hint 0 contains `target`; the `others` after it do not.
HintPool fixture_single_cover(const Database& db, std::uint64_t target,
                              std::size_t others) {
  const std::uint64_t n = db.size(), k = 3;
  PoolState st;
  st.params = small_params(n, k, others + 1, db.entry_bytes());
  st.continuous = false;
  for (std::uint64_t s = 1; st.hints.size() < others + 1; ++s) {
    const MultisetSeed seed{Prg::at(123, s)};
    const bool covers =
        expand_multiset_from_seed(n, k, seed).contains(target);
    if (covers != st.hints.empty()) continue;
    st.hints.push_back(make_hint(db, k, seed));
  }
  return HintPool(std::move(st));
}

TEST(FindCovering, UniqueCover) {
  const auto db = Database::generate(20, 4, 8);
  auto pool = fixture_single_cover(db, 7, 6);
  ASSERT_EQ(pool.scan_covering(7), std::vector<std::size_t>{0});
  auto r = pool.find_covering_hint(7);
  ASSERT_TRUE(std::holds_alternative<HintHandle>(r));
  EXPECT_EQ(std::get<HintHandle>(r).slot, 0u);
}

TEST(FindCovering, OutOfRange) {
  const auto db = Database::generate(8, 2, 1);
  auto pool = preprocess(entries_of(db), compute_params(8, 2), 1);
  EXPECT_THROW(pool.find_covering_hint(0), ParameterError);
  EXPECT_THROW(pool.find_covering_hint(9), ParameterError);
}

TEST(FindCovering, CacheHitConsumesNothing) {
  const auto db = Database::generate(64, 4, 5);
  auto pool = preprocess(entries_of(db), compute_params(64, 4), 3);
  auto r = pool.find_covering_hint(10);
  ASSERT_TRUE(std::holds_alternative<HintHandle>(r));
  pool.consume_and_replenish(std::get<HintHandle>(r), 10, entry(db, 10));
  const auto alive = pool.unconsumed_count();
  auto again = pool.find_covering_hint(10);
  ASSERT_TRUE(std::holds_alternative<CacheHit>(again));
  EXPECT_EQ(std::get<CacheHit>(again).value, entry(db, 10));
  EXPECT_EQ(pool.unconsumed_count(), alive);
}

TEST(FindCovering, UniformAmongCovering) {
  const auto db = Database::generate(64, 1, 5);
  auto pool = preprocess(entries_of(db), compute_params(64, 1), 3);
  const auto covering = pool.scan_covering(5);
  ASSERT_GE(covering.size(), 3u);
  std::map<std::size_t, std::uint64_t> seen;
  for (int t = 0; t < 6000; ++t) {
    seen[std::get<HintHandle>(pool.find_covering_hint(5)).slot]++;
  }
  EXPECT_EQ(seen.size(), covering.size());
  std::vector<std::uint64_t> counts;
  for (auto& [_, c] : seen) counts.push_back(c);
  EXPECT_FALSE(stats::chi_square_uniform(counts).rejects(0.001));

  SearchOptions first{1, true};
  EXPECT_EQ(std::get<HintHandle>(pool.find_covering_hint(5, first)).slot,
            covering.front());
}

TEST(FindCovering, ThreadedScanMatchesSerial) {
  const auto db = Database::generate(1024, 1, 5);
  auto pool = preprocess(entries_of(db), compute_params(1024, 1), 3);
  for (std::uint64_t i : {1u, 500u, 1024u}) {
    EXPECT_EQ(pool.scan_covering(i, {4, false}), pool.scan_covering(i));
  }
}

TEST(FindCovering, CoverageAtTheDesignPoint) {
  std::size_t misses = 0;
  Prg rng(42);
  for (int run = 0; run < 100; ++run) {
    auto p = compute_params(1024, 1);
    const auto db = Database::generate(1024, 1, run);
    PoolOptions o;
    o.continuous = false;
    auto pool = preprocess(entries_of(db), p, rng.next(), o);
    auto r = pool.find_covering_hint(rng.uniform(1, 1024));
    if (!std::holds_alternative<HintHandle>(r)) ++misses;
  }
  EXPECT_LT(misses, 5u);
}

TEST(Consume, SingleSurvivorStaysSound) {
  const auto db = Database::generate(20, 4, 8);
  auto pool = fixture_single_cover(db, 7, 1);
  ASSERT_EQ(pool.hints().size(), 2u);
  auto h = std::get<HintHandle>(pool.find_covering_hint(7));
  pool.consume_and_replenish(h, 7, entry(db, 7));
  const auto& other = pool.hints()[1 - h.slot];
  EXPECT_FALSE(other.consumed);
  EXPECT_EQ(other.replacement_index, 7u);
  EXPECT_EQ(recompute_parity(other, db, 3), other.parity);
  EXPECT_TRUE(pool_is_sound(pool, db));
}

TEST(Consume, SameIndexLeavesParity) {
  const auto db = Database::generate(20, 4, 8);
  auto st = fixture_single_cover(db, 7, 1).state();
  // Point the survivor's slot at index 7 already.
  auto& other = st.hints[1];
  other.replacement_index = 7;
  other.replacement_value = entry(db, 7);
  other.parity = recompute_parity(other, db, 3);
  const Bytes parity_before = other.parity;
  HintPool pool(st);
  pool.consume_and_replenish({0}, 7, entry(db, 7));
  EXPECT_EQ(pool.hints()[1].parity, parity_before);
  EXPECT_EQ(pool.hints()[1].replacement_index, 7u);
  EXPECT_EQ(pool.hints()[1].replacement_value, entry(db, 7));
}

TEST(Consume, ContractViolations) {
  const auto db = Database::generate(20, 4, 8);
  auto pool = fixture_single_cover(db, 7, 3);
  auto h = std::get<HintHandle>(pool.find_covering_hint(7));
  EXPECT_THROW(pool.consume_and_replenish(h, 7, Bytes(3)), ContractViolation);
  pool.consume_and_replenish(h, 7, entry(db, 7));
  EXPECT_THROW(pool.consume_and_replenish(h, 7, entry(db, 7)),
               ContractViolation);
  // A hint that does not contain the index.
  for (std::size_t s = 0; s < pool.hints().size(); ++s) {
    if (!pool.hints()[s].consumed && !pool.effective_multiset({s}).contains(9)) {
      EXPECT_THROW(pool.consume_and_replenish({s}, 9, entry(db, 9)),
                   ContractViolation);
      break;
    }
  }
}

TEST(Consume, LastHintSkipsReplenish) {
  const auto db = Database::generate(20, 4, 8);
  PoolState st;
  st.params = small_params(20, 3, 1, 4);
  const Hint h = make_hint(db, 3, {5});
  st.hints.push_back(h);
  HintPool pool(st);
  pool.consume_and_replenish({0}, h.replacement_index,
                             entry(db, h.replacement_index));
  EXPECT_EQ(pool.replenish_skips(), 1u);
  EXPECT_EQ(pool.unconsumed_count(), 0u);
}

TEST(Consume, ParitySoundThroughManyQueries) {
  const auto db = Database::generate(256, 8, 21);
  auto pool = preprocess(entries_of(db), compute_params(256, 8), 17);
  Prg rng(3);
  for (int q = 0; q < 16; ++q) {
    const auto i = rng.uniform(1, 256);
    auto r = pool.find_covering_hint(i);
    if (auto* h = std::get_if<HintHandle>(&r)) {
      pool.consume_and_replenish(*h, i, entry(db, i));
      // Consumed hints never come back.
      for (std::size_t s : pool.scan_covering(i)) {
        EXPECT_FALSE(pool.hints()[s].consumed);
        EXPECT_NE(s, h->slot);
      }
    }
    ASSERT_TRUE(pool_is_sound(pool, db)) << "after query " << q;
  }
}

TEST(NextGen, DuplicateOccurrencesFoldTogether) {
  // Find a seed whose expansion over [8] holds 7 twice.
  const std::uint64_t n = 8, k = 3;
  MultisetSeed seed{};
  for (std::uint64_t s = 0;; ++s) {
    const auto e = expand_multiset_from_seed(n, k, {s}).elements();
    if (std::count(e.begin(), e.end(), 7) == 2) {
      seed = {s};
      break;
    }
  }
  PartialHint ph;
  ph.seed = seed;
  ph.partial_parity = Bytes(2, 0);
  ph.replacement_position = replacement_position_for(seed, k);
  ph.replacement_index =
      expand_multiset_from_seed(n, k, seed).elements()[ph.replacement_position - 1];
  NextGeneration gen(n, k, 2, {ph}, {}, {});
  auto before = gen.missing(0);
  EXPECT_EQ(std::count_if(before.begin(), before.end(),
                          [](auto pr) { return pr.second == 7; }),
            2);
  gen.ingest(7, Bytes{0xAB, 0xCD});
  auto after = gen.missing(0);
  EXPECT_EQ(after.size(), 1u);
  EXPECT_NE(after[0].second, 7u);
  // Two copies of the same value cancel.
  EXPECT_TRUE(is_zero(gen.partials()[0].partial_parity));
  EXPECT_EQ(gen.partials()[0].missing_count, 1u);
}

TEST(NextGen, UnreferencedIndexGoesToSideStore) {
  const std::uint64_t n = 8, k = 2;
  PartialHint ph;
  ph.seed = {1};
  ph.partial_parity = Bytes(1, 0);
  const auto e = expand_multiset_from_seed(n, k, ph.seed).elements();
  ph.replacement_position = 1;
  ph.replacement_index = e[0];
  NextGeneration gen(n, k, 1, {ph}, {}, {});
  std::uint64_t free_index = 1;
  while (std::count(e.begin(), e.end(), free_index)) ++free_index;
  const auto before = gen.partials()[0].partial_parity;
  gen.ingest(free_index, Bytes{9});
  EXPECT_EQ(gen.partials()[0].partial_parity, before);
  EXPECT_EQ(gen.partials()[0].missing_count, 2u);
  EXPECT_EQ(gen.side_store().at(free_index), Bytes{9});
}

TEST(Refresh, CompletePartialsNeedNoFetch) {
  const auto db = Database::generate(64, 4, 2);
  auto pool = preprocess(entries_of(db), compute_params(64, 4), 3);
  for (std::uint64_t i = 1; i <= 64; ++i) {
    pool.ingest_for_next_generation(i, entry(db, i));
  }
  EXPECT_EQ(pool.next_generation().completed_count(),
            pool.next_generation().partials().size());
  bool fetched = false;
  const auto rep = pool.refresh_phase(
      [&](std::span<const std::uint64_t>) {
        fetched = true;
        return std::vector<Bytes>{};
      },
      {});
  EXPECT_FALSE(fetched);
  EXPECT_EQ(rep.bytes_fetched, 0u);
  EXPECT_FALSE(rep.cold_start);
  EXPECT_TRUE(pool_is_sound(pool, db));
  EXPECT_EQ(pool.queries_this_phase(), 0u);
  EXPECT_TRUE(pool.entry_cache().empty());
}

TEST(Refresh, FetchesMissingInQueryShapedBatches) {
  const auto db = Database::generate(100, 4, 2);
  const auto p = compute_params(100, 4);
  auto pool = preprocess(entries_of(db), p, 3);
  for (std::uint64_t i = 1; i <= 100; i += 3) {
    pool.ingest_for_next_generation(i, entry(db, i));
  }
  const auto seeds_next = pool.next_generation().partials().front().seed;
  std::uint64_t calls = 0;
  const auto rep = pool.refresh_phase(
      [&](std::span<const std::uint64_t> idx) {
        ++calls;
        EXPECT_EQ(idx.size(), p.k - 1);
        EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
        std::vector<Bytes> out;
        for (auto i : idx) out.push_back(entry(db, i));
        return out;
      },
      {});
  EXPECT_EQ(rep.completion_requests, calls);
  EXPECT_EQ(rep.bytes_fetched, calls * (p.k - 1) * 4);
  EXPECT_EQ(pool.hints().front().seed, seeds_next);
  EXPECT_TRUE(pool_is_sound(pool, db));
  // A fresh next generation has begun.
  EXPECT_FALSE(pool.next_generation().empty());
}

TEST(Refresh, CallbackFailureKeepsOldPool) {
  const auto db = Database::generate(100, 4, 2);
  auto pool = preprocess(entries_of(db), compute_params(100, 4), 3);
  auto h = std::get<HintHandle>(pool.find_covering_hint(5));
  pool.consume_and_replenish(h, 5, entry(db, 5));
  pool.note_query();
  const auto before = pool.state();
  EXPECT_THROW(pool.refresh_phase(
                   [](std::span<const std::uint64_t>) -> std::vector<Bytes> {
                     throw NetworkError("link down");
                   },
                   {}),
               NetworkError);
  const auto after = pool.state();
  EXPECT_EQ(after.hints.size(), before.hints.size());
  for (std::size_t s = 0; s < after.hints.size(); ++s) {
    EXPECT_EQ(after.hints[s].seed, before.hints[s].seed);
    EXPECT_EQ(after.hints[s].parity, before.hints[s].parity);
    EXPECT_EQ(after.hints[s].consumed, before.hints[s].consumed);
  }
  EXPECT_EQ(after.entry_cache, before.entry_cache);
  EXPECT_EQ(after.queries_this_phase, 1u);
  EXPECT_EQ(after.rng_state, before.rng_state);
  EXPECT_TRUE(pool_is_sound(pool, db));
}

TEST(Refresh, ColdStartStreamsDatabase) {
  const auto db = Database::generate(64, 4, 2);
  PoolOptions o;
  o.continuous = false;
  auto pool = preprocess(entries_of(db), compute_params(64, 4), 3, o);
  EXPECT_TRUE(pool.next_generation().empty());
  const auto counter = pool.next_seed_counter();
  const auto rep = pool.refresh_phase(
      {}, [&](const EntrySink& sink) {
        for (std::uint64_t i = 1; i <= 64; ++i) sink(i, db.entry(i - 1));
      });
  EXPECT_TRUE(rep.cold_start);
  EXPECT_EQ(rep.bytes_streamed, 64u * 4u);
  EXPECT_GT(pool.next_seed_counter(), counter);
  EXPECT_TRUE(pool_is_sound(pool, db));
}

}  // namespace
}  // namespace mspir
