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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "mspir/bytes.hpp"
#include "mspir/combinatorics.hpp"
#include "mspir/error.hpp"
#include "mspir/multiset.hpp"
#include "mspir/params.hpp"
#include "mspir/prg.hpp"

// Client-side private state. All indices in this header are 1-based ([n]).

namespace mspir {

/// One hint: a seed that re-derives a size-k multiset, the XOR of its
/// entries, and a replacement slot that replenishment may rewrite.
///
/// The effective multiset is the seed's expansion with the element at
/// `replacement_position` swapped for `replacement_index`; `parity` is
/// always the XOR over the effective multiset.
struct Hint {
  MultisetSeed seed;
  Bytes parity;
  std::uint16_t replacement_position = 1;  // in [1, k]
  std::uint64_t replacement_index = 0;
  Bytes replacement_value;
  bool consumed = false;
};

struct HintHandle {
  std::size_t slot = 0;
  friend bool operator==(HintHandle, HintHandle) = default;
};

struct CacheHit {
  Bytes value;
};
struct SideStoreHit {
  Bytes value;
};
struct NotCovered {};

using CoverResult = std::variant<HintHandle, CacheHit, SideStoreHit, NotCovered>;

/// A next-generation hint whose parity is still being accumulated from
/// entries that arrive through online queries.
struct PartialHint {
  MultisetSeed seed;
  Bytes partial_parity;
  std::uint16_t replacement_position = 1;
  std::uint64_t replacement_index = 0;
  Bytes replacement_value;          // empty until that entry arrives
  std::uint64_t missing_count = 0;  // multiset occurrences not yet folded

  bool complete() const { return missing_count == 0; }
};

using SeedSource = std::function<MultisetSeed(std::uint64_t counter)>;

struct SearchOptions {
  unsigned threads = 1;
  // Return the first covering hint found instead of a uniform pick among
  // all of them. Faster, but the choice then depends on pool order.
  bool early_exit = false;
};

struct PoolOptions {
  // Maintain a next generation from entries seen online.
  bool continuous = true;
  // Overrides counter-mode seed derivation. Not persisted; tests only.
  SeedSource seed_source;
};

inline MultisetSeed counter_seed(std::uint64_t master_seed,
                                 std::uint64_t counter) {
  return MultisetSeed{Prg::at(master_seed, counter)};
}

inline std::uint16_t replacement_position_for(MultisetSeed seed,
                                              std::uint64_t k) {
  Prg prg(seed.value ^ prg_domain::kReplacementSlot);
  return static_cast<std::uint16_t>(prg.uniform(1, k));
}

// Expansion with the replacement slot applied. Not sorted in general.
inline void effective_elements_into(const Hint& h, std::uint64_t n,
                                    std::uint64_t k,
                                    std::vector<std::uint64_t>& out) {
  expand_multiset_into(n, k, h.seed, out);
  out[h.replacement_position - 1] = h.replacement_index;
}

inline Multiset effective_multiset(const Hint& h, std::uint64_t n,
                                   std::uint64_t k) {
  std::vector<std::uint64_t> e;
  effective_elements_into(h, n, k, e);
  return Multiset::from_unsorted(std::move(e), n);
}

namespace detail {

// Does the effective multiset contain i? `expansion` is the sorted seed
// expansion.
inline bool effective_covers(const std::vector<std::uint64_t>& expansion,
                             const Hint& h, std::uint64_t i) {
  if (h.replacement_index == i) return true;
  auto [lo, hi] = std::equal_range(expansion.begin(), expansion.end(), i);
  auto copies = hi - lo;
  if (expansion[h.replacement_position - 1] == i) --copies;
  return copies > 0;
}

struct VectorHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (auto x : v) h = Prg::mix64(h ^ x) + 0x9E3779B97F4A7C15ULL;
    return static_cast<std::size_t>(h);
  }
};

struct DrawnHint {
  MultisetSeed seed;
  std::vector<std::uint64_t> elements;  // sorted expansion
};

// Draws `count` hints from consecutive counters. Duplicate expansions are
// discarded whenever the multiset space is large enough to hold `count`
// distinct ones.
inline std::vector<DrawnHint> draw_hints(std::uint64_t n, std::uint64_t k,
                                         std::uint64_t count,
                                         std::uint64_t master_seed,
                                         std::uint64_t& counter,
                                         const SeedSource& source) {
  const bool dedup = count > 0 && !multiset_count_within(n, k, count - 1);
  std::unordered_set<std::vector<std::uint64_t>, VectorHash> seen;
  std::vector<DrawnHint> out;
  out.reserve(count);
  while (out.size() < count) {
    const auto seed = source ? source(counter) : counter_seed(master_seed,
                                                              counter);
    ++counter;
    DrawnHint d{seed, {}};
    expand_multiset_into(n, k, seed, d.elements);
    if (dedup && !seen.insert(d.elements).second) continue;
    out.push_back(std::move(d));
  }
  return out;
}

// For each index in [1, n], the hints referencing it and how many times.
class OccurrenceIndex {
 public:
  struct Ref {
    std::uint32_t hint;
    std::uint32_t copies;
  };

  OccurrenceIndex() = default;

  OccurrenceIndex(std::uint64_t n, const std::vector<DrawnHint>& hints) {
    offsets_.assign(n + 2, 0);
    std::size_t total = 0;
    for (const auto& h : hints) {
      for (std::size_t t = 0; t < h.elements.size(); ++t) {
        if (t == 0 || h.elements[t] != h.elements[t - 1]) {
          ++offsets_[h.elements[t] + 1];
          ++total;
        }
      }
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) {
      offsets_[i] += offsets_[i - 1];
    }
    refs_.resize(total);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t id = 0; id < hints.size(); ++id) {
      const auto& e = hints[id].elements;
      for (std::size_t t = 0; t < e.size();) {
        std::size_t u = t;
        while (u < e.size() && e[u] == e[t]) ++u;
        refs_[fill[e[t]]++] = Ref{static_cast<std::uint32_t>(id),
                                  static_cast<std::uint32_t>(u - t)};
        t = u;
      }
    }
  }

  std::span<const Ref> at(std::uint64_t index) const {
    return {refs_.data() + offsets_[index],
            refs_.data() + offsets_[index + 1]};
  }

  bool empty() const { return offsets_.empty(); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Ref> refs_;
};

}  // namespace detail

/// Hints under construction from entries seen during online queries.
class NextGeneration {
 public:
  NextGeneration() = default;

  NextGeneration(std::uint64_t n, std::uint64_t k, std::uint64_t beta,
                 std::vector<PartialHint> partials,
                 std::vector<bool> received,
                 std::map<std::uint64_t, Bytes> side_store)
      : n_(n),
        k_(k),
        beta_(beta),
        partials_(std::move(partials)),
        received_(std::move(received)),
        side_store_(std::move(side_store)) {
    if (received_.size() != n_ + 1) received_.assign(n_ + 1, false);
    rebuild_index();
  }

  // Fresh generation of `count` hints drawn from the seed counter.
  static NextGeneration begin(const CoverageParams& p,
                              std::uint64_t master_seed,
                              std::uint64_t& counter,
                              const SeedSource& source) {
    auto drawn =
        detail::draw_hints(p.n, p.k, p.m, master_seed, counter, source);
    std::vector<PartialHint> partials;
    partials.reserve(drawn.size());
    for (const auto& d : drawn) {
      PartialHint ph;
      ph.seed = d.seed;
      ph.partial_parity.assign(p.beta, 0);
      ph.replacement_position = replacement_position_for(d.seed, p.k);
      ph.replacement_index = d.elements[ph.replacement_position - 1];
      partials.push_back(std::move(ph));
    }
    return NextGeneration(p.n, p.k, p.beta, std::move(partials),
                          std::vector<bool>(p.n + 1, false), {});
  }

  bool empty() const { return partials_.empty(); }

  // Folds the true entry at `index` into every partial that references it,
  // once per occurrence. A second delivery of the same index is a no-op.
  void ingest(std::uint64_t index, ByteView value) {
    if (index < 1 || index > n_) {
      throw ParameterError("ingest: index outside [1, n]");
    }
    if (value.size() != beta_) throw IntegrityError("ingest: entry size");
    if (received_[index]) return;
    received_[index] = true;
    auto refs = index_.at(index);
    if (refs.empty()) {
      side_store_.emplace(index, Bytes(value.begin(), value.end()));
      return;
    }
    for (const auto& r : refs) {
      auto& ph = partials_[r.hint];
      if (r.copies % 2 == 1) xor_into(ph.partial_parity, value);
      ph.missing_count -= r.copies;
      if (ph.replacement_index == index) {
        ph.replacement_value.assign(value.begin(), value.end());
      }
    }
  }

  bool received(std::uint64_t index) const { return received_[index]; }

  std::vector<std::uint64_t> unreceived_indices() const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 1; i <= n_; ++i) {
      if (!received_[i]) out.push_back(i);
    }
    return out;
  }

  // (position, index) pairs of partial `id` still missing, positions 1-based
  // in the sorted expansion.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> missing(
      std::size_t id) const {
    std::vector<std::uint64_t> e;
    expand_multiset_into(n_, k_, partials_.at(id).seed, e);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (std::size_t t = 0; t < e.size(); ++t) {
      if (!received_[e[t]]) out.emplace_back(t + 1, e[t]);
    }
    return out;
  }

  std::size_t completed_count() const {
    return static_cast<std::size_t>(
        std::count_if(partials_.begin(), partials_.end(),
                      [](const PartialHint& p) { return p.complete(); }));
  }

  // Share of all m*k multiset slots already folded in.
  double folded_slot_fraction() const {
    if (partials_.empty()) return 0;
    std::uint64_t missing = 0;
    for (const auto& p : partials_) missing += p.missing_count;
    const double total = static_cast<double>(partials_.size() * k_);
    return 1.0 - static_cast<double>(missing) / total;
  }

  const std::vector<PartialHint>& partials() const { return partials_; }
  const std::vector<bool>& received_bitmap() const { return received_; }
  const std::map<std::uint64_t, Bytes>& side_store() const {
    return side_store_;
  }

 private:
  void rebuild_index() {
    std::vector<detail::DrawnHint> drawn;
    drawn.reserve(partials_.size());
    for (auto& ph : partials_) {
      detail::DrawnHint d{ph.seed, {}};
      expand_multiset_into(n_, k_, ph.seed, d.elements);
      ph.missing_count = 0;
      for (auto e : d.elements) {
        if (!received_[e]) ++ph.missing_count;
      }
      drawn.push_back(std::move(d));
    }
    index_ = detail::OccurrenceIndex(n_, drawn);
  }

  std::uint64_t n_ = 0;
  std::uint64_t k_ = 0;
  std::uint64_t beta_ = 0;
  std::vector<PartialHint> partials_;
  std::vector<bool> received_;  // 1-based
  std::map<std::uint64_t, Bytes> side_store_;
  detail::OccurrenceIndex index_;
};

/// Everything a pool consists of; the persistence layer round-trips this.
struct PoolState {
  CoverageParams params;
  std::uint64_t master_seed = 0;
  std::uint64_t next_seed_counter = 0;
  std::vector<Hint> hints;
  // Entries covered by no hint at preprocessing time, stored in full.
  std::map<std::uint64_t, Bytes> uncovered;
  std::map<std::uint64_t, Bytes> entry_cache;
  std::uint64_t queries_this_phase = 0;
  std::uint64_t rng_state = 0;
  bool continuous = true;
  NextGeneration next_generation;
};

struct RefreshReport {
  bool cold_start = false;
  std::uint64_t completion_requests = 0;
  std::uint64_t indices_fetched = 0;
  std::uint64_t bytes_fetched = 0;
  std::uint64_t bytes_streamed = 0;
};

// Indices are 1-based here; the protocol layer converts.
using FetchFn =
    std::function<std::vector<Bytes>(std::span<const std::uint64_t>)>;
using EntrySink = std::function<void(std::uint64_t index, ByteView entry)>;
using StreamFn = std::function<void(const EntrySink&)>;

class HintPool;

/// Single streaming pass over the database. Feed every entry in index
/// order through accept(), then finish().
class PoolBuilder {
 public:
  PoolBuilder(const CoverageParams& params, std::uint64_t master_seed,
              PoolOptions options = {}, std::uint64_t first_counter = 0)
      : params_(params),
        master_seed_(master_seed),
        counter_(first_counter),
        options_(std::move(options)) {
    if (params_.n < 1 || params_.k < 1) {
      throw ParameterError("PoolBuilder: need n >= 1 and k >= 1");
    }
    if (params_.beta < 1) {
      throw ParameterError("PoolBuilder: entries must be at least 1 byte");
    }
    if (params_.k > 0xFFFF) {
      throw ParameterError("PoolBuilder: k must fit the 16-bit slot field");
    }
    auto drawn = detail::draw_hints(params_.n, params_.k, params_.m,
                                    master_seed_, counter_,
                                    options_.seed_source);
    hints_.reserve(drawn.size());
    for (const auto& d : drawn) {
      Hint h;
      h.seed = d.seed;
      h.parity.assign(params_.beta, 0);
      h.replacement_position = replacement_position_for(d.seed, params_.k);
      h.replacement_index = d.elements[h.replacement_position - 1];
      hints_.push_back(std::move(h));
    }
    index_ = detail::OccurrenceIndex(params_.n, drawn);
  }

  void accept(std::uint64_t index, ByteView entry) {
    if (index != next_index_) {
      throw IntegrityError("preprocess: expected index " +
                           std::to_string(next_index_) + ", got " +
                           std::to_string(index));
    }
    if (index > params_.n) {
      throw IntegrityError("preprocess: stream longer than n entries");
    }
    if (entry.size() != params_.beta) {
      throw IntegrityError("preprocess: entry " + std::to_string(index) +
                           " has " + std::to_string(entry.size()) +
                           " bytes, expected " + std::to_string(params_.beta));
    }
    auto refs = index_.at(index);
    if (refs.empty()) {
      uncovered_.emplace(index, Bytes(entry.begin(), entry.end()));
    }
    for (const auto& r : refs) {
      auto& h = hints_[r.hint];
      if (r.copies % 2 == 1) xor_into(h.parity, entry);
      if (h.replacement_index == index) {
        h.replacement_value.assign(entry.begin(), entry.end());
      }
    }
    ++next_index_;
  }

  std::uint64_t entries_seen() const { return next_index_ - 1; }

  HintPool finish() &&;

 private:
  CoverageParams params_;
  std::uint64_t master_seed_;
  std::uint64_t counter_;
  PoolOptions options_;
  std::vector<Hint> hints_;
  detail::OccurrenceIndex index_;
  std::map<std::uint64_t, Bytes> uncovered_;
  std::uint64_t next_index_ = 1;
};

class HintPool {
 public:
  explicit HintPool(PoolState state, SeedSource seed_source = {})
      : s_(std::move(state)),
        rng_(s_.rng_state),
        seed_source_(std::move(seed_source)) {}

  const CoverageParams& params() const { return s_.params; }
  const std::vector<Hint>& hints() const { return s_.hints; }
  const std::map<std::uint64_t, Bytes>& entry_cache() const {
    return s_.entry_cache;
  }
  const std::map<std::uint64_t, Bytes>& uncovered_store() const {
    return s_.uncovered;
  }
  const NextGeneration& next_generation() const { return s_.next_generation; }
  std::uint64_t master_seed() const { return s_.master_seed; }
  std::uint64_t next_seed_counter() const { return s_.next_seed_counter; }
  std::uint64_t queries_this_phase() const { return s_.queries_this_phase; }
  bool continuous() const { return s_.continuous; }
  std::uint64_t replenish_skips() const { return replenish_skips_; }

  // Snapshot including the client RNG position.
  PoolState state() const {
    PoolState copy = s_;
    copy.rng_state = rng_.state();
    return copy;
  }

  // Client-side randomness (tie-breaking, replenishment target, dummies).
  Prg& rng() { return rng_; }

  bool phase_exhausted() const {
    return s_.queries_this_phase >= s_.params.k;
  }
  void note_query() { ++s_.queries_this_phase; }

  std::size_t unconsumed_count() const {
    return static_cast<std::size_t>(
        std::count_if(s_.hints.begin(), s_.hints.end(),
                      [](const Hint& h) { return !h.consumed; }));
  }

  const Hint& hint(HintHandle h) const { return s_.hints.at(h.slot); }

  Multiset effective_multiset(HintHandle h) const {
    return mspir::effective_multiset(hint(h), s_.params.n, s_.params.k);
  }

  /// Cache first, then a scan over every unconsumed hint (uniform pick among
  /// all covering hints unless early_exit), then the uncovered-entry store.
  CoverResult find_covering_hint(std::uint64_t i,
                                 const SearchOptions& opts = {}) {
    check_index(i);
    if (auto it = s_.entry_cache.find(i); it != s_.entry_cache.end()) {
      return CacheHit{it->second};
    }
    auto covering = scan_covering(i, opts);
    if (!covering.empty()) {
      if (opts.early_exit) return HintHandle{covering.front()};
      const auto pick = rng_.uniform(0, covering.size() - 1);
      return HintHandle{covering[pick]};
    }
    if (auto it = s_.uncovered.find(i); it != s_.uncovered.end()) {
      return SideStoreHit{it->second};
    }
    return NotCovered{};
  }

  // Slots of all unconsumed hints whose effective multiset contains i.
  std::vector<std::size_t> scan_covering(std::uint64_t i,
                                         const SearchOptions& opts = {}) const {
    const std::size_t total = s_.hints.size();
    const unsigned threads =
        std::max(1u, std::min<unsigned>(opts.threads,
                                         static_cast<unsigned>(total / 64 + 1)));
    if (threads == 1) return scan_range(i, 0, total, opts.early_exit);

    std::vector<std::vector<std::size_t>> parts(threads);
    {
      std::vector<std::jthread> workers;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = total * t / threads;
        const std::size_t hi = total * (t + 1) / threads;
        workers.emplace_back([&, t, lo, hi] {
          parts[t] = scan_range(i, lo, hi, opts.early_exit);
        });
      }
    }
    std::vector<std::size_t> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  }

  HintHandle random_unconsumed_hint() {
    const auto alive = unconsumed_count();
    if (alive == 0) throw CoverageError("no unconsumed hints left");
    return HintHandle{nth_unconsumed(rng_.uniform(0, alive - 1))};
  }

  /// Marks `handle` consumed, rewrites the replacement slot of one uniformly
  /// random surviving hint to (i, value_i), and caches value_i.
  void consume_and_replenish(HintHandle handle, std::uint64_t i,
                             ByteView value_i) {
    check_index(i);
    if (handle.slot >= s_.hints.size()) {
      throw ContractViolation("consume: invalid hint handle");
    }
    auto& used = s_.hints[handle.slot];
    if (used.consumed) {
      throw ContractViolation("consume: hint already consumed");
    }
    if (value_i.size() != s_.params.beta) {
      throw ContractViolation("consume: entry size mismatch");
    }
    {
      std::vector<std::uint64_t> e;
      expand_multiset_into(s_.params.n, s_.params.k, used.seed, e);
      if (!detail::effective_covers(e, used, i)) {
        throw ContractViolation("consume: hint does not cover index");
      }
    }
    used.consumed = true;
    s_.entry_cache[i] = Bytes(value_i.begin(), value_i.end());

    const auto alive = unconsumed_count();
    if (alive == 0) {
      ++replenish_skips_;
      return;
    }
    auto& target = s_.hints[nth_unconsumed(rng_.uniform(0, alive - 1))];
    xor_into(target.parity, target.replacement_value);
    xor_into(target.parity, value_i);
    target.replacement_index = i;
    target.replacement_value.assign(value_i.begin(), value_i.end());
  }

  void ingest_for_next_generation(std::uint64_t index, ByteView value) {
    if (s_.next_generation.empty()) return;
    s_.next_generation.ingest(index, value);
  }

  /// Promotes the next generation to active. Entries it still lacks are
  /// fetched through `fetch_missing` in batches of k - 1 (the last batch
  /// padded with random indices). Without a next generation the whole
  /// database is re-streamed through `stream_all`. On any exception the
  /// pool is left unchanged.
  RefreshReport refresh_phase(const FetchFn& fetch_missing,
                              const StreamFn& stream_all) {
    RefreshReport report;
    PoolState next = s_;
    Prg rng = rng_;
    const auto& p = s_.params;

    if (next.next_generation.empty()) {
      report.cold_start = true;
      if (!stream_all) throw ParameterError("refresh: no stream source");
      PoolOptions opts{s_.continuous, seed_source_};
      PoolBuilder builder(p, s_.master_seed, opts, s_.next_seed_counter);
      stream_all([&](std::uint64_t index, ByteView entry) {
        builder.accept(index, entry);
        report.bytes_streamed += entry.size();
      });
      if (builder.entries_seen() != p.n) {
        throw IntegrityError("refresh: stream ended early");
      }
      HintPool fresh = std::move(builder).finish();
      next.hints = std::move(fresh.s_.hints);
      next.uncovered = std::move(fresh.s_.uncovered);
      next.next_seed_counter = fresh.s_.next_seed_counter;
      next.next_generation = std::move(fresh.s_.next_generation);
    } else {
      const std::size_t batch = std::max<std::uint64_t>(1, p.k - 1);
      auto want = next.next_generation.unreceived_indices();
      for (std::size_t off = 0; off < want.size(); off += batch) {
        std::vector<std::uint64_t> req(
            want.begin() + off,
            want.begin() + std::min(want.size(), off + batch));
        while (req.size() < batch) req.push_back(rng.uniform(1, p.n));
        std::sort(req.begin(), req.end());
        auto entries = fetch_missing(req);
        if (entries.size() != req.size()) {
          throw IntegrityError("refresh: fetch returned wrong entry count");
        }
        ++report.completion_requests;
        for (std::size_t t = 0; t < req.size(); ++t) {
          next.next_generation.ingest(req[t], entries[t]);
          report.bytes_fetched += entries[t].size();
        }
        report.indices_fetched += req.size();
      }
      promote(next);
    }

    next.entry_cache.clear();
    next.queries_this_phase = 0;
    s_ = std::move(next);
    rng_ = rng;
    if (s_.continuous && s_.next_generation.empty()) start_next_generation();
    return report;
  }

  // Starts a next generation if continuous preprocessing is on and none
  // is in progress. Values already held locally are folded in for free.
  void start_next_generation() {
    if (!s_.continuous) return;
    s_.next_generation = NextGeneration::begin(
        s_.params, s_.master_seed, s_.next_seed_counter, seed_source_);
    for (const auto& [idx, value] : s_.uncovered) {
      s_.next_generation.ingest(idx, value);
    }
    for (const auto& h : s_.hints) {
      if (!h.replacement_value.empty()) {
        s_.next_generation.ingest(h.replacement_index, h.replacement_value);
      }
    }
  }

 private:
  friend class PoolBuilder;

  void check_index(std::uint64_t i) const {
    if (i < 1 || i > s_.params.n) {
      throw ParameterError("index " + std::to_string(i) +
                           " outside [1, " + std::to_string(s_.params.n) +
                           "]");
    }
  }

  std::size_t nth_unconsumed(std::uint64_t nth) const {
    for (std::size_t slot = 0; slot < s_.hints.size(); ++slot) {
      if (s_.hints[slot].consumed) continue;
      if (nth-- == 0) return slot;
    }
    throw ContractViolation("nth_unconsumed: out of range");
  }

  std::vector<std::size_t> scan_range(std::uint64_t i, std::size_t lo,
                                      std::size_t hi, bool early_exit) const {
    std::vector<std::size_t> out;
    std::vector<std::uint64_t> e;
    for (std::size_t slot = lo; slot < hi; ++slot) {
      const auto& h = s_.hints[slot];
      if (h.consumed) continue;
      expand_multiset_into(s_.params.n, s_.params.k, h.seed, e);
      if (detail::effective_covers(e, h, i)) {
        out.push_back(slot);
        if (early_exit) break;
      }
    }
    return out;
  }

  static void promote(PoolState& st) {
    const auto& gen = st.next_generation;
    std::vector<Hint> hints;
    hints.reserve(gen.partials().size());
    for (const auto& ph : gen.partials()) {
      if (!ph.complete() || ph.replacement_value.empty()) {
        throw IntegrityError("refresh: partial hint left incomplete");
      }
      Hint h;
      h.seed = ph.seed;
      h.parity = ph.partial_parity;
      h.replacement_position = ph.replacement_position;
      h.replacement_index = ph.replacement_index;
      h.replacement_value = ph.replacement_value;
      hints.push_back(std::move(h));
    }
    st.hints = std::move(hints);
    st.uncovered = gen.side_store();
    st.next_generation = NextGeneration();
  }

  PoolState s_;
  Prg rng_;
  SeedSource seed_source_;
  std::uint64_t replenish_skips_ = 0;
};

inline HintPool PoolBuilder::finish() && {
  if (entries_seen() != params_.n) {
    throw IntegrityError("preprocess: stream ended after " +
                         std::to_string(entries_seen()) + " of " +
                         std::to_string(params_.n) + " entries");
  }
  PoolState st;
  st.params = params_;
  st.master_seed = master_seed_;
  st.next_seed_counter = counter_;
  st.hints = std::move(hints_);
  st.uncovered = std::move(uncovered_);
  st.rng_state = Prg::mix64(master_seed_ ^ prg_domain::kClient);
  st.continuous = options_.continuous;
  HintPool pool(std::move(st), std::move(options_.seed_source));
  pool.start_next_generation();
  return pool;
}

/// Convenience: preprocess from an in-memory list of entries ([0] is index 1).
inline HintPool preprocess(std::span<const Bytes> entries,
                           const CoverageParams& params,
                           std::uint64_t master_seed,
                           PoolOptions options = {}) {
  PoolBuilder builder(params, master_seed, std::move(options));
  for (std::size_t t = 0; t < entries.size(); ++t) {
    builder.accept(t + 1, entries[t]);
  }
  return std::move(builder).finish();
}

}  // namespace mspir
