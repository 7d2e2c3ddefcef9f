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
#include <map>
#include <vector>

#include "mspir/client.hpp"
#include "mspir/combinatorics.hpp"
#include "mspir/database.hpp"
#include "mspir/server.hpp"
#include "mspir/stats.hpp"

namespace mspir {

struct TranscriptTestConfig {
  std::uint64_t n = 4;
  std::uint64_t k = 3;
  std::uint64_t m = 0;  // 0: ceil(2 C ln n * n / k)
  double coverage_constant = 4.0;
  std::uint64_t beta = 8;
  proto::ServerMode mode = proto::ServerMode::kCooperative;
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  CacheHitPolicy cache_hits = CacheHitPolicy::kDummyQuery;
  std::uint64_t oracle_cap = kDefaultOracleCap;
};

struct RoundComparison {
  std::size_t round = 0;
  std::vector<std::uint64_t> counts_a;
  std::vector<std::uint64_t> counts_b;
  stats::ChiSquareResult two_sample;
  stats::ChiSquareResult uniform_a;
  stats::ChiSquareResult uniform_b;
  double total_variation = 0;
};

struct TranscriptTestReport {
  std::vector<Multiset> categories;  // M_{k-1} in lexicographic order
  std::vector<RoundComparison> rounds;
  std::uint64_t trials = 0;
  // Rounds in which some trial put nothing on the wire.
  std::uint64_t silent_rounds = 0;
};

namespace detail {

// Redacted multiset sent in each round as a category index; -1 for a round
// with nothing on the wire.
inline std::vector<std::int64_t> run_transcript_trial(
    const TranscriptTestConfig& cfg, const CoverageParams& params,
    const Database& db, RequestHandler& handler,
    const std::vector<std::uint64_t>& targets, std::uint64_t master,
    const std::map<std::vector<std::uint64_t>, std::size_t>& category_of) {
  InProcessTransport transport(handler);
  ClientSession session(transport);
  PoolOptions popts;
  popts.continuous = cfg.mode == proto::ServerMode::kDefault;
  PoolBuilder builder(params, master, popts);
  for (std::uint64_t i = 0; i < db.size(); ++i) {
    builder.accept(i + 1, db.entry(i));
  }
  HintPool pool = std::move(builder).finish();
  PirClient client(session, pool, {cfg.cache_hits, {}});

  std::vector<std::int64_t> out;
  out.reserve(targets.size());
  for (auto t : targets) {
    auto res = client.query(t);
    if (res.redacted.empty() && res.wire_requests == 0) {
      out.push_back(-1);
      continue;
    }
    out.push_back(static_cast<std::int64_t>(category_of.at(res.redacted)));
  }
  return out;
}

}  // namespace detail

/// Runs `trials` fresh-pool sessions per target sequence against an
/// in-process server and compares, round by round, the distribution of the
/// redacted multiset the server saw.
inline TranscriptTestReport transcript_distribution_test(
    const std::vector<std::uint64_t>& targets_a,
    const std::vector<std::uint64_t>& targets_b,
    const TranscriptTestConfig& cfg) {
  if (targets_a.size() != targets_b.size()) {
    throw ParameterError("transcript test: sequences differ in length");
  }
  if (cfg.k < 2) throw ParameterError("transcript test: k must be >= 2");
  if (targets_a.size() > cfg.k) {
    throw ParameterError("transcript test: sequence longer than one phase");
  }
  CoverageParams params;
  params.n = cfg.n;
  params.k = cfg.k;
  params.m = cfg.m ? cfg.m : hint_count_for(cfg.n, cfg.k, cfg.coverage_constant);
  params.coverage_constant = cfg.coverage_constant;
  params.beta = cfg.beta;

  TranscriptTestReport report;
  report.trials = cfg.trials;
  report.categories = enumerate_multisets(cfg.n, cfg.k - 1, cfg.oracle_cap);
  std::map<std::vector<std::uint64_t>, std::size_t> category_of;
  for (std::size_t c = 0; c < report.categories.size(); ++c) {
    category_of.emplace(report.categories[c].elements(), c);
  }

  const Database db = Database::generate(cfg.n, cfg.beta, cfg.seed);
  ServerConfig scfg;
  scfg.mode = cfg.mode;
  RequestHandler handler(db, scfg);

  const std::size_t rounds = targets_a.size();
  const std::size_t cats = report.categories.size();
  std::vector<std::vector<std::uint64_t>> ca(rounds,
                                             std::vector<std::uint64_t>(cats)),
      cb = ca;
  std::uint64_t silent = 0;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    // Independent master seeds for the two arms.
    const auto ma = Prg::at(cfg.seed, 2 * t);
    const auto mb = Prg::at(cfg.seed, 2 * t + 1);
    auto ra = detail::run_transcript_trial(cfg, params, db, handler, targets_a,
                                           ma, category_of);
    auto rb = detail::run_transcript_trial(cfg, params, db, handler, targets_b,
                                           mb, category_of);
    for (std::size_t r = 0; r < rounds; ++r) {
      if (ra[r] < 0 || rb[r] < 0) {
        ++silent;
        continue;
      }
      ++ca[r][static_cast<std::size_t>(ra[r])];
      ++cb[r][static_cast<std::size_t>(rb[r])];
    }
  }
  report.silent_rounds = silent;
  for (std::size_t r = 0; r < rounds; ++r) {
    RoundComparison rc;
    rc.round = r + 1;
    rc.counts_a = ca[r];
    rc.counts_b = cb[r];
    rc.two_sample = stats::chi_square_two_sample(rc.counts_a, rc.counts_b);
    rc.uniform_a = stats::chi_square_uniform(rc.counts_a);
    rc.uniform_b = stats::chi_square_uniform(rc.counts_b);
    rc.total_variation = stats::total_variation(rc.counts_a, rc.counts_b);
    report.rounds.push_back(std::move(rc));
  }
  return report;
}

}  // namespace mspir
