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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mspir/bytes.hpp"
#include "mspir/database.hpp"
#include "mspir/error.hpp"
#include "mspir/hint_pool.hpp"
#include "mspir/multiset.hpp"
#include "mspir/protocol.hpp"
#include "mspir/transport.hpp"

namespace mspir {

struct TrafficCounters {
  std::uint64_t requests = 0;
  std::uint64_t upload_frame_bytes = 0;
  std::uint64_t upload_payload_bytes = 0;  // index bytes
  std::uint64_t download_frame_bytes = 0;
  std::uint64_t download_payload_bytes = 0;
};

/// One client connection. Speaks math-layer (1-based) indices to callers and
/// wire indices to the server.
class ClientSession {
 public:
  explicit ClientSession(Transport& transport) : transport_(transport) {}

  const proto::ServerInfo& info() {
    if (!info_) {
      auto r = exchange(proto::QueryMessage::info());
      info_ = proto::decode_info(r.payload);
    }
    return *info_;
  }

  // Full database in index order; sink receives (math index, entry).
  void stream(const EntrySink& sink) {
    const auto& inf = info();
    const auto q = proto::QueryMessage::stream();
    const Bytes frame = proto::encode_request(q);
    transport_.send(frame);
    count_upload(frame.size(), 0);

    proto::TranscriptEntry te{q, frame.size(), 0, 0, proto::Status::kOk};
    const std::uint64_t total = inf.n * inf.beta;
    Bytes pending;
    std::uint64_t next_index = 1;
    std::uint64_t received = 0;
    while (true) {
      auto [tag, body] = read_frame();
      te.response_frame_bytes += proto::kFrameHeaderBytes + body.size();
      auto resp = proto::decode_response_body(tag, body);
      if (resp.status != proto::Status::kOk) {
        te.status = resp.status;
        transcript_.append(te);
        throw ProtocolError(std::string("STREAM failed: ") +
                                proto::to_string(resp.error),
                            static_cast<int>(resp.error));
      }
      if (resp.payload.empty()) break;
      received += resp.payload.size();
      if (received > total) throw IntegrityError("STREAM overran n * beta");
      pending.insert(pending.end(), resp.payload.begin(), resp.payload.end());
      std::size_t off = 0;
      while (pending.size() - off >= inf.beta) {
        sink(next_index++, ByteView(pending).subspan(off, inf.beta));
        off += inf.beta;
      }
      pending.erase(pending.begin(),
                    pending.begin() + static_cast<std::ptrdiff_t>(off));
    }
    te.response_payload_bytes = received;
    count_download(te.response_frame_bytes, received);
    transcript_.append(te);
    if (received != total) {
      throw IntegrityError("STREAM ended after " + std::to_string(received) +
                           " of " + std::to_string(total) + " bytes");
    }
  }

  // Raw entries for the given math indices, in ascending index order.
  std::vector<Bytes> fetch(const std::vector<std::uint64_t>& math_indices) {
    const auto& inf = info();
    auto q = proto::QueryMessage::from_math(proto::Opcode::kFetch,
                                            math_indices);
    auto r = exchange(q);
    if (r.payload.size() != q.indices.size() * inf.beta) {
      throw ProtocolError("FETCH payload has wrong length");
    }
    std::vector<Bytes> out;
    out.reserve(q.indices.size());
    for (std::size_t t = 0; t < q.indices.size(); ++t) {
      auto first = r.payload.begin() + static_cast<std::ptrdiff_t>(t * inf.beta);
      out.emplace_back(first, first + static_cast<std::ptrdiff_t>(inf.beta));
    }
    return out;
  }

  Bytes xor_fetch(const std::vector<std::uint64_t>& math_indices) {
    const auto& inf = info();
    auto r = exchange(proto::QueryMessage::from_math(proto::Opcode::kXorFetch,
                                                     math_indices));
    if (r.payload.size() != inf.beta) {
      throw ProtocolError("XOR_FETCH payload has wrong length");
    }
    return std::move(r.payload);
  }

  const proto::Transcript& transcript() const { return transcript_; }
  const TrafficCounters& traffic() const { return traffic_; }

 private:
  std::pair<std::uint8_t, Bytes> read_frame() {
    std::uint8_t header[proto::kFrameHeaderBytes];
    transport_.recv_exact(header);
    const auto h = proto::parse_frame_header(header);
    Bytes body(h.body_length);
    transport_.recv_exact(body);
    return {h.tag, std::move(body)};
  }

  proto::ResponseMessage exchange(const proto::QueryMessage& q) {
    const Bytes frame = proto::encode_request(q);
    transport_.send(frame);
    count_upload(frame.size(), q.indices.size() * 8);
    auto [tag, body] = read_frame();
    auto resp = proto::decode_response_body(tag, body);
    const std::uint64_t frame_bytes = proto::kFrameHeaderBytes + body.size();
    count_download(frame_bytes, resp.payload.size());
    transcript_.append({q, frame.size(), resp.payload.size(), frame_bytes,
                        resp.status});
    if (resp.status != proto::Status::kOk) {
      throw ProtocolError(std::string("server error: ") +
                              proto::to_string(resp.error),
                          static_cast<int>(resp.error));
    }
    return resp;
  }

  void count_upload(std::uint64_t frame, std::uint64_t payload) {
    ++traffic_.requests;
    traffic_.upload_frame_bytes += frame;
    traffic_.upload_payload_bytes += payload;
  }
  void count_download(std::uint64_t frame, std::uint64_t payload) {
    traffic_.download_frame_bytes += frame;
    traffic_.download_payload_bytes += payload;
  }

  Transport& transport_;
  std::optional<proto::ServerInfo> info_;
  proto::Transcript transcript_;
  TrafficCounters traffic_;
};

enum class CacheHitPolicy {
  kSilent,      // answer locally, nothing on the wire
  kDummyQuery,  // also emit one dummy query so traffic looks the same
};

struct ClientOptions {
  CacheHitPolicy cache_hits = CacheHitPolicy::kSilent;
  SearchOptions search;
};

enum class QueryPath { kHint, kCache, kSideStore };

inline const char* to_string(QueryPath p) {
  switch (p) {
    case QueryPath::kHint: return "hint";
    case QueryPath::kCache: return "cache";
    case QueryPath::kSideStore: return "side-store";
  }
  return "?";
}

struct QueryOutcome {
  Bytes value;
  QueryPath path = QueryPath::kHint;
  bool dummy_sent = false;
  std::optional<RefreshReport> refresh;
  // Traffic of the online query itself (refresh traffic excluded).
  std::uint64_t wire_requests = 0;
  std::uint64_t upload_payload_bytes = 0;
  std::uint64_t download_payload_bytes = 0;
  // The redacted multiset sent, as math indices (empty if nothing sent).
  std::vector<std::uint64_t> redacted;
};

/// Online query flow over one session and one pool: cache check, covering
/// hint selection, redaction, server round trip, reconstruction,
/// consumption with replenishment, and (default mode) feeding the returned
/// entries into the next hint generation.
class PirClient {
 public:
  PirClient(ClientSession& session, HintPool& pool, ClientOptions options = {})
      : session_(session), pool_(pool), options_(options) {
    const auto& inf = session_.info();
    if (inf.n != pool_.params().n || inf.beta != pool_.params().beta) {
      throw ParameterError("pool parameters do not match the server");
    }
  }

  proto::ServerMode mode() { return session_.info().mode; }

  QueryOutcome query(std::uint64_t i) {
    QueryOutcome out;
    if (pool_.phase_exhausted()) out.refresh = refresh();

    auto found = pool_.find_covering_hint(i, options_.search);
    if (std::holds_alternative<NotCovered>(found)) {
      throw CoverageError("no unconsumed hint covers index " +
                          std::to_string(i));
    }
    pool_.note_query();
    const auto before = session_.traffic();

    if (auto* h = std::get_if<HintHandle>(&found)) {
      out.path = QueryPath::kHint;
      out.value = run_hint_query(*h, i, out.redacted);
    } else if (auto* c = std::get_if<CacheHit>(&found)) {
      out.path = QueryPath::kCache;
      out.value = std::move(c->value);
      if (options_.cache_hits == CacheHitPolicy::kDummyQuery) {
        run_dummy(out.redacted);
        out.dummy_sent = true;
      }
    } else {
      out.path = QueryPath::kSideStore;
      out.value = std::move(std::get<SideStoreHit>(found).value);
      run_dummy(out.redacted);
      out.dummy_sent = true;
    }

    const auto& after = session_.traffic();
    out.wire_requests = after.requests - before.requests;
    out.upload_payload_bytes =
        after.upload_payload_bytes - before.upload_payload_bytes;
    out.download_payload_bytes =
        after.download_payload_bytes - before.download_payload_bytes;
    return out;
  }

  RefreshReport refresh() {
    return pool_.refresh_phase(
        [this](std::span<const std::uint64_t> idx) {
          return session_.fetch({idx.begin(), idx.end()});
        },
        [this](const EntrySink& sink) { session_.stream(sink); });
  }

 private:
  // Redacts `target` from the hint, asks the server, rebuilds the entry and
  // consumes the hint. Throws before consuming if the exchange fails.
  Bytes run_hint_query(HintHandle handle, std::uint64_t target,
                       std::vector<std::uint64_t>& redacted_out) {
    const Multiset redacted = redact(pool_.effective_multiset(handle), target);
    const auto& idx = redacted.elements();
    Bytes value = pool_.hint(handle).parity;
    std::vector<Bytes> entries;
    if (mode() == proto::ServerMode::kCooperative) {
      xor_into(value, session_.xor_fetch(idx));
    } else {
      entries = session_.fetch(idx);
      for (const auto& e : entries) xor_into(value, e);
    }
    redacted_out = idx;
    pool_.consume_and_replenish(handle, target, value);
    for (std::size_t t = 0; t < entries.size(); ++t) {
      pool_.ingest_for_next_generation(idx[t], entries[t]);
    }
    pool_.ingest_for_next_generation(target, value);
    return value;
  }

  // A genuine query for a uniformly random index, bypassing the cache, so a
  // dummy is drawn exactly like a real query. Indices with no covering hint
  // are redrawn; after a bounded number of misses fall back to a random
  // element of a random unconsumed hint.
  void run_dummy(std::vector<std::uint64_t>& redacted_out) {
    const auto n = pool_.params().n;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto t = pool_.rng().uniform(1, n);
      const auto covering = pool_.scan_covering(t, options_.search);
      if (covering.empty()) continue;
      const auto pick = options_.search.early_exit
                            ? 0
                            : pool_.rng().uniform(0, covering.size() - 1);
      run_hint_query(HintHandle{covering[pick]}, t, redacted_out);
      return;
    }
    const HintHandle h = pool_.random_unconsumed_hint();
    const auto eff = pool_.effective_multiset(h);
    const auto j = eff.elements()[pool_.rng().uniform(0, eff.size() - 1)];
    run_hint_query(h, j, redacted_out);
  }

  ClientSession& session_;
  HintPool& pool_;
  ClientOptions options_;
};

/// Preprocess by streaming the whole database from the server.
inline HintPool preprocess_from_server(ClientSession& session,
                                       const CoverageParams& params,
                                       std::uint64_t master_seed,
                                       PoolOptions options = {}) {
  PoolBuilder builder(params, master_seed, std::move(options));
  session.stream(
      [&](std::uint64_t index, ByteView entry) { builder.accept(index, entry); });
  return std::move(builder).finish();
}

struct PhaseReport {
  std::uint64_t phase = 0;
  std::uint64_t queries = 0;
  std::uint64_t checked = 0;
  std::uint64_t correct = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t dummies = 0;
  std::uint64_t download_payload_bytes = 0;
  std::uint64_t upload_payload_bytes = 0;
  std::uint64_t completion_bytes = 0;
  std::uint64_t streamed_bytes = 0;
  // Per-query download payloads seen this phase.
  std::uint64_t min_query_download = 0;
  std::uint64_t max_query_download = 0;
};

struct RunReport {
  std::vector<PhaseReport> phases;
  std::uint64_t queries = 0;
  std::uint64_t checked = 0;
  std::uint64_t correct = 0;
  std::uint64_t total_download_bytes = 0;  // online + refresh
  double amortized_download_per_query = 0;
};

/// Runs `phases` x `queries_per_phase` uniformly random targets. Refresh
/// happens inside the query that finds the phase exhausted. If `oracle` is
/// given every value is compared with it.
inline RunReport run_phases(PirClient& client, std::uint64_t n,
                            std::uint64_t phases,
                            std::uint64_t queries_per_phase, Prg& targets,
                            const Database* oracle = nullptr) {
  RunReport run;
  for (std::uint64_t ph = 0; ph < phases; ++ph) {
    PhaseReport rep;
    rep.phase = ph + 1;
    for (std::uint64_t q = 0; q < queries_per_phase; ++q) {
      const auto i = targets.uniform(1, n);
      auto out = client.query(i);
      ++rep.queries;
      if (out.path == QueryPath::kCache) ++rep.cache_hits;
      if (out.dummy_sent) ++rep.dummies;
      rep.download_payload_bytes += out.download_payload_bytes;
      rep.upload_payload_bytes += out.upload_payload_bytes;
      if (out.wire_requests > 0) {
        if (rep.min_query_download == 0 ||
            out.download_payload_bytes < rep.min_query_download) {
          rep.min_query_download = out.download_payload_bytes;
        }
        rep.max_query_download =
            std::max(rep.max_query_download, out.download_payload_bytes);
      }
      if (out.refresh) {
        rep.completion_bytes += out.refresh->bytes_fetched;
        rep.streamed_bytes += out.refresh->bytes_streamed;
      }
      if (oracle) {
        ++rep.checked;
        const auto truth = oracle->entry(proto::to_wire_index(i));
        if (std::equal(truth.begin(), truth.end(), out.value.begin(),
                       out.value.end())) {
          ++rep.correct;
        }
      }
    }
    run.queries += rep.queries;
    run.checked += rep.checked;
    run.correct += rep.correct;
    run.total_download_bytes += rep.download_payload_bytes +
                                rep.completion_bytes + rep.streamed_bytes;
    run.phases.push_back(rep);
  }
  if (run.queries > 0) {
    run.amortized_download_per_query =
        static_cast<double>(run.total_download_bytes) /
        static_cast<double>(run.queries);
  }
  return run;
}

}  // namespace mspir
