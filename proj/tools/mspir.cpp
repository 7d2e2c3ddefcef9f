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


// mspir: generate databases, serve them, run PIR clients, verify the math
// and run latency sweeps. See --help on each subcommand.

#include <signal.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mspir/mspir.hpp"

namespace {

using json = nlohmann::json;
using namespace mspir;

// Exit codes, also listed in the top-level --help footer.
enum Exit : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kNetwork = 3,
  kPool = 4,
  kCoverage = 5,
  kProtocol = 6,
  kVerifyFailed = 7,
};

constexpr const char* kExitHelp =
    "Exit codes: 0 ok, 1 other error, 2 usage, 3 network, 4 pool file, "
    "5 coverage, 6 protocol, 7 verification failed.\n"
    "Every flag FOO-BAR can also be set as MSPIR_FOO_BAR in the environment; "
    "the command line wins.";

class PoolFileError : public Error {
 public:
  using Error::Error;
};

std::string env_name(const std::string& flag) {
  std::string out = "MSPIR_";
  for (char c : flag) {
    out += c == '-' ? '_' : static_cast<char>(std::toupper(
                                static_cast<unsigned char>(c)));
  }
  return out;
}

// Adds --name with its MSPIR_ environment override.
template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& var,
                  const std::string& desc) {
  return app->add_option("--" + name, var, desc)->envname(env_name(name));
}

CLI::Option* toggle(CLI::App* app, const std::string& name, bool& var,
                    const std::string& desc) {
  return app->add_flag("--" + name, var, desc)->envname(env_name(name));
}

CacheHitPolicy parse_policy(const std::string& s) {
  if (s == "silent") return CacheHitPolicy::kSilent;
  if (s == "dummy") return CacheHitPolicy::kDummyQuery;
  throw ParameterError("cache-hits must be silent or dummy");
}

HintPool open_pool(const std::string& path) {
  try {
    return load_pool(path);
  } catch (const Error& e) {
    throw PoolFileError(e.what());
  }
}

std::vector<std::uint64_t> parse_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ParameterError("bad list element '" + item + "'");
    }
  }
  return out;
}

struct Output {
  bool as_json = false;
  json doc = json::object();

  // Human line; suppressed in JSON mode.
  void line(const std::string& s) const {
    if (!as_json) std::cout << s << '\n';
  }
  void finish() const {
    if (as_json) std::cout << doc.dump(2) << '\n';
  }
};

// ---- gen-db -----------------------------------------------------------------

struct GenDbArgs {
  std::uint64_t n = 0, beta = 0, seed = 0;
  std::string out;
};

int run_gen_db(const GenDbArgs& a, Output& o) {
  gen_db(a.n, a.beta, a.seed, a.out);
  o.doc = {{"path", a.out}, {"n", a.n}, {"beta", a.beta}, {"seed", a.seed},
           {"bytes", 20 + a.n * a.beta}};
  o.line("wrote " + a.out + " (" + std::to_string(20 + a.n * a.beta) +
         " bytes)");
  return kOk;
}

// ---- serve ------------------------------------------------------------------

struct ServeArgs {
  std::string db, mode = "default", listen = "127.0.0.1:7470";
  std::uint64_t max_indices = 0, max_sessions = 64;
  double io_bytes_per_ms = 0;
};

int run_serve(const ServeArgs& a, Output& o) {
  ServerConfig cfg;
  cfg.mode = proto::parse_mode(a.mode);
  cfg.listen = a.listen;
  cfg.max_indices = a.max_indices;
  cfg.max_sessions = a.max_sessions;
  cfg.io_bytes_per_ms = a.io_bytes_per_ms;
  const Database db = Database::open(a.db);

  // Block before the server spawns threads so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  ServerStats stats;
  TcpServer server(db, cfg, &stats);
  const auto port = server.start();
  const auto host = net::parse_endpoint(a.listen).host;
  if (o.as_json) {
    std::cout << json{{"listening", host + ":" + std::to_string(port)},
                      {"mode", a.mode}, {"n", db.size()},
                      {"beta", db.entry_bytes()}}.dump()
              << std::endl;
  } else {
    std::cout << "listening on " << host << ":" << port << " (" << a.mode
              << " mode, n=" << db.size() << ", beta=" << db.entry_bytes()
              << ")" << std::endl;
  }
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  std::cerr << "stopped: " << stats.requests << " requests, "
            << stats.xor_ops << " xor ops\n";
  return kOk;
}

// ---- preprocess ---------------------------------------------------------------

struct PreprocessArgs {
  std::string server = "127.0.0.1:7470", out;
  std::uint64_t seed = 1;
  double coverage = 4.0;
};

int run_preprocess(const PreprocessArgs& a, Output& o) {
  TcpTransport transport(a.server);
  ClientSession session(transport);
  const auto info = session.info();
  const auto params = compute_params(info.n, info.beta, a.coverage);
  PoolOptions po;
  po.continuous = info.mode == proto::ServerMode::kDefault;
  HintPool pool = preprocess_from_server(session, params, a.seed, po);
  save_pool(pool, a.out);
  o.doc = {{"pool", a.out},     {"n", params.n},
           {"k", params.k},     {"m", params.m},
           {"beta", params.beta}, {"mode", proto::to_string(info.mode)},
           {"uncovered", pool.state().uncovered.size()},
           {"streamed_bytes", session.traffic().download_payload_bytes}};
  o.line("pool " + a.out + ": n=" + std::to_string(params.n) +
         " k=" + std::to_string(params.k) + " m=" + std::to_string(params.m) +
         " uncovered=" + std::to_string(pool.state().uncovered.size()));
  return kOk;
}

// ---- query ------------------------------------------------------------------

struct QueryArgs {
  std::string server = "127.0.0.1:7470", pool, mode, key, keymap;
  std::string cache_hits = "silent";
  std::optional<std::uint64_t> index;
};

int run_query(const QueryArgs& a, Output& o) {
  if (a.index.has_value() == !a.key.empty()) {
    throw ParameterError("give exactly one of --index or --key");
  }
  if (!a.key.empty() && a.keymap.empty()) {
    throw ParameterError("--key needs --keymap");
  }
  const auto policy = parse_policy(a.cache_hits);
  std::optional<proto::ServerMode> want;
  if (!a.mode.empty()) want = proto::parse_mode(a.mode);

  std::uint64_t index0 = 0;
  if (a.index) {
    index0 = *a.index;
  } else {
    const auto km = KeyMap::load(a.keymap);
    const auto hit = km.lookup(a.key);
    if (!hit) throw ParameterError("key '" + a.key + "' not in keymap");
    index0 = *hit;
  }

  HintPool pool = open_pool(a.pool);
  if (index0 >= pool.params().n) {
    throw ParameterError("index " + std::to_string(index0) +
                         " outside [0, " + std::to_string(pool.params().n) +
                         ")");
  }
  TcpTransport transport(a.server);
  ClientSession session(transport);
  if (want && session.info().mode != *want) {
    throw ProtocolError(std::string("server runs in ") +
                        proto::to_string(session.info().mode) + " mode");
  }
  PirClient client(session, pool, {policy, {}});
  const auto out = client.query(index0 + 1);
  save_pool(pool, a.pool);

  o.doc = {{"index", index0},
           {"value", to_hex(out.value)},
           {"path", to_string(out.path)},
           {"dummy_sent", out.dummy_sent},
           {"refreshed", out.refresh.has_value()},
           {"uploaded", out.upload_payload_bytes},
           {"downloaded", out.download_payload_bytes}};
  if (!a.key.empty()) o.doc["key"] = a.key;
  o.line("value: " + to_hex(out.value));
  if (out.path == QueryPath::kCache && out.wire_requests == 0) {
    o.line("cache hit, 0 bytes");
  } else {
    o.line("downloaded: " + std::to_string(out.download_payload_bytes) +
           " bytes");
    o.line("uploaded: " + std::to_string(out.upload_payload_bytes) +
           " bytes");
  }
  return kOk;
}

// ---- run-phases ---------------------------------------------------------------

struct RunPhasesArgs {
  std::string server = "127.0.0.1:7470", pool, oracle_db;
  std::string cache_hits = "silent";
  std::uint64_t phases = 1, queries_per_phase = 0, seed = 1;
};

int run_run_phases(const RunPhasesArgs& a, Output& o) {
  const auto policy = parse_policy(a.cache_hits);
  if (a.phases == 0) {
    o.doc = {{"phases", json::array()}, {"queries", 0}};
    o.line("nothing to do");
    return kOk;
  }
  std::optional<Database> oracle;
  if (!a.oracle_db.empty()) oracle = Database::open(a.oracle_db);
  HintPool pool = open_pool(a.pool);
  if (oracle && (oracle->size() != pool.params().n ||
                 oracle->entry_bytes() != pool.params().beta)) {
    throw ParameterError("oracle database does not match the pool");
  }
  TcpTransport transport(a.server);
  ClientSession session(transport);
  PirClient client(session, pool, {policy, {}});
  const auto qpp = a.queries_per_phase ? a.queries_per_phase : pool.params().k;
  Prg targets(a.seed);
  const auto rep = run_phases(client, pool.params().n, a.phases, qpp, targets,
                              oracle ? &*oracle : nullptr);
  save_pool(pool, a.pool);

  json phases = json::array();
  for (const auto& ph : rep.phases) {
    json j = {{"phase", ph.phase},
              {"queries", ph.queries},
              {"cache_hits", ph.cache_hits},
              {"dummies", ph.dummies},
              {"download_bytes", ph.download_payload_bytes},
              {"upload_bytes", ph.upload_payload_bytes},
              {"completion_bytes", ph.completion_bytes},
              {"streamed_bytes", ph.streamed_bytes}};
    std::string s = "phase " + std::to_string(ph.phase) + ": " +
                    std::to_string(ph.queries) + " queries, " +
                    std::to_string(ph.cache_hits) + " cache hits, download " +
                    std::to_string(ph.download_payload_bytes) +
                    " B, completion " + std::to_string(ph.completion_bytes) +
                    " B, streamed " + std::to_string(ph.streamed_bytes) + " B";
    if (oracle) {
      j["correct"] = ph.correct;
      s += ", correct " + std::to_string(ph.correct) + "/" +
           std::to_string(ph.checked);
    }
    phases.push_back(j);
    o.line(s);
  }
  o.doc = {{"mode", proto::to_string(session.info().mode)},
           {"phases", phases},
           {"queries", rep.queries},
           {"total_download_bytes", rep.total_download_bytes},
           {"amortized_download_per_query", rep.amortized_download_per_query}};
  if (oracle) {
    o.doc["correct"] = rep.correct;
    o.doc["checked"] = rep.checked;
    o.line("correct: " + std::to_string(rep.correct) + "/" +
           std::to_string(rep.checked));
  }
  std::ostringstream am;
  am << rep.amortized_download_per_query;
  o.line("amortized download per query: " + am.str() + " bytes");
  if (oracle && rep.correct != rep.checked) return kVerifyFailed;
  return kOk;
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string suite;
  std::uint64_t n = 4, k = 3, seed = 1, samples = 150'000, runs = 100;
  std::uint64_t trials = 100'000;
  double coverage = 4.0, significance = 0.001;
  std::string a = "1,1,1", b = "2,3,4", mode = "cooperative";
  std::string cache_hits = "dummy";
  std::uint64_t cap = kDefaultOracleCap;
};

std::string str(const BigInt& v) { return v.str(); }

bool verify_bijection(const VerifyArgs& a, Output& o) {
  const auto all = enumerate_multisets(a.n, a.k, a.cap);
  std::set<std::vector<std::uint64_t>> images;
  bool ok = true;
  for (const auto& m : all) {
    const auto s = subset_from_multiset(m);
    ok = ok && multiset_from_subset(s, a.n) == m;
    images.insert(s.elements());
  }
  ok = ok && images.size() == all.size() &&
       BigInt(all.size()) == binomial(a.n + a.k - 1, a.k);
  o.doc["multisets"] = all.size();
  o.line("multisets round-tripped: " + std::to_string(all.size()) +
         " (expected " + str(binomial(a.n + a.k - 1, a.k)) + ")");
  return ok;
}

bool verify_counts(const VerifyArgs& a, Output& o) {
  const auto c = combinatorial_counts(a.n, a.k);
  o.doc["M"] = str(c.total_multisets);
  o.doc["S_y"] = str(c.containing_multisets);
  std::ostringstream p;
  p << c.inclusion_probability;
  o.doc["p"] = p.str();
  o.line("M=" + str(c.total_multisets) + ", S_y=" +
         str(c.containing_multisets) + ", p=" + p.str());
  return true;
}

bool verify_redaction(const VerifyArgs& a, Output& o) {
  bool ok = true;
  json per = json::array();
  for (std::uint64_t i = 1; i <= a.n; ++i) {
    const auto r = verify_redaction_bijection(a.n, a.k, i, a.cap);
    ok = ok && r.holds;
    per.push_back({{"i", i}, {"R_i", r.covering_count}, {"holds", r.holds}});
    o.line("i=" + std::to_string(i) + ": |R_i| = " +
           std::to_string(r.covering_count) + " (expected " +
           str(r.expected_count) + ")" + (r.holds ? "" : " FAILS"));
  }
  o.doc["targets"] = per;
  return ok;
}

bool verify_uniformity(const VerifyArgs& a, Output& o) {
  const auto cats = enumerate_multisets(a.n, a.k, a.cap);
  std::map<std::vector<std::uint64_t>, std::size_t> index;
  for (std::size_t c = 0; c < cats.size(); ++c) index[cats[c].elements()] = c;
  std::vector<std::uint64_t> counts(cats.size());
  for (std::uint64_t j = 0; j < a.samples; ++j) {
    const auto m = expand_multiset_from_seed(a.n, a.k, {Prg::at(a.seed, j)});
    ++counts[index.at(m.elements())];
  }
  const auto r = stats::chi_square_uniform(counts);
  o.doc["categories"] = cats.size();
  o.doc["chi_square"] = r.statistic;
  o.doc["p_value"] = r.p_value;
  std::ostringstream s;
  s << cats.size() << " categories, " << a.samples << " seeds, chi2="
    << r.statistic << ", p=" << r.p_value;
  o.line(s.str());
  return !r.rejects(a.significance);
}

bool verify_coverage(const VerifyArgs& a, Output& o) {
  const auto params = compute_params(a.n, 1, a.coverage);
  std::uint64_t full = 0;
  double sum = 0;
  for (std::uint64_t r = 0; r < a.runs; ++r) {
    std::uint64_t counter = 0;
    const auto drawn = detail::draw_hints(params.n, params.k, params.m,
                                          a.seed + r, counter, {});
    std::vector<std::uint64_t> cover(a.n + 1);
    for (const auto& h : drawn) {
      auto e = h.elements;
      e.erase(std::unique(e.begin(), e.end()), e.end());
      for (auto i : e) ++cover[i];
    }
    bool all = true;
    for (std::uint64_t i = 1; i <= a.n; ++i) {
      all = all && cover[i] > 0;
      sum += static_cast<double>(cover[i]);
    }
    full += all;
  }
  const double mean = sum / static_cast<double>(a.runs * a.n);
  const double target = 2 * a.coverage * std::log(static_cast<double>(a.n));
  o.doc["k"] = params.k;
  o.doc["m"] = params.m;
  o.doc["fully_covered_runs"] = full;
  o.doc["runs"] = a.runs;
  o.doc["mean_cover"] = mean;
  o.doc["target_cover"] = target;
  std::ostringstream s;
  s << full << "/" << a.runs << " runs fully covered, mean cover " << mean
    << " (2C ln n = " << target << ")";
  o.line(s.str());
  return full * 100 >= a.runs * 99 &&
         std::abs(mean - target) <= 0.05 * target;
}

bool verify_transcript(const VerifyArgs& a, Output& o) {
  TranscriptTestConfig cfg;
  cfg.n = a.n;
  cfg.k = a.k;
  cfg.coverage_constant = a.coverage;
  cfg.mode = proto::parse_mode(a.mode);
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.cache_hits = parse_policy(a.cache_hits);
  cfg.oracle_cap = a.cap;
  const auto rep =
      transcript_distribution_test(parse_list(a.a), parse_list(a.b), cfg);
  bool ok = rep.silent_rounds == 0;
  json rounds = json::array();
  for (const auto& r : rep.rounds) {
    ok = ok && !r.two_sample.rejects(a.significance);
    if (r.round == 1) {
      ok = ok && !r.uniform_a.rejects(a.significance) &&
           !r.uniform_b.rejects(a.significance);
    }
    rounds.push_back({{"round", r.round},
                      {"two_sample_p", r.two_sample.p_value},
                      {"uniform_a_p", r.uniform_a.p_value},
                      {"uniform_b_p", r.uniform_b.p_value},
                      {"total_variation", r.total_variation}});
    std::ostringstream s;
    s << "round " << r.round << ": two-sample p=" << r.two_sample.p_value
      << ", uniform p=" << r.uniform_a.p_value << "/" << r.uniform_b.p_value
      << ", TV=" << r.total_variation;
    o.line(s.str());
  }
  if (rep.silent_rounds) {
    o.line(std::to_string(rep.silent_rounds) +
           " rounds put nothing on the wire");
  }
  o.doc["rounds"] = rounds;
  o.doc["silent_rounds"] = rep.silent_rounds;
  return ok;
}

int run_verify(const VerifyArgs& a, Output& o) {
  bool ok = false;
  if (a.suite == "bijection") {
    ok = verify_bijection(a, o);
  } else if (a.suite == "counts") {
    ok = verify_counts(a, o);
  } else if (a.suite == "lemma1") {
    ok = verify_redaction(a, o);
  } else if (a.suite == "uniformity") {
    ok = verify_uniformity(a, o);
  } else if (a.suite == "coverage") {
    ok = verify_coverage(a, o);
  } else if (a.suite == "transcript") {
    ok = verify_transcript(a, o);
  } else {
    throw ParameterError("unknown suite '" + a.suite + "'");
  }
  o.doc["suite"] = a.suite;
  o.doc["pass"] = ok;
  o.line(ok ? "pass" : "fail");
  return ok ? kOk : kVerifyFailed;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string config, out;
};

int run_bench(const BenchArgs& a, Output& o) {
  const auto cfg = bench::load_sweep_config(a.config);
  const auto rows = bench::sweep(cfg);
  if (a.out.empty() || a.out == "-") {
    if (!o.as_json) bench::write_csv(std::cout, rows);
  } else {
    std::ofstream f(a.out, std::ios::trunc);
    if (!f) throw Error("cannot write " + a.out);
    bench::write_csv(f, rows);
    o.line("wrote " + std::to_string(rows.size()) + " rows to " + a.out);
  }
  json cx = json::array();
  for (const auto& c : bench::find_crossovers(rows)) {
    json j = {{"n", c.n}, {"bandwidth", c.bandwidth},
              {"io_throughput", c.io_throughput},
              {"num_clients", c.num_clients}};
    j["beta_star"] = c.beta_star ? json(*c.beta_star) : json(nullptr);
    cx.push_back(j);
    std::ostringstream s;
    s << "crossover n=" << c.n << " bandwidth=" << c.bandwidth
      << " clients=" << c.num_clients << ": beta*="
      << (c.beta_star ? std::to_string(*c.beta_star) : "none");
    if (!a.out.empty() && a.out != "-") o.line(s.str());
  }
  o.doc["rows"] = rows.size();
  o.doc["crossovers"] = cx;
  if (!a.out.empty()) o.doc["out"] = a.out;
  return kOk;
}

// ---- keymap -----------------------------------------------------------------

struct KeymapArgs {
  std::string keys, out, map, lookup;
};

int run_keymap(const KeymapArgs& a, Output& o) {
  if (!a.keys.empty()) {
    if (a.out.empty()) throw ParameterError("--keys needs --out");
    const auto km = KeyMap::from_keys_file(a.keys);
    km.save(a.out);
    o.doc = {{"out", a.out}, {"keys", km.size()}};
    o.line("mapped " + std::to_string(km.size()) + " keys to " + a.out);
    return kOk;
  }
  if (a.map.empty() || a.lookup.empty()) {
    throw ParameterError("give --keys and --out, or --map and --lookup");
  }
  const auto km = KeyMap::load(a.map);
  const auto idx = km.lookup(a.lookup);
  if (!idx) throw ParameterError("key '" + a.lookup + "' not in map");
  o.doc = {{"key", a.lookup}, {"index", *idx}};
  o.line(std::to_string(*idx));
  return kOk;
}

int report(const char* kind, const std::exception& e, int code, bool as_json) {
  if (as_json) {
    std::cout << json{{"error", kind}, {"message", e.what()}, {"exit", code}}
                     .dump()
              << '\n';
  } else {
    std::cerr << "mspir: " << kind << ": " << e.what() << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-server PIR with multiset hints"};
  app.footer(kExitHelp);
  app.require_subcommand(1);
  app.fallthrough();
  Output out;
  toggle(&app, "json", out.as_json, "Machine-readable JSON report on stdout");

  GenDbArgs gen;
  auto* g = app.add_subcommand("gen-db", "Write a pseudorandom database file");
  flag(g, "n", gen.n, "Number of entries")->required();
  flag(g, "beta", gen.beta, "Entry size in bytes")->required();
  flag(g, "seed", gen.seed, "Content seed");
  flag(g, "out", gen.out, "Output path")->required();

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Serve a database file over TCP");
  flag(s, "db", serve.db, "Database file")->required();
  flag(s, "mode", serve.mode, "cooperative or default")
      ->check(CLI::IsMember({"cooperative", "default"}));
  flag(s, "listen", serve.listen, "host:port (port 0 picks one)");
  flag(s, "max-indices", serve.max_indices,
       "Max indices per request (0: 4*ceil(sqrt n))");
  flag(s, "max-sessions", serve.max_sessions, "Concurrent session cap");
  flag(s, "io-bytes-per-ms", serve.io_bytes_per_ms,
       "Simulated storage throughput (0: unthrottled)");

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess",
                               "Stream the database and build a hint pool");
  flag(p, "server", pre.server, "Server host:port");
  flag(p, "out", pre.out, "Pool file to write")->required();
  flag(p, "seed", pre.seed, "Master seed for hint seeds");
  flag(p, "coverage", pre.coverage, "Coverage constant C");

  QueryArgs q;
  auto* qa = app.add_subcommand("query", "Privately retrieve one entry");
  flag(qa, "server", q.server, "Server host:port");
  flag(qa, "pool", q.pool, "Pool file (updated in place)")->required();
  flag(qa, "index", q.index, "0-based database index");
  flag(qa, "key", q.key, "Key to look up in --keymap");
  flag(qa, "keymap", q.keymap, "Map file from the keymap subcommand");
  flag(qa, "mode", q.mode, "Expected server mode (checked)")
      ->check(CLI::IsMember({"cooperative", "default"}));
  flag(qa, "cache-hits", q.cache_hits,
       "silent: no traffic on a cache hit; dummy: send a dummy query")
      ->check(CLI::IsMember({"silent", "dummy"}));

  RunPhasesArgs rp;
  auto* r = app.add_subcommand("run-phases",
                               "Run random queries over several phases");
  flag(r, "server", rp.server, "Server host:port");
  flag(r, "pool", rp.pool, "Pool file (updated in place)")->required();
  flag(r, "phases", rp.phases, "Number of phases");
  flag(r, "queries-per-phase", rp.queries_per_phase, "Default: k");
  flag(r, "seed", rp.seed, "Target sequence seed");
  flag(r, "oracle-db", rp.oracle_db, "Local database copy to check values");
  flag(r, "cache-hits", rp.cache_hits, "silent or dummy")
      ->check(CLI::IsMember({"silent", "dummy"}));

  VerifyArgs v;
  auto* ve = app.add_subcommand("verify", "Run a verification oracle");
  ve->add_option("suite", v.suite,
                 "bijection, counts, lemma1, uniformity, coverage, transcript")
      ->required()
      ->envname("MSPIR_SUITE");
  flag(ve, "n", v.n, "Universe size");
  flag(ve, "k", v.k, "Multiset size");
  flag(ve, "seed", v.seed, "Seed");
  flag(ve, "samples", v.samples, "uniformity: number of seeds");
  flag(ve, "runs", v.runs, "coverage: independent preprocessings");
  flag(ve, "trials", v.trials, "transcript: trials per sequence");
  flag(ve, "coverage", v.coverage, "Coverage constant C");
  flag(ve, "significance", v.significance, "Test level");
  flag(ve, "a", v.a, "transcript: first target sequence (1-based)");
  flag(ve, "b", v.b, "transcript: second target sequence (1-based)");
  flag(ve, "mode", v.mode, "transcript: server mode")
      ->check(CLI::IsMember({"cooperative", "default"}));
  flag(ve, "cache-hits", v.cache_hits, "transcript: silent or dummy")
      ->check(CLI::IsMember({"silent", "dummy"}));
  flag(ve, "cap", v.cap, "Largest multiset space to enumerate");

  BenchArgs b;
  auto* be = app.add_subcommand("bench", "Latency model sweep to CSV");
  flag(be, "config", b.config, "JSON sweep config")->required();
  flag(be, "out", b.out, "CSV path (- or empty: stdout)");

  KeymapArgs km;
  auto* k = app.add_subcommand("keymap", "Build or query a key -> index map");
  flag(k, "keys", km.keys, "Newline-separated keys");
  flag(k, "out", km.out, "Map file to write");
  flag(k, "map", km.map, "Map file to read");
  flag(k, "lookup", km.lookup, "Key to resolve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    int rc = kOk;
    if (*g) rc = run_gen_db(gen, out);
    if (*s) rc = run_serve(serve, out);
    if (*p) rc = run_preprocess(pre, out);
    if (*qa) rc = run_query(q, out);
    if (*r) rc = run_run_phases(rp, out);
    if (*ve) rc = run_verify(v, out);
    if (*be) rc = run_bench(b, out);
    if (*k) rc = run_keymap(km, out);
    out.finish();
    return rc;
  } catch (const ParameterError& e) {
    return report("usage", e, kUsage, out.as_json);
  } catch (const OracleTooLargeError& e) {
    return report("usage", e, kUsage, out.as_json);
  } catch (const NetworkError& e) {
    return report("network", e, kNetwork, out.as_json);
  } catch (const PoolFileError& e) {
    return report("pool", e, kPool, out.as_json);
  } catch (const CoverageError& e) {
    return report("coverage", e, kCoverage, out.as_json);
  } catch (const ProtocolError& e) {
    return report("protocol", e, kProtocol, out.as_json);
  } catch (const FramingError& e) {
    return report("protocol", e, kProtocol, out.as_json);
  } catch (const std::exception& e) {
    return report("error", e, kOther, out.as_json);
  }
}
