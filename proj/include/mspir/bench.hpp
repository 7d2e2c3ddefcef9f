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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mspir/error.hpp"
#include "mspir/hint_pool.hpp"
#include "mspir/multiset.hpp"
#include "mspir/params.hpp"
#include "mspir/prg.hpp"

namespace mspir::bench {

enum class Scheme { kBaseSpider, kSpider, kRms24 };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kBaseSpider: return "baseSPIDER";
    case Scheme::kSpider: return "SPIDER";
    case Scheme::kRms24: return "RMS24";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "baseSPIDER") return Scheme::kBaseSpider;
  if (s == "SPIDER") return Scheme::kSpider;
  if (s == "RMS24") return Scheme::kRms24;
  throw ParameterError("unknown scheme '" + s +
                       "' (expected baseSPIDER, SPIDER or RMS24)");
}

struct Traffic {
  std::uint64_t upload_bytes = 0;
  std::uint64_t download_bytes = 0;
};

inline constexpr std::uint64_t kIndexBytes = 8;

/// Online bytes per query. Uploads count 8 bytes per transmitted index.
inline Traffic scheme_traffic(Scheme s, std::uint64_t n, std::uint64_t beta) {
  const std::uint64_t k = ceil_sqrt(n);
  const std::uint64_t sent = k > 0 ? k - 1 : 0;
  switch (s) {
    case Scheme::kBaseSpider: return {sent * kIndexBytes, beta};
    case Scheme::kSpider: return {sent * kIndexBytes, sent * beta};
    case Scheme::kRms24: return {2 * (k / 2) * kIndexBytes, 2 * beta};
  }
  return {};
}

struct LatencyScenario {
  Scheme scheme = Scheme::kBaseSpider;
  std::uint64_t n = 0;
  std::uint64_t beta = 0;
  double bandwidth = 50'000;     // bits per ms
  double io_throughput = 1e6;    // bytes per ms
  std::uint64_t num_clients = 1;
  double hint_search_ms = 0;
};

inline void check_rates(const LatencyScenario& s) {
  if (!(s.bandwidth > 0)) throw ParameterError("bandwidth must be > 0");
  if (!(s.io_throughput > 0)) throw ParameterError("io_throughput must be > 0");
  if (s.hint_search_ms < 0) throw ParameterError("hint_search_ms must be >= 0");
}

inline double network_ms(const Traffic& t, double bandwidth_bits_per_ms) {
  if (!(bandwidth_bits_per_ms > 0)) {
    throw ParameterError("bandwidth must be > 0");
  }
  return static_cast<double>(t.upload_bytes + t.download_bytes) * 8.0 /
         bandwidth_bits_per_ms;
}

inline double network_ms(const LatencyScenario& s) {
  return network_ms(scheme_traffic(s.scheme, s.n, s.beta), s.bandwidth);
}

inline double service_ms(std::uint64_t n, std::uint64_t beta,
                         double io_throughput) {
  if (!(io_throughput > 0)) throw ParameterError("io_throughput must be > 0");
  return static_cast<double>(ceil_sqrt(n)) * static_cast<double>(beta) /
         io_throughput;
}

inline double service_ms(const LatencyScenario& s) {
  return service_ms(s.n, s.beta, s.io_throughput);
}

struct QueueResult {
  double rho = 0;
  double wait_ms = 0;   // +inf when saturated
  double total_ms = 0;  // +inf when saturated
  bool saturated = false;
};

/// M/M/1 wait; total = base + service + wait.
inline QueueResult queue(std::uint64_t num_clients, double base_ms,
                         double service) {
  if (!(base_ms + service > 0)) {
    throw ParameterError("queue: base_ms + service_ms must be > 0");
  }
  QueueResult q;
  q.rho = static_cast<double>(num_clients) * service / (base_ms + service);
  if (q.rho >= 1.0) {
    q.saturated = true;
    q.wait_ms = std::numeric_limits<double>::infinity();
    q.total_ms = std::numeric_limits<double>::infinity();
    return q;
  }
  q.wait_ms = service * q.rho / (1.0 - q.rho);
  q.total_ms = base_ms + service + q.wait_ms;
  return q;
}

struct LatencyRow {
  LatencyScenario scenario;
  double network_ms = 0;
  double service_ms = 0;
  QueueResult queue;
};

// base_ms is the uncontended round trip: network + hint search + service.
inline double base_ms(const LatencyRow& r) {
  return r.network_ms + r.scenario.hint_search_ms + r.service_ms;
}

inline LatencyRow evaluate(const LatencyScenario& s) {
  check_rates(s);
  LatencyRow row;
  row.scenario = s;
  row.network_ms = network_ms(s);
  row.service_ms = service_ms(s);
  row.queue = queue(s.num_clients, base_ms(row), row.service_ms);
  return row;
}

/// Mean wall-clock hint search per query. baseSPIDER/SPIDER expand every
/// seed of an m-hint pool and scan it for the target; RMS24 is modeled as
/// one PRG draw and one comparison per seed.
inline double measure_hint_search_ms(Scheme s, std::uint64_t n,
                                     std::uint64_t queries,
                                     std::uint64_t seed) {
  if (n < 2) throw ParameterError("measure_hint_search_ms: n must be >= 2");
  if (queries == 0) return 0;
  const auto p = compute_params(n, 0);
  std::vector<MultisetSeed> seeds(p.m);
  for (std::uint64_t j = 0; j < p.m; ++j) seeds[j] = {Prg::at(seed, j)};
  Prg targets(seed ^ 0x7461726765747321ULL);

  std::uint64_t sink = 0;
  std::vector<std::uint64_t> e;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t q = 0; q < queries; ++q) {
    const auto target = targets.uniform(1, n);
    if (s == Scheme::kRms24) {
      for (const auto& sd : seeds) {
        sink += Prg(sd.value).uniform(1, n) == target;
      }
    } else {
      for (const auto& sd : seeds) {
        expand_multiset_into(n, p.k, sd, e);
        sink += std::binary_search(e.begin(), e.end(), target);
      }
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  // Keeps the loop observable.
  volatile std::uint64_t keep = sink;
  (void)keep;
  return std::chrono::duration<double, std::milli>(t1 - t0).count() /
         static_cast<double>(queries);
}

// ---- sweep configuration ----------------------------------------------------

struct HintSearchSource {
  enum class Kind { kMeasured, kFixed, kTable } kind = Kind::kMeasured;
  double fixed_ms = 0;
  // scheme name -> ms, or "scheme:n" -> ms (more specific wins).
  std::map<std::string, double> table;
};

struct SweepConfig {
  std::vector<Scheme> schemes{Scheme::kBaseSpider, Scheme::kSpider,
                              Scheme::kRms24};
  std::vector<std::uint64_t> n{1ULL << 20};
  std::vector<std::uint64_t> beta{64ULL << 10};
  std::vector<double> bandwidth{50'000, 250'000};
  std::vector<double> io_throughput{1e6};
  std::vector<std::uint64_t> num_clients{1};
  HintSearchSource hint_search;
  std::uint64_t measure_queries = 50;
  std::uint64_t seed = 1;
};

namespace detail {

template <typename T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const char* key,
                              std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(x.get<T>());
  } else {
    out.push_back(v.get<T>());
  }
  if (out.empty()) {
    throw ParameterError(std::string("config: '") + key + "' is empty");
  }
  return out;
}

}  // namespace detail

/// JSON sweep config. Every list field also accepts a scalar.
///   scheme         "baseSPIDER" | "SPIDER" | "RMS24" or a list
///   n, beta        entries, bytes per entry
///   bandwidth      bits per ms (50 Mbps = 50000)
///   io_throughput  bytes per ms
///   num_clients    concurrent clients
///   hint_search_ms "measured" | number | {"<scheme>" or "<scheme>:<n>": ms}
///   measure_queries, seed
inline SweepConfig parse_sweep_config(const std::string& text) {
  static const std::set<std::string> known{
      "scheme", "n", "beta", "bandwidth", "io_throughput", "num_clients",
      "hint_search_ms", "measure_queries", "seed"};
  SweepConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ParameterError("config: top level must be an object");
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) throw ParameterError("config: unknown field '" + key + "'");
    }
    if (j.contains("scheme")) {
      c.schemes.clear();
      for (const auto& s : detail::scalar_or_list<std::string>(j, "scheme", {})) {
        c.schemes.push_back(parse_scheme(s));
      }
    }
    c.n = detail::scalar_or_list<std::uint64_t>(j, "n", c.n);
    c.beta = detail::scalar_or_list<std::uint64_t>(j, "beta", c.beta);
    c.bandwidth = detail::scalar_or_list<double>(j, "bandwidth", c.bandwidth);
    c.io_throughput =
        detail::scalar_or_list<double>(j, "io_throughput", c.io_throughput);
    c.num_clients =
        detail::scalar_or_list<std::uint64_t>(j, "num_clients", c.num_clients);
    if (j.contains("hint_search_ms")) {
      const auto& h = j.at("hint_search_ms");
      if (h.is_string()) {
        if (h.get<std::string>() != "measured") {
          throw ParameterError("config: hint_search_ms string must be 'measured'");
        }
      } else if (h.is_number()) {
        c.hint_search.kind = HintSearchSource::Kind::kFixed;
        c.hint_search.fixed_ms = h.get<double>();
      } else if (h.is_object()) {
        c.hint_search.kind = HintSearchSource::Kind::kTable;
        for (const auto& [key, v] : h.items()) {
          c.hint_search.table[key] = v.get<double>();
        }
      } else {
        throw ParameterError("config: bad hint_search_ms");
      }
    }
    c.measure_queries = j.value("measure_queries", c.measure_queries);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  for (auto n : c.n) {
    if (n < 2) throw ParameterError("config: n must be >= 2");
  }
  for (auto b : c.bandwidth) {
    if (!(b > 0)) throw ParameterError("config: bandwidth must be > 0");
  }
  for (auto io : c.io_throughput) {
    if (!(io > 0)) throw ParameterError("config: io_throughput must be > 0");
  }
  return c;
}

inline SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

class HintSearchCache {
 public:
  explicit HintSearchCache(const SweepConfig& c) : c_(c) {}

  double get(Scheme s, std::uint64_t n) {
    using K = HintSearchSource::Kind;
    const auto& src = c_.hint_search;
    if (src.kind == K::kFixed) return src.fixed_ms;
    if (src.kind == K::kTable) {
      const std::string name = to_string(s);
      if (auto it = src.table.find(name + ":" + std::to_string(n));
          it != src.table.end()) {
        return it->second;
      }
      if (auto it = src.table.find(name); it != src.table.end()) {
        return it->second;
      }
      throw ParameterError("config: no hint_search_ms entry for " + name);
    }
    // SPIDER and baseSPIDER search the same pool shape.
    const Scheme key = s == Scheme::kSpider ? Scheme::kBaseSpider : s;
    auto [it, fresh] = measured_.try_emplace({key, n}, 0.0);
    if (fresh) {
      it->second = measure_hint_search_ms(key, n, c_.measure_queries, c_.seed);
    }
    return it->second;
  }

 private:
  const SweepConfig& c_;
  std::map<std::pair<Scheme, std::uint64_t>, double> measured_;
};

/// Cartesian product of the config lists, one row per combination.
inline std::vector<LatencyRow> sweep(const SweepConfig& c) {
  HintSearchCache search(c);
  std::vector<LatencyRow> rows;
  for (auto s : c.schemes)
    for (auto n : c.n)
      for (auto beta : c.beta)
        for (auto bw : c.bandwidth)
          for (auto io : c.io_throughput)
            for (auto clients : c.num_clients) {
              LatencyScenario sc{s, n, beta, bw, io, clients, search.get(s, n)};
              rows.push_back(evaluate(sc));
            }
  return rows;
}

inline constexpr const char* kCsvVersionLine = "# mspir-bench-csv v1";
inline constexpr const char* kCsvHeader =
    "scheme,n,beta,bandwidth,io_throughput,num_clients,network_ms,service_ms,"
    "hint_search_ms,rho,wait_ms,total_ms";

inline std::string format_number(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_csv(std::ostream& out, const std::vector<LatencyRow>& rows) {
  out << kCsvVersionLine << '\n' << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& s = r.scenario;
    out << to_string(s.scheme) << ',' << s.n << ',' << s.beta << ','
        << format_number(s.bandwidth) << ',' << format_number(s.io_throughput)
        << ',' << s.num_clients << ',' << format_number(r.network_ms) << ','
        << format_number(r.service_ms) << ','
        << format_number(s.hint_search_ms) << ','
        << format_number(r.queue.rho) << ','
        << format_number(r.queue.wait_ms) << ','
        << format_number(r.queue.total_ms) << '\n';
  }
}

struct Crossover {
  std::uint64_t n = 0;
  double bandwidth = 0;
  double io_throughput = 0;
  std::uint64_t num_clients = 0;
  // Smallest swept beta from which baseSPIDER stays strictly faster than
  // RMS24 for every larger swept beta; empty if none.
  std::optional<std::uint64_t> beta_star;
};

/// Crossover beta for every (n, bandwidth, io, clients) group holding both
/// baseSPIDER and RMS24 rows.
inline std::vector<Crossover> find_crossovers(
    const std::vector<LatencyRow>& rows) {
  using Key = std::tuple<std::uint64_t, double, double, std::uint64_t>;
  std::map<Key, std::map<std::uint64_t, std::pair<double, double>>> groups;
  std::map<Key, std::map<std::uint64_t, int>> seen;
  for (const auto& r : rows) {
    const auto& s = r.scenario;
    if (s.scheme == Scheme::kSpider) continue;
    Key key{s.n, s.bandwidth, s.io_throughput, s.num_clients};
    auto& cell = groups[key][s.beta];
    if (s.scheme == Scheme::kBaseSpider) {
      cell.first = r.queue.total_ms;
      seen[key][s.beta] |= 1;
    } else {
      cell.second = r.queue.total_ms;
      seen[key][s.beta] |= 2;
    }
  }
  std::vector<Crossover> out;
  for (const auto& [key, by_beta] : groups) {
    Crossover c{std::get<0>(key), std::get<1>(key), std::get<2>(key),
                std::get<3>(key), std::nullopt};
    bool complete = false;
    std::optional<std::uint64_t> star;
    for (auto it = by_beta.rbegin(); it != by_beta.rend(); ++it) {
      if (seen[key][it->first] != 3) continue;
      complete = true;
      if (it->second.first < it->second.second) {
        star = it->first;
      } else {
        break;
      }
    }
    if (!complete) continue;
    c.beta_star = star;
    out.push_back(c);
  }
  return out;
}

}  // namespace mspir::bench
