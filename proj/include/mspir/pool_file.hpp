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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "mspir/bytes.hpp"
#include "mspir/error.hpp"
#include "mspir/hint_pool.hpp"

// Hint-pool persistence ("SPHP"). All integers little-endian; indices are
// 1-based. Layout:
//
//   "SPHP" u16 version
//   n u64, k u64, m u64, C u64 (milli), delta_slack u64 (milli), beta u64
//   master_seed u64, next_seed_counter u64
//   hint_count u64, then per hint:
//     seed u64 | parity [beta] | position u16 | index u64 | value [beta] |
//     flags u8 (bit 0 = consumed)
//   uncovered_count u64, then (index u64 | value [beta])*
//   -- session block --
//   rng_state u64, queries_this_phase u64, continuous u8
//   cache_count u64, then (index u64 | value [beta])*
//   partial_count u64, then per partial:
//     seed u64 | parity [beta] | has_replacement u8 | value [beta]
//   received bitmap, ceil((n + 1) / 8) bytes, bit i = index i
//   next_side_count u64, then (index u64 | value [beta])*

namespace mspir {

inline constexpr char kPoolMagic[4] = {'S', 'P', 'H', 'P'};
inline constexpr std::uint16_t kPoolVersion = 1;

// 8 + beta + (2 + 8 + beta) + 1
inline std::uint64_t hint_record_bytes(std::uint64_t beta) {
  return 2 * beta + 19;
}

namespace detail {

inline std::uint64_t to_milli(double v) {
  return static_cast<std::uint64_t>(std::llround(v * 1000.0));
}

inline void put_entries(Bytes& out, const std::map<std::uint64_t, Bytes>& m) {
  le::put<std::uint64_t>(out, m.size());
  for (const auto& [idx, v] : m) {
    le::put<std::uint64_t>(out, idx);
    out.insert(out.end(), v.begin(), v.end());
  }
}

inline std::map<std::uint64_t, Bytes> get_entries(le::Reader& r,
                                                  std::uint64_t n,
                                                  std::uint64_t beta) {
  std::map<std::uint64_t, Bytes> m;
  const auto count = r.read<std::uint64_t>();
  if (count > n) throw IntegrityError("pool file: entry map too large");
  for (std::uint64_t t = 0; t < count; ++t) {
    const auto idx = r.read<std::uint64_t>();
    if (idx < 1 || idx > n) throw IntegrityError("pool file: bad index");
    auto v = r.read_bytes(beta);
    m.emplace(idx, Bytes(v.begin(), v.end()));
  }
  return m;
}

}  // namespace detail

inline Bytes encode_pool(const HintPool& pool) {
  const PoolState st = pool.state();
  const auto& p = st.params;
  Bytes out;
  out.insert(out.end(), kPoolMagic, kPoolMagic + 4);
  le::put<std::uint16_t>(out, kPoolVersion);
  le::put<std::uint64_t>(out, p.n);
  le::put<std::uint64_t>(out, p.k);
  le::put<std::uint64_t>(out, p.m);
  le::put<std::uint64_t>(out, detail::to_milli(p.coverage_constant));
  le::put<std::uint64_t>(out, detail::to_milli(p.delta_slack));
  le::put<std::uint64_t>(out, p.beta);
  le::put<std::uint64_t>(out, st.master_seed);
  le::put<std::uint64_t>(out, st.next_seed_counter);

  le::put<std::uint64_t>(out, st.hints.size());
  for (const auto& h : st.hints) {
    le::put<std::uint64_t>(out, h.seed.value);
    out.insert(out.end(), h.parity.begin(), h.parity.end());
    le::put<std::uint16_t>(out, h.replacement_position);
    le::put<std::uint64_t>(out, h.replacement_index);
    out.insert(out.end(), h.replacement_value.begin(),
               h.replacement_value.end());
    out.push_back(h.consumed ? 1 : 0);
  }
  detail::put_entries(out, st.uncovered);

  le::put<std::uint64_t>(out, st.rng_state);
  le::put<std::uint64_t>(out, st.queries_this_phase);
  out.push_back(st.continuous ? 1 : 0);
  detail::put_entries(out, st.entry_cache);

  const auto& gen = st.next_generation;
  le::put<std::uint64_t>(out, gen.partials().size());
  for (const auto& ph : gen.partials()) {
    le::put<std::uint64_t>(out, ph.seed.value);
    out.insert(out.end(), ph.partial_parity.begin(), ph.partial_parity.end());
    const bool has = !ph.replacement_value.empty();
    out.push_back(has ? 1 : 0);
    if (has) {
      out.insert(out.end(), ph.replacement_value.begin(),
                 ph.replacement_value.end());
    } else {
      out.insert(out.end(), p.beta, 0);
    }
  }
  Bytes bitmap((p.n + 1 + 7) / 8, 0);
  if (!gen.empty()) {
    const auto& rec = gen.received_bitmap();
    for (std::uint64_t i = 1; i <= p.n; ++i) {
      if (rec[i]) bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
  }
  out.insert(out.end(), bitmap.begin(), bitmap.end());
  detail::put_entries(out, gen.side_store());
  return out;
}

inline HintPool decode_pool(ByteView data) {
  le::Reader r(data);
  auto magic = r.read_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kPoolMagic)) {
    throw IntegrityError("pool file: bad magic");
  }
  if (r.read<std::uint16_t>() != kPoolVersion) {
    throw IntegrityError("pool file: unsupported version");
  }
  PoolState st;
  auto& p = st.params;
  p.n = r.read<std::uint64_t>();
  p.k = r.read<std::uint64_t>();
  p.m = r.read<std::uint64_t>();
  p.coverage_constant = static_cast<double>(r.read<std::uint64_t>()) / 1000.0;
  p.delta_slack = static_cast<double>(r.read<std::uint64_t>()) / 1000.0;
  p.beta = r.read<std::uint64_t>();
  if (p.n < 1 || p.k < 1 || p.k > 0xFFFF || p.beta < 1) {
    throw IntegrityError("pool file: bad parameters");
  }
  st.master_seed = r.read<std::uint64_t>();
  st.next_seed_counter = r.read<std::uint64_t>();

  const auto hint_count = r.read<std::uint64_t>();
  if (hint_count > r.remaining() / hint_record_bytes(p.beta)) {
    throw IntegrityError("pool file: hint count exceeds file size");
  }
  st.hints.reserve(hint_count);
  for (std::uint64_t t = 0; t < hint_count; ++t) {
    Hint h;
    h.seed.value = r.read<std::uint64_t>();
    auto parity = r.read_bytes(p.beta);
    h.parity.assign(parity.begin(), parity.end());
    h.replacement_position = r.read<std::uint16_t>();
    h.replacement_index = r.read<std::uint64_t>();
    auto value = r.read_bytes(p.beta);
    h.replacement_value.assign(value.begin(), value.end());
    h.consumed = (r.read<std::uint8_t>() & 1) != 0;
    if (h.replacement_position < 1 || h.replacement_position > p.k ||
        h.replacement_index < 1 || h.replacement_index > p.n) {
      throw IntegrityError("pool file: bad replacement slot");
    }
    st.hints.push_back(std::move(h));
  }
  st.uncovered = detail::get_entries(r, p.n, p.beta);

  st.rng_state = r.read<std::uint64_t>();
  st.queries_this_phase = r.read<std::uint64_t>();
  st.continuous = r.read<std::uint8_t>() != 0;
  st.entry_cache = detail::get_entries(r, p.n, p.beta);

  const auto partial_count = r.read<std::uint64_t>();
  if (partial_count > r.remaining() / (9 + 2 * p.beta)) {
    throw IntegrityError("pool file: partial count exceeds file size");
  }
  std::vector<PartialHint> partials;
  partials.reserve(partial_count);
  for (std::uint64_t t = 0; t < partial_count; ++t) {
    PartialHint ph;
    ph.seed.value = r.read<std::uint64_t>();
    auto parity = r.read_bytes(p.beta);
    ph.partial_parity.assign(parity.begin(), parity.end());
    const bool has = r.read<std::uint8_t>() != 0;
    auto value = r.read_bytes(p.beta);
    if (has) ph.replacement_value.assign(value.begin(), value.end());
    ph.replacement_position = replacement_position_for(ph.seed, p.k);
    std::vector<std::uint64_t> e;
    expand_multiset_into(p.n, p.k, ph.seed, e);
    ph.replacement_index = e[ph.replacement_position - 1];
    partials.push_back(std::move(ph));
  }
  auto bitmap = r.read_bytes((p.n + 1 + 7) / 8);
  std::vector<bool> received(p.n + 1, false);
  for (std::uint64_t i = 1; i <= p.n; ++i) {
    received[i] = (bitmap[i / 8] >> (i % 8)) & 1;
  }
  auto side = detail::get_entries(r, p.n, p.beta);
  if (r.remaining() != 0) throw IntegrityError("pool file: trailing bytes");
  if (!partials.empty()) {
    st.next_generation = NextGeneration(p.n, p.k, p.beta, std::move(partials),
                                        std::move(received), std::move(side));
  }
  return HintPool(std::move(st));
}

inline HintPool load_pool(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open pool file " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)),
             std::istreambuf_iterator<char>());
  return decode_pool(data);
}

// Write-temp-then-rename, so a crash never leaves a torn pool file.
inline void save_pool(const HintPool& pool,
                      const std::filesystem::path& path) {
  const Bytes data = encode_pool(pool);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IntegrityError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw IntegrityError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mspir
