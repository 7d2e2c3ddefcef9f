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

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "mspir/bytes.hpp"
#include "mspir/error.hpp"
#include "mspir/prg.hpp"

// Static database of n fixed-size entries, addressed 0-based.
//
// File format ("SPDB"), little-endian, 20-byte header:
//   "SPDB" | version u16 | reserved u16 (0) | n u64 | beta u32 | entries

namespace mspir {

inline constexpr char kDbMagic[4] = {'S', 'P', 'D', 'B'};
inline constexpr std::uint16_t kDbVersion = 1;
inline constexpr std::uint64_t kDbHeaderBytes = 20;
inline constexpr std::uint64_t kDefaultDiskBudget = 64ULL << 30;

class Database {
 public:
  Database() = default;

  // Takes ownership of n * beta contiguous bytes.
  Database(std::uint64_t n, std::uint64_t beta, Bytes entries)
      : n_(n), beta_(beta) {
    if (entries.size() != n * beta) {
      throw IntegrityError("Database: expected n * beta bytes");
    }
    auto owned = std::make_shared<Bytes>(std::move(entries));
    data_ = owned->data();
    holder_ = std::move(owned);
  }

  // Deterministic pseudorandom contents: the byte stream of Prg(seed),
  // eight little-endian bytes per draw.
  static Database generate(std::uint64_t n, std::uint64_t beta,
                           std::uint64_t seed) {
    Bytes b(n * beta);
    fill_random(b, seed, 0);
    return Database(n, beta, std::move(b));
  }

  /// Maps a database file read-only. Rejects any header/size mismatch.
  static Database open(const std::filesystem::path& path) {
    const int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw IntegrityError("cannot open database " + path.string());
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
      ::close(fd);
      throw IntegrityError("cannot stat " + path.string());
    }
    const auto size = static_cast<std::uint64_t>(st.st_size);
    if (size < kDbHeaderBytes) {
      ::close(fd);
      throw IntegrityError("database file shorter than header");
    }
    void* addr = ::mmap(nullptr, size, PROT_READ, MAP_SHARED, fd, 0);
    ::close(fd);
    if (addr == MAP_FAILED) throw IntegrityError("mmap failed");
    std::shared_ptr<void> holder(addr,
                                 [size](void* a) { ::munmap(a, size); });
    const auto* base = static_cast<const std::uint8_t*>(addr);
    if (std::memcmp(base, kDbMagic, 4) != 0) {
      throw IntegrityError("database file: bad magic");
    }
    if (le::get<std::uint16_t>(base + 4) != kDbVersion) {
      throw IntegrityError("database file: unsupported version");
    }
    Database db;
    db.n_ = le::get<std::uint64_t>(base + 8);
    db.beta_ = le::get<std::uint32_t>(base + 16);
    if (db.beta_ == 0 || db.n_ > (size - kDbHeaderBytes) / db.beta_ ||
        kDbHeaderBytes + db.n_ * db.beta_ != size) {
      throw IntegrityError("database file: size does not match header");
    }
    db.data_ = base + kDbHeaderBytes;
    db.holder_ = std::move(holder);
    return db;
  }

  std::uint64_t size() const { return n_; }
  std::uint64_t entry_bytes() const { return beta_; }

  ByteView entry(std::uint64_t index0) const {
    if (index0 >= n_) {
      throw ParameterError("database index " + std::to_string(index0) +
                           " out of range");
    }
    return {data_ + index0 * beta_, static_cast<std::size_t>(beta_)};
  }

  ByteView bytes() const {
    return {data_, static_cast<std::size_t>(n_ * beta_)};
  }

  static void fill_random(std::span<std::uint8_t> out, std::uint64_t seed,
                          std::uint64_t offset) {
    // offset must be a multiple of 8 so chunked writers agree byte-for-byte
    Prg prg(seed);
    prg.set_state(seed + (offset / 8) * Prg::kGamma);
    std::size_t i = 0;
    while (i < out.size()) {
      std::uint64_t w = prg.next();
      for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
        out[i] = static_cast<std::uint8_t>(w >> (8 * b));
      }
    }
  }

 private:
  std::uint64_t n_ = 0;
  std::uint64_t beta_ = 0;
  const std::uint8_t* data_ = nullptr;
  std::shared_ptr<const void> holder_;
};

inline Bytes encode_db_header(std::uint64_t n, std::uint64_t beta) {
  Bytes h;
  h.insert(h.end(), kDbMagic, kDbMagic + 4);
  le::put<std::uint16_t>(h, kDbVersion);
  le::put<std::uint16_t>(h, 0);
  le::put<std::uint64_t>(h, n);
  le::put<std::uint32_t>(h, static_cast<std::uint32_t>(beta));
  return h;
}

inline void write_db(const Database& db, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IntegrityError("cannot write " + path.string());
  const Bytes h = encode_db_header(db.size(), db.entry_bytes());
  out.write(reinterpret_cast<const char*>(h.data()), 20);
  out.write(reinterpret_cast<const char*>(db.bytes().data()),
            static_cast<std::streamsize>(db.bytes().size()));
  if (!out) throw IntegrityError("short write to " + path.string());
}

/// Writes a deterministic pseudorandom database file; same (n, beta, seed)
/// always produces the same bytes as Database::generate.
inline void gen_db(std::uint64_t n, std::uint64_t beta, std::uint64_t seed,
                   const std::filesystem::path& path,
                   std::uint64_t disk_budget = kDefaultDiskBudget) {
  if (n < 1) throw ParameterError("gen_db: n must be >= 1");
  if (beta < 1 || beta > 0xFFFFFFFFULL) {
    throw ParameterError("gen_db: beta must be in [1, 2^32 - 1]");
  }
  if (n > disk_budget / beta) {
    throw ParameterError("gen_db: n * beta exceeds disk budget");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IntegrityError("cannot write " + path.string());
  const Bytes h = encode_db_header(n, beta);
  out.write(reinterpret_cast<const char*>(h.data()), 20);
  constexpr std::uint64_t kChunk = 1 << 20;  // multiple of 8
  Bytes buf;
  const std::uint64_t total = n * beta;
  for (std::uint64_t off = 0; off < total; off += kChunk) {
    buf.resize(std::min(kChunk, total - off));
    Database::fill_random(buf, seed, off);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw IntegrityError("short write to " + path.string());
}

}  // namespace mspir
