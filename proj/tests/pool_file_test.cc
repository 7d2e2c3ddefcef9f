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


#include "mspir/pool_file.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "mspir/client.hpp"
#include "mspir/database.hpp"
#include "mspir/server.hpp"
#include "test_util.hpp"

namespace mspir {
namespace {

namespace fs = std::filesystem;

void expect_same_state(const PoolState& a, const PoolState& b) {
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.master_seed, b.master_seed);
  EXPECT_EQ(a.next_seed_counter, b.next_seed_counter);
  ASSERT_EQ(a.hints.size(), b.hints.size());
  for (std::size_t s = 0; s < a.hints.size(); ++s) {
    EXPECT_EQ(a.hints[s].seed, b.hints[s].seed);
    EXPECT_EQ(a.hints[s].parity, b.hints[s].parity);
    EXPECT_EQ(a.hints[s].replacement_position, b.hints[s].replacement_position);
    EXPECT_EQ(a.hints[s].replacement_index, b.hints[s].replacement_index);
    EXPECT_EQ(a.hints[s].replacement_value, b.hints[s].replacement_value);
    EXPECT_EQ(a.hints[s].consumed, b.hints[s].consumed);
  }
  EXPECT_EQ(a.uncovered, b.uncovered);
  EXPECT_EQ(a.entry_cache, b.entry_cache);
  EXPECT_EQ(a.queries_this_phase, b.queries_this_phase);
  EXPECT_EQ(a.rng_state, b.rng_state);
  EXPECT_EQ(a.continuous, b.continuous);
  const auto& ga = a.next_generation;
  const auto& gb = b.next_generation;
  ASSERT_EQ(ga.partials().size(), gb.partials().size());
  for (std::size_t s = 0; s < ga.partials().size(); ++s) {
    EXPECT_EQ(ga.partials()[s].seed, gb.partials()[s].seed);
    EXPECT_EQ(ga.partials()[s].partial_parity, gb.partials()[s].partial_parity);
    EXPECT_EQ(ga.partials()[s].replacement_value,
              gb.partials()[s].replacement_value);
    EXPECT_EQ(ga.partials()[s].missing_count, gb.partials()[s].missing_count);
  }
  EXPECT_EQ(ga.side_store(), gb.side_store());
  if (!ga.empty()) {
    EXPECT_EQ(ga.received_bitmap(), gb.received_bitmap());
  }
}

class PoolFileTest : public ::testing::Test {
 protected:
  PoolFileTest()
      : db_(Database::generate(200, 12, 4)),
        handler_(db_, {proto::ServerMode::kDefault}),
        transport_(handler_),
        session_(transport_) {}

  // A pool with consumed hints, rewritten slots, a cache and partials.
  HintPool used_pool(std::uint64_t queries) {
    auto pool = preprocess_from_server(session_, compute_params(200, 12), 6);
    PirClient client(session_, pool);
    Prg rng(1);
    for (std::uint64_t q = 0; q < queries; ++q) client.query(rng.uniform(1, 200));
    return pool;
  }

  Database db_;
  RequestHandler handler_;
  InProcessTransport transport_;
  ClientSession session_;
};

TEST_F(PoolFileTest, LayoutHeader) {
  const auto pool = used_pool(0);
  const Bytes data = encode_pool(pool);
  EXPECT_EQ(std::string(data.begin(), data.begin() + 4), "SPHP");
  EXPECT_EQ(le::get<std::uint16_t>(data.data() + 4), 1u);
  EXPECT_EQ(le::get<std::uint64_t>(data.data() + 6), 200u);
  EXPECT_EQ(le::get<std::uint64_t>(data.data() + 14), 15u);
  EXPECT_EQ(le::get<std::uint64_t>(data.data() + 30), 4000u);  // C = 4
  EXPECT_EQ(le::get<std::uint64_t>(data.data() + 38), 600u);   // delta = 0.6
  EXPECT_EQ(le::get<std::uint64_t>(data.data() + 46), 12u);
  const auto m = pool.hints().size();
  EXPECT_EQ(le::get<std::uint64_t>(data.data() + 70), m);
  // First hint record ends exactly 2*beta + 19 bytes later.
  const auto& h0 = pool.hints()[0];
  const std::size_t rec = 78;
  EXPECT_EQ(hint_record_bytes(12), 43u);
  EXPECT_EQ(le::get<std::uint64_t>(data.data() + rec), h0.seed.value);
  EXPECT_EQ(le::get<std::uint64_t>(data.data() + rec + 8 + 12 + 2),
            h0.replacement_index);
  EXPECT_EQ(data[rec + 42], h0.consumed ? 1 : 0);
}

TEST_F(PoolFileTest, RoundTripMidPhase) {
  auto pool = used_pool(9);
  const auto decoded = decode_pool(encode_pool(pool));
  expect_same_state(pool.state(), decoded.state());
  EXPECT_EQ(encode_pool(decoded), encode_pool(pool));
}

TEST_F(PoolFileTest, ResumedPoolBehavesIdentically) {
  auto a = used_pool(5);
  auto b = decode_pool(encode_pool(a));
  PirClient ca(session_, a), cb(session_, b);
  Prg ra(9), rb(9);
  for (int q = 0; q < 30; ++q) {  // crosses a refresh
    const auto oa = ca.query(ra.uniform(1, 200));
    const auto ob = cb.query(rb.uniform(1, 200));
    EXPECT_EQ(oa.value, ob.value);
    EXPECT_EQ(oa.redacted, ob.redacted);
  }
  EXPECT_TRUE(testing_util::pool_is_sound(b, db_));
}

TEST_F(PoolFileTest, SaveIsAtomicAndLoads) {
  const auto dir = fs::temp_directory_path() / "mspir_pool_test";
  fs::create_directories(dir);
  const auto path = dir / "hints.sphp";
  auto pool = used_pool(3);
  save_pool(pool, path);
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  const auto loaded = load_pool(path);
  expect_same_state(pool.state(), loaded.state());

  // An interrupted save leaves only a stray temp file; the real file
  // still loads.
  {
    std::ofstream junk(path.string() + ".tmp", std::ios::binary);
    junk << "partial";
  }
  EXPECT_NO_THROW(load_pool(path));
  fs::remove_all(dir);
}

TEST_F(PoolFileTest, CorruptionRejected) {
  const Bytes data = encode_pool(used_pool(2));
  EXPECT_THROW(decode_pool(ByteView(data).first(data.size() - 1)),
               IntegrityError);
  Bytes extra = data;
  extra.push_back(0);
  EXPECT_THROW(decode_pool(extra), IntegrityError);
  Bytes magic = data;
  magic[0] = 'X';
  EXPECT_THROW(decode_pool(magic), IntegrityError);
  Bytes version = data;
  version[4] = 9;
  EXPECT_THROW(decode_pool(version), IntegrityError);
  for (std::size_t cut : {0u, 5u, 60u, 100u}) {
    EXPECT_THROW(decode_pool(ByteView(data).first(cut)), IntegrityError);
  }
}

}  // namespace
}  // namespace mspir
