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


#include "mspir/protocol.hpp"

#include <vector>

#include <gtest/gtest.h>

#include "mspir/database.hpp"
#include "mspir/prg.hpp"
#include "mspir/server.hpp"

namespace mspir {
namespace {

using proto::Opcode;
using proto::QueryMessage;

Bytes brute_xor(const Database& db, const std::vector<std::uint64_t>& idx) {
  Bytes acc(db.entry_bytes(), 0);
  for (auto i : idx) {
    auto e = db.entry(i);
    for (std::size_t b = 0; b < acc.size(); ++b) acc[b] = acc[b] ^ e[b];
  }
  return acc;
}

TEST(Codec, FetchRoundTrip) {
  const QueryMessage q{Opcode::kFetch, {3, 9, 27}};
  const Bytes frame = proto::encode_request(q);
  ASSERT_EQ(frame.size(), 5u + 24u);
  EXPECT_EQ(frame[0], 3);
  EXPECT_EQ(frame[1], 24);
  EXPECT_EQ(frame[5], 3);
  EXPECT_EQ(frame[13], 9);
  EXPECT_EQ(frame[21], 27);
  EXPECT_EQ(proto::decode_request(frame), q);
  EXPECT_EQ(proto::encode_request(proto::decode_request(frame)), frame);
}

TEST(Codec, AllMessagesRoundTrip) {
  for (const auto& q : {QueryMessage::info(), QueryMessage::stream(),
                        QueryMessage{Opcode::kXorFetch, {0, 0, ~0ULL}},
                        QueryMessage{Opcode::kFetch, {}}}) {
    EXPECT_EQ(proto::decode_request(proto::encode_request(q)), q);
  }
  for (const auto& r :
       {proto::ResponseMessage::ok({1, 2, 3}), proto::ResponseMessage::ok({}),
        proto::ResponseMessage::failure(proto::ErrorCode::kIndexOutOfRange)}) {
    EXPECT_EQ(proto::decode_response(proto::encode_response(r)), r);
  }
  const proto::ServerInfo info{1 << 20, 64, proto::ServerMode::kCooperative};
  const auto payload = proto::encode_info(info);
  EXPECT_EQ(payload.size(), 17u);
  EXPECT_EQ(proto::decode_info(payload), info);
}

TEST(Codec, MathIndicesSortedAndShifted) {
  const auto q = QueryMessage::from_math(Opcode::kFetch, {9, 1, 4, 4});
  EXPECT_EQ(q.indices, (std::vector<std::uint64_t>{0, 3, 3, 8}));
  EXPECT_THROW(QueryMessage::from_math(Opcode::kFetch, {0}), ParameterError);
}

TEST(Codec, LengthMismatchRejected) {
  Bytes frame = proto::encode_request({Opcode::kFetch, {1, 2}});
  frame.pop_back();
  EXPECT_THROW(proto::decode_request(frame), FramingError);
  frame = proto::encode_request({Opcode::kFetch, {1, 2}});
  frame.push_back(0);
  EXPECT_THROW(proto::decode_request(frame), FramingError);
  EXPECT_THROW(proto::decode_request(Bytes{3, 0, 0}), FramingError);
  EXPECT_THROW(proto::decode_request(Bytes{9, 0, 0, 0, 0}), FramingError);
  EXPECT_THROW(proto::decode_request(Bytes{3, 3, 0, 0, 0, 1, 2, 3}),
               FramingError);
  EXPECT_THROW(proto::decode_request(Bytes{1, 1, 0, 0, 0, 7}), FramingError);
}

TEST(Codec, FuzzNeverCrashes) {
  const auto db = Database::generate(64, 8, 1);
  RequestHandler handler(db, {proto::ServerMode::kCooperative});
  Prg rng(2024);
  std::size_t parsed = 0, rejected = 0;
  for (int t = 0; t < 10'000; ++t) {
    Bytes b(rng.uniform(0, 64));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.next());
    // Bias some inputs toward plausible headers.
    if (t % 3 == 0 && b.size() >= 5) {
      b[0] = static_cast<std::uint8_t>(rng.uniform(0, 5));
      const auto len = static_cast<std::uint32_t>(b.size() - 5);
      for (int i = 0; i < 4; ++i) b[1 + i] = static_cast<std::uint8_t>(len >> (8 * i));
    }
    try {
      proto::decode_request(b);
      ++parsed;
    } catch (const FramingError&) {
      ++rejected;
    }
    try {
      proto::decode_response(b);
    } catch (const FramingError&) {
    }
    if (b.size() >= 5) {
      std::size_t frames = 0;
      handler.handle_frame(b, [&](ByteView out) {
        ++frames;
        EXPECT_NO_THROW(proto::decode_response(out));
      });
      EXPECT_GE(frames, 1u);
    }
  }
  EXPECT_EQ(parsed + rejected, 10'000u);
  EXPECT_GT(parsed, 0u);
}

TEST(XorFetch, Identities) {
  const auto db = Database::generate(64, 16, 3);
  const auto one = server_answer_xor_fetch(db, {5});
  EXPECT_EQ(one, Bytes(db.entry(5).begin(), db.entry(5).end()));
  EXPECT_TRUE(is_zero(server_answer_xor_fetch(db, {5, 5})));
  EXPECT_THROW(server_answer_xor_fetch(db, {64}), ProtocolError);
}

TEST(XorFetch, MatchesBruteForce) {
  const auto db = Database::generate(64, 32, 4);
  Prg rng(5);
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::uint64_t> idx(rng.uniform(1, 12));
    for (auto& i : idx) i = rng.uniform(0, 63);
    ASSERT_EQ(server_answer_xor_fetch(db, idx), brute_xor(db, idx));
  }
}

TEST(Fetch, ConcatenatesInOrder) {
  const auto db = Database::generate(32, 4, 6);
  const auto two = server_answer_fetch(db, {2, 2});
  ASSERT_EQ(two.size(), 8u);
  EXPECT_TRUE(std::equal(two.begin(), two.begin() + 4, db.entry(2).begin()));
  EXPECT_TRUE(std::equal(two.begin() + 4, two.end(), db.entry(2).begin()));
  EXPECT_TRUE(server_answer_fetch(db, {}).empty());
  EXPECT_THROW(server_answer_fetch(db, {32}), ProtocolError);

  Prg rng(7);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint64_t> idx(rng.uniform(0, 10));
    Bytes singles;
    for (auto& i : idx) {
      i = rng.uniform(0, 31);
      const auto e = server_answer_fetch(db, {i});
      singles.insert(singles.end(), e.begin(), e.end());
    }
    EXPECT_EQ(server_answer_fetch(db, idx), singles);
  }
}

}  // namespace
}  // namespace mspir
