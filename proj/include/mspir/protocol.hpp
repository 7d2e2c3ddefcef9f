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
#include <string>
#include <vector>

#include "mspir/bytes.hpp"
#include "mspir/error.hpp"
#include "mspir/multiset.hpp"

// Framed binary protocol. Every frame is
//
//   tag u8 | body_length u32 (LE) | body
//
// where tag is the opcode on requests and the status on responses. See
// protocol.md at the repository root for the full layout.

namespace mspir::proto {

enum class Opcode : std::uint8_t {
  kInfo = 1,
  kStream = 2,
  kFetch = 3,
  kXorFetch = 4,
};

enum class Status : std::uint8_t {
  kOk = 0,
  kError = 1,
};

enum class ErrorCode : std::uint16_t {
  kNone = 0,
  kMalformed = 1,
  kUnsupportedOpcode = 2,
  kIndexOutOfRange = 3,
  kTooManyIndices = 4,
  kInternal = 5,
};

enum class ServerMode : std::uint8_t {
  kCooperative = 0,  // server XORs the requested entries
  kDefault = 1,      // plain read-by-index only
};

inline const char* to_string(ServerMode m) {
  return m == ServerMode::kCooperative ? "cooperative" : "default";
}

inline ServerMode parse_mode(const std::string& s) {
  if (s == "cooperative") return ServerMode::kCooperative;
  if (s == "default") return ServerMode::kDefault;
  throw ParameterError("unknown server mode '" + s + "'");
}

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::kNone: return "none";
    case ErrorCode::kMalformed: return "malformed request";
    case ErrorCode::kUnsupportedOpcode: return "unsupported opcode";
    case ErrorCode::kIndexOutOfRange: return "index out of range";
    case ErrorCode::kTooManyIndices: return "too many indices";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::size_t kInfoPayloadBytes = 17;
inline constexpr std::uint64_t kStreamChunkBytes = 1 << 20;

// The single place where math-layer indices ([n], 1-based) become wire
// indices (0-based) and back.
inline std::uint64_t to_wire_index(std::uint64_t math_index) {
  return math_index - 1;
}
inline std::uint64_t from_wire_index(std::uint64_t wire_index) {
  return wire_index + 1;
}

struct FrameHeader {
  std::uint8_t tag = 0;
  std::uint32_t body_length = 0;
};

inline FrameHeader parse_frame_header(ByteView h) {
  if (h.size() < kFrameHeaderBytes) throw FramingError("short frame header");
  return FrameHeader{h[0], le::get<std::uint32_t>(h.data() + 1)};
}

inline Bytes make_frame(std::uint8_t tag, ByteView body) {
  if (body.size() > 0xFFFFFFFFULL) throw FramingError("frame body too large");
  Bytes out;
  out.reserve(kFrameHeaderBytes + body.size());
  out.push_back(tag);
  le::put<std::uint32_t>(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

/// Request. `indices` are wire (0-based) indices, FETCH / XOR_FETCH only.
struct QueryMessage {
  Opcode opcode = Opcode::kInfo;
  std::vector<std::uint64_t> indices;

  static QueryMessage info() { return {Opcode::kInfo, {}}; }
  static QueryMessage stream() { return {Opcode::kStream, {}}; }

  // Builds a FETCH / XOR_FETCH from math-layer indices, sorted ascending.
  static QueryMessage from_math(Opcode op,
                                const std::vector<std::uint64_t>& math) {
    QueryMessage q{op, {}};
    q.indices.reserve(math.size());
    for (auto i : math) {
      if (i == 0) throw ParameterError("math index 0 is invalid");
      q.indices.push_back(to_wire_index(i));
    }
    std::sort(q.indices.begin(), q.indices.end());
    return q;
  }

  friend bool operator==(const QueryMessage&, const QueryMessage&) = default;
};

inline bool carries_indices(Opcode op) {
  return op == Opcode::kFetch || op == Opcode::kXorFetch;
}

inline Bytes encode_request(const QueryMessage& q) {
  Bytes body;
  if (carries_indices(q.opcode)) {
    body.reserve(q.indices.size() * 8);
    for (auto i : q.indices) le::put<std::uint64_t>(body, i);
  } else if (!q.indices.empty()) {
    throw FramingError("INFO/STREAM carry no indices");
  }
  return make_frame(static_cast<std::uint8_t>(q.opcode), body);
}

inline Opcode parse_opcode(std::uint8_t tag) {
  if (tag < 1 || tag > 4) {
    throw FramingError("unknown opcode " + std::to_string(tag));
  }
  return static_cast<Opcode>(tag);
}

// Decodes a request body once its header has been read.
inline QueryMessage decode_request_body(Opcode op, ByteView body) {
  QueryMessage q{op, {}};
  if (!carries_indices(op)) {
    if (!body.empty()) throw FramingError("INFO/STREAM body must be empty");
    return q;
  }
  if (body.size() % 8 != 0) {
    throw FramingError("index list length not a multiple of 8");
  }
  q.indices.resize(body.size() / 8);
  for (std::size_t t = 0; t < q.indices.size(); ++t) {
    q.indices[t] = le::get<std::uint64_t>(body.data() + 8 * t);
  }
  return q;
}

/// Decodes exactly one complete request frame.
inline QueryMessage decode_request(ByteView frame) {
  const auto h = parse_frame_header(frame);
  if (frame.size() - kFrameHeaderBytes != h.body_length) {
    throw FramingError("declared length " + std::to_string(h.body_length) +
                       " does not match body of " +
                       std::to_string(frame.size() - kFrameHeaderBytes));
  }
  return decode_request_body(parse_opcode(h.tag),
                             frame.subspan(kFrameHeaderBytes));
}

struct ResponseMessage {
  Status status = Status::kOk;
  ErrorCode error = ErrorCode::kNone;
  Bytes payload;

  static ResponseMessage ok(Bytes payload) {
    return {Status::kOk, ErrorCode::kNone, std::move(payload)};
  }
  static ResponseMessage failure(ErrorCode code) {
    return {Status::kError, code, {}};
  }

  friend bool operator==(const ResponseMessage&,
                         const ResponseMessage&) = default;
};

inline Bytes encode_response(const ResponseMessage& r) {
  if (r.status == Status::kError) {
    Bytes body;
    le::put<std::uint16_t>(body, static_cast<std::uint16_t>(r.error));
    return make_frame(static_cast<std::uint8_t>(Status::kError), body);
  }
  return make_frame(static_cast<std::uint8_t>(Status::kOk), r.payload);
}

inline ResponseMessage decode_response_body(std::uint8_t tag, ByteView body) {
  if (tag == static_cast<std::uint8_t>(Status::kOk)) {
    return ResponseMessage::ok(Bytes(body.begin(), body.end()));
  }
  if (tag == static_cast<std::uint8_t>(Status::kError)) {
    if (body.size() != 2) throw FramingError("error frame must carry 2 bytes");
    return ResponseMessage::failure(
        static_cast<ErrorCode>(le::get<std::uint16_t>(body.data())));
  }
  throw FramingError("unknown response status " + std::to_string(tag));
}

inline ResponseMessage decode_response(ByteView frame) {
  const auto h = parse_frame_header(frame);
  if (frame.size() - kFrameHeaderBytes != h.body_length) {
    throw FramingError("declared length does not match body");
  }
  return decode_response_body(h.tag, frame.subspan(kFrameHeaderBytes));
}

struct ServerInfo {
  std::uint64_t n = 0;
  std::uint64_t beta = 0;
  ServerMode mode = ServerMode::kDefault;

  friend bool operator==(const ServerInfo&, const ServerInfo&) = default;
};

inline Bytes encode_info(const ServerInfo& info) {
  Bytes b;
  le::put<std::uint64_t>(b, info.n);
  le::put<std::uint64_t>(b, info.beta);
  b.push_back(static_cast<std::uint8_t>(info.mode));
  return b;
}

inline ServerInfo decode_info(ByteView payload) {
  if (payload.size() != kInfoPayloadBytes) {
    throw FramingError("INFO payload must be 17 bytes");
  }
  ServerInfo info;
  info.n = le::get<std::uint64_t>(payload.data());
  info.beta = le::get<std::uint64_t>(payload.data() + 8);
  if (payload[16] > 1) throw FramingError("INFO: unknown mode");
  info.mode = static_cast<ServerMode>(payload[16]);
  return info;
}

// Expected OK payload size for a request, given the server's INFO.
inline std::uint64_t expected_payload_bytes(const QueryMessage& q,
                                            const ServerInfo& info) {
  switch (q.opcode) {
    case Opcode::kInfo: return kInfoPayloadBytes;
    case Opcode::kStream: return info.n * info.beta;
    case Opcode::kFetch: return q.indices.size() * info.beta;
    case Opcode::kXorFetch: return info.beta;
  }
  return 0;
}

/// One observed exchange. Append-only log of what crossed the wire.
struct TranscriptEntry {
  QueryMessage query;
  std::uint64_t request_frame_bytes = 0;
  std::uint64_t response_payload_bytes = 0;
  std::uint64_t response_frame_bytes = 0;
  Status status = Status::kOk;
};

class Transcript {
 public:
  void append(TranscriptEntry e) { entries_.push_back(std::move(e)); }
  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<TranscriptEntry> entries_;
};

}  // namespace mspir::proto
