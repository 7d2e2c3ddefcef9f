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

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mspir/bytes.hpp"
#include "mspir/database.hpp"
#include "mspir/error.hpp"
#include "mspir/params.hpp"
#include "mspir/protocol.hpp"

namespace mspir {

struct ServerConfig {
  proto::ServerMode mode = proto::ServerMode::kDefault;
  std::string listen = "127.0.0.1:0";
  std::size_t max_sessions = 64;
  // Cap on indices per FETCH / XOR_FETCH; 0 means 4 * ceil(sqrt(n)).
  std::uint64_t max_indices = 0;
  // Simulated storage throughput in bytes/ms; 0 disables throttling.
  double io_bytes_per_ms = 0;
};

// Instrumentation. xor_ops counts entry XORs performed server-side and must
// stay zero in default mode.
struct ServerStats {
  std::atomic<std::uint64_t> requests{0};
  std::atomic<std::uint64_t> errors{0};
  std::atomic<std::uint64_t> entry_reads{0};
  std::atomic<std::uint64_t> xor_ops{0};
  std::atomic<std::uint64_t> bytes_streamed{0};
};

namespace detail {

inline void check_indices(const Database& db,
                          const std::vector<std::uint64_t>& indices) {
  for (auto i : indices) {
    if (i >= db.size()) {
      throw ProtocolError("index out of range",
                          static_cast<int>(proto::ErrorCode::kIndexOutOfRange));
    }
  }
}

}  // namespace detail

/// XOR of the entries at the given wire indices, duplicates counted.
/// Validates every index before touching any entry.
inline Bytes server_answer_xor_fetch(const Database& db,
                                     const std::vector<std::uint64_t>& indices,
                                     ServerStats* stats = nullptr) {
  detail::check_indices(db, indices);
  Bytes result(db.entry_bytes(), 0);
  for (auto i : indices) {
    xor_into(result, db.entry(i));
  }
  if (stats) {
    stats->entry_reads += indices.size();
    stats->xor_ops += indices.size();
  }
  return result;
}

/// Entries at the given wire indices, concatenated in request order.
inline Bytes server_answer_fetch(const Database& db,
                                 const std::vector<std::uint64_t>& indices,
                                 ServerStats* stats = nullptr) {
  detail::check_indices(db, indices);
  Bytes out;
  out.reserve(indices.size() * db.entry_bytes());
  for (auto i : indices) {
    auto e = db.entry(i);
    out.insert(out.end(), e.begin(), e.end());
  }
  if (stats) stats->entry_reads += indices.size();
  return out;
}

/// Turns request frames into response frames. Stateless apart from the
/// shared counters, so one handler can serve any number of sessions.
class RequestHandler {
 public:
  using Emit = std::function<void(ByteView frame)>;

  RequestHandler(const Database& db, ServerConfig config,
                 ServerStats* stats = nullptr)
      : db_(db), config_(std::move(config)), stats_(stats) {
    if (config_.max_indices == 0) {
      config_.max_indices = 4 * ceil_sqrt(db_.size());
    }
  }

  const ServerConfig& config() const { return config_; }
  const Database& database() const { return db_; }

  std::uint64_t max_body_bytes() const { return config_.max_indices * 8; }

  proto::ServerInfo info() const {
    return {db_.size(), db_.entry_bytes(), config_.mode};
  }

  // Handles one complete request frame.
  void handle_frame(ByteView frame, const Emit& emit) {
    proto::QueryMessage q;
    try {
      const auto h = proto::parse_frame_header(frame);
      if (frame.size() - proto::kFrameHeaderBytes != h.body_length) {
        throw FramingError("length mismatch");
      }
      if (h.tag < 1 || h.tag > 4) {
        fail(proto::ErrorCode::kUnsupportedOpcode, emit);
        return;
      }
      if (h.body_length > max_body_bytes()) {
        fail(proto::ErrorCode::kTooManyIndices, emit);
        return;
      }
      q = proto::decode_request_body(static_cast<proto::Opcode>(h.tag),
                                     frame.subspan(proto::kFrameHeaderBytes));
    } catch (const Error&) {
      fail(proto::ErrorCode::kMalformed, emit);
      return;
    }
    handle(q, emit);
  }

  void handle(const proto::QueryMessage& q, const Emit& emit) {
    if (stats_) ++stats_->requests;
    try {
      switch (q.opcode) {
        case proto::Opcode::kInfo:
          send_ok(proto::encode_info(info()), emit);
          return;
        case proto::Opcode::kStream:
          stream(emit);
          return;
        case proto::Opcode::kFetch:
          if (q.indices.size() > config_.max_indices) {
            fail(proto::ErrorCode::kTooManyIndices, emit);
            return;
          }
          throttle(q.indices.size());
          send_ok(server_answer_fetch(db_, q.indices, stats_), emit);
          return;
        case proto::Opcode::kXorFetch:
          // Default mode serves plain reads only.
          if (config_.mode == proto::ServerMode::kDefault) {
            fail(proto::ErrorCode::kUnsupportedOpcode, emit);
            return;
          }
          if (q.indices.size() > config_.max_indices) {
            fail(proto::ErrorCode::kTooManyIndices, emit);
            return;
          }
          throttle(q.indices.size());
          send_ok(server_answer_xor_fetch(db_, q.indices, stats_), emit);
          return;
      }
      fail(proto::ErrorCode::kUnsupportedOpcode, emit);
    } catch (const ProtocolError& e) {
      fail(static_cast<proto::ErrorCode>(e.code()), emit);
    } catch (const std::exception&) {
      fail(proto::ErrorCode::kInternal, emit);
    }
  }

 private:
  void stream(const Emit& emit) {
    // OK chunks of at most 1 MiB, then an empty OK frame as terminator.
    const auto all = db_.bytes();
    for (std::size_t off = 0; off < all.size();
         off += proto::kStreamChunkBytes) {
      const auto len =
          std::min<std::size_t>(proto::kStreamChunkBytes, all.size() - off);
      emit(proto::make_frame(0, all.subspan(off, len)));
    }
    emit(proto::make_frame(0, {}));
    if (stats_) {
      stats_->entry_reads += db_.size();
      stats_->bytes_streamed += all.size();
    }
  }

  void throttle(std::uint64_t entries) const {
    if (config_.io_bytes_per_ms <= 0) return;
    const double ms = static_cast<double>(entries * db_.entry_bytes()) /
                      config_.io_bytes_per_ms;
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
  }

  void send_ok(const Bytes& payload, const Emit& emit) {
    emit(proto::encode_response(proto::ResponseMessage::ok(payload)));
  }

  void fail(proto::ErrorCode code, const Emit& emit) {
    if (stats_) ++stats_->errors;
    emit(proto::encode_response(proto::ResponseMessage::failure(code)));
  }

  const Database& db_;
  ServerConfig config_;
  ServerStats* stats_;
};

namespace net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

inline Endpoint parse_endpoint(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw ParameterError("address must be host:port, got '" + addr + "'");
  }
  Endpoint e;
  e.host = addr.substr(0, colon);
  if (e.host.empty()) e.host = "0.0.0.0";
  try {
    const auto port = std::stoul(addr.substr(colon + 1));
    if (port > 65535) throw ParameterError("port out of range");
    e.port = static_cast<std::uint16_t>(port);
  } catch (const std::logic_error&) {
    throw ParameterError("bad port in '" + addr + "'");
  }
  return e;
}

inline sockaddr_in resolve(const Endpoint& e) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(e.host.c_str(), nullptr, &hints, &res) != 0 || !res) {
    throw NetworkError("cannot resolve host '" + e.host + "'");
  }
  sockaddr_in sa = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  sa.sin_port = htons(e.port);
  return sa;
}

inline void write_all(int fd, ByteView data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const auto w = ::send(fd, data.data() + off, data.size() - off,
                          MSG_NOSIGNAL);
    if (w <= 0) throw NetworkError("socket write failed");
    off += static_cast<std::size_t>(w);
  }
}

// False on clean EOF before the first byte; throws on EOF mid-buffer.
inline bool read_all(int fd, std::span<std::uint8_t> out) {
  std::size_t off = 0;
  while (off < out.size()) {
    const auto r = ::recv(fd, out.data() + off, out.size() - off, 0);
    if (r == 0) {
      if (off == 0) return false;
      throw NetworkError("connection closed mid-frame");
    }
    if (r < 0) throw NetworkError("socket read failed");
    off += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace net

/// TCP front end: one thread per connection over a shared read-only
/// database.
class TcpServer {
 public:
  TcpServer(const Database& db, ServerConfig config,
            ServerStats* stats = nullptr)
      : handler_(db, std::move(config), stats) {}

  ~TcpServer() { stop(); }

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  // Binds and starts accepting; returns the bound port.
  std::uint16_t start() {
    const auto ep = net::parse_endpoint(handler_.config().listen);
    sockaddr_in sa = net::resolve(ep);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw NetworkError("socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
      ::close(listen_fd_);
      listen_fd_ = -1;
      throw NetworkError("cannot bind " + handler_.config().listen);
    }
    if (::listen(listen_fd_, 128) != 0) {
      throw NetworkError("listen() failed");
    }
    socklen_t len = sizeof(sa);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    return port_;
  }

  void stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) acceptor_.join();
    std::list<Session> sessions;
    {
      std::lock_guard lock(mu_);
      for (auto& s : sessions_) {
        if (!s.done) ::shutdown(s.fd, SHUT_RDWR);
      }
      sessions.swap(sessions_);
    }
    for (auto& s : sessions) {
      if (s.thread.joinable()) s.thread.join();
    }
  }

  // Blocks until stop() is called from elsewhere.
  void wait() {
    if (acceptor_.joinable()) acceptor_.join();
  }

  std::uint16_t port() const { return port_; }
  std::size_t active_sessions() const { return active_; }

 private:
  struct Session {
    std::uint64_t id;
    int fd;
    bool done = false;
    std::thread thread;
  };

  void accept_loop() {
    while (running_) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (!running_) return;
        continue;
      }
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      if (active_ >= handler_.config().max_sessions) {
        try {
          net::write_all(fd, proto::encode_response(
                                 proto::ResponseMessage::failure(
                                     proto::ErrorCode::kInternal)));
        } catch (const Error&) {
        }
        ::close(fd);
        continue;
      }
      ++active_;
      std::lock_guard lock(mu_);
      reap_finished();
      const auto id = next_id_++;
      sessions_.push_back(Session{id, fd, false, {}});
      sessions_.back().thread =
          std::thread([this, id, fd] { serve_session(id, fd); });
    }
  }

  void reap_finished() {
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (it->done && it->thread.joinable()) {
        it->thread.join();
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void serve_session(std::uint64_t id, int fd) {
    try {
      std::uint8_t header[proto::kFrameHeaderBytes];
      Bytes frame;
      auto emit = [fd](ByteView out) { net::write_all(fd, out); };
      while (net::read_all(fd, header)) {
        const auto h = proto::parse_frame_header(header);
        if (h.body_length > handler_.max_body_bytes()) {
          // Oversized: answer, then drop the connection rather than drain.
          const auto code = h.tag >= 1 && h.tag <= 4
                                ? proto::ErrorCode::kTooManyIndices
                                : proto::ErrorCode::kMalformed;
          emit(proto::encode_response(proto::ResponseMessage::failure(code)));
          break;
        }
        frame.assign(header, header + proto::kFrameHeaderBytes);
        frame.resize(proto::kFrameHeaderBytes + h.body_length);
        if (!net::read_all(fd, std::span(frame).subspan(
                                   proto::kFrameHeaderBytes))) {
          if (h.body_length > 0) break;
        }
        handler_.handle_frame(frame, emit);
      }
    } catch (const Error&) {
      // peer went away
    }
    std::lock_guard lock(mu_);
    for (auto& s : sessions_) {
      if (s.id == id) s.done = true;
    }
    ::close(fd);
    --active_;
  }

  RequestHandler handler_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::size_t> active_{0};
  std::thread acceptor_;
  std::mutex mu_;
  std::list<Session> sessions_;
  std::uint64_t next_id_ = 0;
};

}  // namespace mspir
