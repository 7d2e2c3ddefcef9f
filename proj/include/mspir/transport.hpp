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

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>

#include "mspir/bytes.hpp"
#include "mspir/error.hpp"
#include "mspir/server.hpp"

namespace mspir {

/// Byte-stream transport carrying whole request frames out and arbitrary
/// response bytes back.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(ByteView frame) = 0;
  virtual void recv_exact(std::span<std::uint8_t> out) = 0;
};

/// Loops frames straight into a RequestHandler. Used by tests and by the
/// simulation harnesses; behaves exactly like a TCP peer on the wire.
class InProcessTransport final : public Transport {
 public:
  explicit InProcessTransport(RequestHandler& handler) : handler_(handler) {}

  void send(ByteView frame) override {
    handler_.handle_frame(frame, [this](ByteView out) {
      inbox_.insert(inbox_.end(), out.begin(), out.end());
    });
  }

  void recv_exact(std::span<std::uint8_t> out) override {
    if (inbox_.size() < out.size()) {
      throw NetworkError("in-process peer sent fewer bytes than expected");
    }
    std::copy_n(inbox_.begin(), out.size(), out.begin());
    inbox_.erase(inbox_.begin(),
                 inbox_.begin() + static_cast<std::ptrdiff_t>(out.size()));
  }

 private:
  RequestHandler& handler_;
  std::deque<std::uint8_t> inbox_;
};

class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(const std::string& address) {
    const auto ep = net::parse_endpoint(address);
    sockaddr_in sa = net::resolve(ep);
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw NetworkError("socket() failed");
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw NetworkError("cannot connect to " + address);
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  ~TcpTransport() override {
    if (fd_ >= 0) ::close(fd_);
  }

  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  void send(ByteView frame) override { net::write_all(fd_, frame); }

  void recv_exact(std::span<std::uint8_t> out) override {
    if (!net::read_all(fd_, out)) throw NetworkError("server closed connection");
  }

 private:
  int fd_ = -1;
};

}  // namespace mspir
