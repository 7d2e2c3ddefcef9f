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

#include <stdexcept>
#include <string>

namespace mspir {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied parameters (k > N, n < 2, index out of range, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Redaction target not present in the multiset.
class NotCoveredError : public Error {
 public:
  using Error::Error;
};

// An exhaustive oracle was asked to enumerate more than its cap.
class OracleTooLargeError : public Error {
 public:
  using Error::Error;
};

// Short/over-long database streams, size mismatches, corrupt files.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Malformed wire frames.
class FramingError : public Error {
 public:
  using Error::Error;
};

// The peer answered with an error status, or a response of the wrong shape.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, int code = 0)
      : Error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

// Transport-level failures (connect, read, write).
class NetworkError : public Error {
 public:
  using Error::Error;
};

// No unconsumed hint covers the target and no local copy exists.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (e.g. reused a consumed hint).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace mspir
