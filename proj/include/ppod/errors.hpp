// Copyright 2026 The PPOD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ppod {

// Root of every error raised by the library. Callers that only care about
// "something in the protocol stack failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Value outside the ring or a configured domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent parameters (k > W, bit width mismatch, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The two parties disagree about protocol state (tag mismatch, reused
// triple, stale mask, circuit hash mismatch).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Channel failure: disconnect, timeout, oversize frame.
class TransportError : public Error {
 public:
  using Error::Error;
};

// A garbled table row or output label failed its integrity check.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Decode requested by a party that is not a destination of the bundle.
class AccessError : public Error {
 public:
  using Error::Error;
};

// Derandomise produced a matrix that is not a permutation.
class PairingError : public Error {
 public:
  using Error::Error;
};

// Feature requested that is not available in this build.
class UnsupportedMode : public Error {
 public:
  using Error::Error;
};

// Malformed user input (CSV, config file, command line point).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace ppod
