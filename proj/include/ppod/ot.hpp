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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "ppod/circuit.hpp"
#include "ppod/crypto.hpp"
#include "ppod/transport.hpp"

// Oblivious transfer of wire labels. In ideal mode a trusted dealer holds
// the sender's pairs and hands the receiver the chosen label; the sender's
// messages never depend on the choices.
namespace ppod {

enum class OtMode : std::uint8_t { kIdeal, kReal };

OtMode parse_ot_mode(const std::string& text);  // "ideal-ot" | "real-ot"
const char* to_string(OtMode mode);
// Throws UnsupportedMode for modes this build cannot run.
void require_supported(OtMode mode);

struct LabelPair {
  Block zero;
  Block one;
};

// Dealer-side rendezvous between the sender's deposit and the receiver's
// choice for the same sequence number.
class OtDealer {
 public:
  explicit OtDealer(std::chrono::milliseconds timeout = kDefaultRecvTimeout) : timeout_(timeout) {}

  void deposit(std::uint64_t seq, std::vector<LabelPair> pairs);
  // Waits for the matching deposit.
  std::vector<Block> select(std::uint64_t seq, const BitVec& choices);
  void abort();

  std::uint64_t transfers() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::uint64_t, std::vector<LabelPair>> pending_;
  std::chrono::milliseconds timeout_;
  std::uint64_t transfers_ = 0;
  bool aborted_ = false;
};

// Dealer handlers for the two OT messages. handle_choose replies with
// OtResult on `receiver`.
void ot_handle_send(OtDealer& dealer, std::span<const std::uint8_t> payload);
void ot_handle_choose(OtDealer& dealer, Channel& receiver, std::span<const std::uint8_t> payload);

class OtSender {
 public:
  OtSender(Channel& dealer, OtMode mode);
  void send(std::span<const LabelPair> pairs);
  std::uint64_t next_seq() const { return seq_; }

 private:
  Channel& dealer_;
  std::uint64_t seq_ = 0;
};

class OtReceiver {
 public:
  OtReceiver(Channel& dealer, OtMode mode);
  std::vector<Block> receive(const BitVec& choices);
  std::uint64_t next_seq() const { return seq_; }

 private:
  Channel& dealer_;
  std::uint64_t seq_ = 0;
};

// One complete transfer through an in-process dealer.
std::vector<Block> ot_transfer(const BitVec& choices, std::span<const LabelPair> pairs, OtMode mode);

}  // namespace ppod
