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

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ppod/circuit.hpp"
#include "ppod/ot.hpp"
#include "ppod/session.hpp"
#include "ppod/sharing.hpp"
#include "ppod/transport.hpp"

// Execution plumbing: the trusted dealer (triples, ideal OT, input feed),
// one party's session context, and an in-process two-party harness.
namespace ppod {

struct DealerOptions {
  std::uint64_t seed = 0;
  unsigned ring_bits = 64;
  OtMode ot_mode = OtMode::kIdeal;
};

class DealerService {
 public:
  // Answers InputRequest frames; the reply becomes an InputItem payload.
  using InputHandler = std::function<Bytes(int party, std::span<const std::uint8_t> request)>;

  explicit DealerService(DealerOptions options, InputHandler inputs = {});

  // Serves one party's channel until it says Bye.
  void serve(int party, Channel& channel);
  void abort() { ot_.abort(); }

  std::uint64_t triples_served(int party) const { return triples_served_[party]; }
  std::uint64_t ot_transfers() const { return ot_.transfers(); }
  const DealerOptions& options() const { return options_; }

 private:
  DealerOptions options_;
  Ring ring_;
  InputHandler inputs_;
  OtDealer ot_;
  std::array<std::uint64_t, 2> triples_served_{};
};

struct PartyOptions {
  unsigned ring_bits = 64;
  std::uint64_t seed = 0;
  bool fresh_entropy = false;
  OtMode ot_mode = OtMode::kIdeal;
  TriplePoolConfig pool;
};

// Remembers every mask handed to Y2A so a stale mask is refused.
class MaskRegistry {
 public:
  void claim(std::uint64_t mask);
  std::size_t size() const { return seen_.size(); }

 private:
  std::set<std::uint64_t> seen_;
};

// Everything one server needs to run the protocol.
class PartyContext {
 public:
  PartyContext(int party, Channel& peer, Channel& dealer, const PartyOptions& options);
  PartyContext(const PartyContext&) = delete;
  PartyContext& operator=(const PartyContext&) = delete;

  int party() const { return party_; }
  bool is_garbler() const { return party_ == 0; }
  const Ring& ring() const { return ring_; }
  Prg& prg() { return prg_; }
  TriplePool& pool() { return pool_; }
  Multiplier& mul() { return mul_; }
  YaoSession& yao() { return yao_; }
  MaskRegistry& masks() { return masks_; }
  Channel& peer() { return peer_; }
  Channel& dealer() { return dealer_; }

  // Built on first use, then reused.
  const Circuit& circuit(const std::string& key, const std::function<Circuit()>& build);
  std::size_t cached_circuits() const { return circuits_.size(); }
  // Gate counts of every cached circuit, keyed by circuit name.
  std::map<std::string, GateCounts> circuit_costs() const;

  // Tags subsequent traffic on both channels.
  void set_phase(const std::string& phase);
  const std::string& phase() const { return phase_; }

  // Peer plus dealer traffic.
  ChannelMetrics metrics() const;
  ChannelMetrics peer_metrics() const { return peer_.metrics_snapshot(); }

  // Request/response with the gateway.
  Bytes request_input(const Bytes& request);

 private:
  int party_;
  Channel& peer_;
  Channel& dealer_;
  Ring ring_;
  Prg prg_;
  TriplePool pool_;
  Multiplier mul_;
  YaoSession yao_;
  MaskRegistry masks_;
  std::map<std::string, std::unique_ptr<Circuit>> circuits_;
  std::string phase_ = "default";
};

enum class TransportKind : std::uint8_t { kInproc, kTcp };
TransportKind parse_transport(const std::string& text);

struct TwoPartyOptions {
  TransportKind transport = TransportKind::kInproc;
  std::chrono::milliseconds timeout = kDefaultRecvTimeout;
  // Outgoing frames of each party's peer channel, when set.
  std::array<Transcript*, 2> peer_transcripts{nullptr, nullptr};
};

using PartyBody = std::function<void(int party, Channel& peer, Channel& dealer)>;

// Runs the dealer and both parties on separate threads. The first failure
// closes the failing party's channels; a non-transport error is preferred
// when rethrowing.
void run_two_party(DealerService& dealer, const PartyBody& body, const TwoPartyOptions& options = {});

// Dealer triple file: "PPODTRP1", u8 ring bits, u64 count, then per triple
// party 0 (x, y, z) followed by party 1 (x, y, z), ring-width LE each.
void write_triple_file(const std::string& path, const TripleLists& lists, const Ring& ring);
TripleLists read_triple_file(const std::string& path, Ring* ring_out = nullptr);

}  // namespace ppod
