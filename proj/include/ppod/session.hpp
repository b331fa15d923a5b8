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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppod/circuit.hpp"
#include "ppod/crypto.hpp"
#include "ppod/garbling.hpp"
#include "ppod/ot.hpp"
#include "ppod/transport.hpp"

namespace ppod {

// One party's half of a Yao-shared word. The garbler holds the zero labels
// (the one labels follow from its delta); the evaluator holds the active
// labels.
struct YaoWord {
  std::vector<Block> labels;

  std::size_t size() const { return labels.size(); }
  YaoWord slice(std::size_t offset, std::size_t count) const;
  static YaoWord concat(const std::vector<YaoWord>& parts);
};

// Input to one circuit run: plaintext bits from the bundle's owner, or an
// existing Yao share supplied by both parties.
struct GcInput {
  std::optional<BitVec> bits;
  std::optional<YaoWord> shared;

  static GcInput plain(BitVec b) { return {std::move(b), std::nullopt}; }
  static GcInput yao(YaoWord w) { return {std::nullopt, std::move(w)}; }
};

struct GcOutputs {
  std::map<std::string, BitVec> bits;      // decoded bundles
  std::map<std::string, YaoWord> shared;   // reshare bundles
};

struct DecodeEvent {
  std::string circuit;
  std::string bundle;
  int party;
  Destination destination;
  BitVec bits;
};

struct YaoStats {
  std::uint64_t circuits = 0;
  std::uint64_t and_gates = 0;
  std::uint64_t table_bytes = 0;
  std::uint64_t ot_labels = 0;
};

// Runs circuits between a fixed garbler (party 0) and evaluator (party 1)
// under one free-XOR offset, so outputs of one circuit feed the next as Yao
// shares. Evaluator inputs travel through the OT dealer.
class YaoSession {
 public:
  YaoSession(int party, Channel& peer, Channel& dealer, Prg& prg, OtMode mode = OtMode::kIdeal);

  GcOutputs run(const Circuit& circuit, const std::map<std::string, GcInput>& inputs);

  bool is_garbler() const { return party_ == 0; }
  int party() const { return party_; }
  // Garbler only.
  const Block& delta() const { return delta_; }
  std::uint64_t next_tweak() const { return tweak_; }
  const YaoStats& stats() const { return stats_; }

  void on_decode(std::function<void(const DecodeEvent&)> hook) { decode_hook_ = std::move(hook); }

  // Test helper: exchanges a shared word and decodes it on both sides with no
  // circuit and no decode event.
  std::uint64_t debug_open(const YaoWord& word);

 private:
  GcOutputs run_garbler(const Circuit& circuit, const std::map<std::string, GcInput>& inputs);
  GcOutputs run_evaluator(const Circuit& circuit, const std::map<std::string, GcInput>& inputs);
  void emit(const Circuit& c, const OutputBundle& out, const BitVec& bits);

  int party_;
  Channel& peer_;
  Prg& prg_;
  Block delta_{};
  std::uint64_t tweak_ = 0;
  std::optional<OtSender> ot_sender_;
  std::optional<OtReceiver> ot_receiver_;
  std::function<void(const DecodeEvent&)> decode_hook_;
  YaoStats stats_;
};

}  // namespace ppod
