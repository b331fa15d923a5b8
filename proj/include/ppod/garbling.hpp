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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ppod/bytes.hpp"
#include "ppod/circuit.hpp"
#include "ppod/crypto.hpp"

// Yao garbling with free-XOR and point-and-permute. Each AND gate carries a
// four-row table; a row is the masked output label followed by a masked
// all-zero block that the evaluator checks.
namespace ppod {

inline constexpr std::size_t kBlocksPerRow = 2;
inline constexpr std::size_t kBlocksPerTable = 4 * kBlocksPerRow;
inline constexpr std::size_t kTableBytes = kBlocksPerTable * sizeof(Block);

// Global free-XOR offset; low bit set so the two labels of a wire carry
// opposite permute bits.
Block random_delta(Prg& prg);

// 64-bit digest of a label bound to its wire index.
std::uint64_t label_digest(const Block& label, std::uint32_t wire);

struct WireDigest {
  std::uint64_t zero = 0;
  std::uint64_t one = 0;
  bool operator==(const WireDigest&) const = default;
};

struct GarbledCircuit {
  Sha256Digest circuit_hash{};
  std::uint64_t gate_count = 0;
  std::uint64_t and_count = 0;
  std::uint64_t tweak_base = 0;
  std::vector<Block> tables;  // kBlocksPerTable per AND gate, gate order
  std::vector<Block> const_labels;  // active labels of CONST gates, gate order
  // Active labels for garbler-owned bundles supplied as plaintext.
  std::vector<std::pair<std::uint32_t, std::vector<Block>>> garbler_inputs;
  // Digests for every wire of every bundle the evaluator may decode, in
  // output-bundle order.
  std::vector<WireDigest> decode;

  std::size_t table_bytes() const { return tables.size() * sizeof(Block); }
  Bytes serialize() const;
  static GarbledCircuit parse(std::span<const std::uint8_t> data);
};

struct GarbleResult {
  GarbledCircuit gc;
  std::vector<Block> zero_labels;  // K0 of every wire
  Block delta;
};

struct GarbleOptions {
  // Zero labels reused for bundles that already hold Yao shares.
  std::map<std::string, std::vector<Block>> fixed_inputs;
  // Garbler plaintext inputs, encoded into gc.garbler_inputs.
  std::map<std::string, BitVec> garbler_bits;
  std::uint64_t tweak_base = 0;
};

GarbleResult garble(const Circuit& circuit, const Block& delta, Prg& prg, const GarbleOptions& options = {});
// Fresh delta drawn from prg.
GarbleResult garble(const Circuit& circuit, Prg& prg, const GarbleOptions& options = {});

// label[i] = zero[i] ^ (bits[i] ? delta : 0).
std::vector<Block> encode_garbler_inputs(std::span<const Block> zero, const BitVec& bits, const Block& delta);

// Active labels of every wire. `inputs` holds the evaluator's active labels
// per bundle; garbler plaintext bundles are taken from gc when absent.
std::vector<Block> evaluate(const Circuit& circuit, const GarbledCircuit& gc,
                            const std::map<std::string, std::vector<Block>>& inputs);

// Which party is decoding.
enum class Decoder : std::uint8_t { kGarbler, kEvaluator };

// Throws AccessError unless `who` is a destination of the bundle.
void check_decode_access(const OutputBundle& bundle, Decoder who);

// Evaluator-side decode through the digests in gc. Throws IntegrityError
// when a label matches neither digest.
BitVec decode_evaluator(const Circuit& circuit, const GarbledCircuit& gc, const std::string& bundle,
                        std::span<const Block> active);
// Garbler-side decode against its own zero labels.
BitVec decode_garbler(const Circuit& circuit, const std::string& bundle, std::span<const Block> active,
                      std::span<const Block> zero_labels, const Block& delta);

// Labels of an output bundle picked out of a full wire-label vector.
std::vector<Block> bundle_labels(const Word& wires, std::span<const Block> all);

}  // namespace ppod
