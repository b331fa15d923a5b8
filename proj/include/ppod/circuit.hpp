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
#include <optional>
#include <string>
#include <vector>

#include "ppod/crypto.hpp"

namespace ppod {

using Wire = std::uint32_t;
// Little-endian bit order: word[0] is the least significant bit.
using Word = std::vector<Wire>;
using BitVec = std::vector<std::uint8_t>;

enum class GateKind : std::uint8_t { kXor, kAnd, kNot, kConst };

struct Gate {
  GateKind kind;
  Wire a;    // kConst: the constant value (0 or 1)
  Wire b;    // unused for kNot / kConst
  Wire out;
};

enum class InputOwner : std::uint8_t { kGarbler, kEvaluator };
enum class Destination : std::uint8_t { kGarbler, kEvaluator, kBoth, kReshare };

const char* to_string(InputOwner o);
const char* to_string(Destination d);

struct InputBundle {
  std::string name;
  InputOwner owner;
  Word wires;
};

struct OutputBundle {
  std::string name;
  Destination destination;
  Word wires;
};

struct GateCounts {
  std::size_t xor_gates = 0;
  std::size_t and_gates = 0;
  std::size_t not_gates = 0;
  std::size_t const_gates = 0;

  std::size_t total() const { return xor_gates + and_gates + not_gates + const_gates; }
  // "and=<n> xor=<n> not=<n> const=<n> total=<n>"
  std::string to_string() const;
};

// Immutable gate list. Wires 0 and 1 are always the constants 0 and 1.
class Circuit {
 public:
  Circuit() = default;
  Circuit(std::string name, std::uint32_t num_wires, std::vector<Gate> gates,
          std::vector<InputBundle> inputs, std::vector<OutputBundle> outputs);

  const std::string& name() const { return name_; }
  std::uint32_t num_wires() const { return num_wires_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<InputBundle>& inputs() const { return inputs_; }
  const std::vector<OutputBundle>& outputs() const { return outputs_; }

  std::size_t input_index(const std::string& name) const;
  std::size_t output_index(const std::string& name) const;
  const InputBundle& input(const std::string& name) const { return inputs_[input_index(name)]; }
  const OutputBundle& output(const std::string& name) const { return outputs_[output_index(name)]; }

  const GateCounts& counts() const { return counts_; }
  std::size_t and_count() const { return counts_.and_gates; }

  // Throws ParameterError unless every wire is written exactly once before
  // use and bundles reference existing wires.
  void validate() const;

  // SHA-256 of serialize(), computed at construction.
  const Sha256Digest& hash() const { return hash_; }

  // Text gate list:
  //   ppod-circuit 1 / name N / wires W / input NAME OWNER WIDTH w.. /
  //   output NAME DEST WIDTH w.. / XOR a b o | AND a b o | NOT a o |
  //   CONST v o / end
  std::string serialize() const;
  static Circuit parse(const std::string& text);

  // Plaintext evaluation keyed by bundle name.
  std::map<std::string, BitVec> evaluate(const std::map<std::string, BitVec>& inputs) const;

 private:
  std::string name_;
  std::uint32_t num_wires_ = 0;
  std::vector<Gate> gates_;
  std::vector<InputBundle> inputs_;
  std::vector<OutputBundle> outputs_;
  GateCounts counts_;
  Sha256Digest hash_{};
};

// Appends gates with local constant folding. Folding never changes the
// function computed, only the gate count.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::string name);

  static constexpr Wire kZero = 0;
  static constexpr Wire kOne = 1;

  Word input(const std::string& name, InputOwner owner, std::size_t width);
  void output(const std::string& name, Destination destination, const Word& wires);

  Wire constant(bool v) const { return v ? kOne : kZero; }
  Word constant_word(std::uint64_t value, std::size_t width) const;

  Wire xor_gate(Wire a, Wire b);
  Wire and_gate(Wire a, Wire b);
  Wire not_gate(Wire a);
  Wire or_gate(Wire a, Wire b);

  Circuit build() &&;

 private:
  std::optional<bool> known(Wire w) const;
  Wire fresh();

  std::string name_;
  std::uint32_t next_wire_ = 2;
  std::vector<Gate> gates_;
  std::vector<InputBundle> inputs_;
  std::vector<OutputBundle> outputs_;
};

BitVec to_bits(std::uint64_t value, std::size_t width);
// Reads at most `width` bits (and at most 64), stopping at the end of `bits`.
std::uint64_t from_bits(const BitVec& bits, std::size_t offset = 0, std::size_t width = 64);
// Concatenates fixed-width encodings of `values`.
BitVec pack_bits(const std::vector<std::uint64_t>& values, std::size_t width);
std::vector<std::uint64_t> unpack_bits(const BitVec& bits, std::size_t width);

}  // namespace ppod
