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

#include "ppod/circuit.hpp"

#include <algorithm>

#include <sstream>

#include "ppod/errors.hpp"

namespace ppod {

const char* to_string(InputOwner o) { return o == InputOwner::kGarbler ? "garbler" : "evaluator"; }

const char* to_string(Destination d) {
  switch (d) {
    case Destination::kGarbler: return "garbler";
    case Destination::kEvaluator: return "evaluator";
    case Destination::kBoth: return "both";
    case Destination::kReshare: return "reshare";
  }
  return "?";
}

std::string GateCounts::to_string() const {
  std::ostringstream os;
  os << "and=" << and_gates << " xor=" << xor_gates << " not=" << not_gates
     << " const=" << const_gates << " total=" << total();
  return os.str();
}

Circuit::Circuit(std::string name, std::uint32_t num_wires, std::vector<Gate> gates,
                 std::vector<InputBundle> inputs, std::vector<OutputBundle> outputs)
    : name_(std::move(name)),
      num_wires_(num_wires),
      gates_(std::move(gates)),
      inputs_(std::move(inputs)),
      outputs_(std::move(outputs)) {
  for (const auto& g : gates_) {
    switch (g.kind) {
      case GateKind::kXor: ++counts_.xor_gates; break;
      case GateKind::kAnd: ++counts_.and_gates; break;
      case GateKind::kNot: ++counts_.not_gates; break;
      case GateKind::kConst: ++counts_.const_gates; break;
    }
  }
  std::string text = serialize();
  hash_ = sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::size_t Circuit::input_index(const std::string& name) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    if (inputs_[i].name == name) return i;
  throw ParameterError("circuit '" + name_ + "' has no input '" + name + "'");
}

std::size_t Circuit::output_index(const std::string& name) const {
  for (std::size_t i = 0; i < outputs_.size(); ++i)
    if (outputs_[i].name == name) return i;
  throw ParameterError("circuit '" + name_ + "' has no output '" + name + "'");
}

void Circuit::validate() const {
  std::vector<std::uint8_t> written(num_wires_, 0);
  auto write = [&](Wire w) {
    if (w >= num_wires_) throw ParameterError("wire id out of range");
    if (written[w]) throw ParameterError("wire " + std::to_string(w) + " written twice");
    written[w] = 1;
  };
  auto read = [&](Wire w) {
    if (w >= num_wires_ || !written[w])
      throw ParameterError("wire " + std::to_string(w) + " read before written");
  };
  for (const auto& in : inputs_)
    for (Wire w : in.wires) write(w);
  for (const auto& g : gates_) {
    switch (g.kind) {
      case GateKind::kXor:
      case GateKind::kAnd:
        read(g.a);
        read(g.b);
        break;
      case GateKind::kNot: read(g.a); break;
      case GateKind::kConst:
        if (g.a > 1) throw ParameterError("constant gate value must be 0 or 1");
        break;
    }
    write(g.out);
  }
  for (const auto& out : outputs_)
    for (Wire w : out.wires) read(w);
}

std::string Circuit::serialize() const {
  std::ostringstream os;
  os << "ppod-circuit 1\nname " << name_ << "\nwires " << num_wires_ << "\n";
  for (const auto& in : inputs_) {
    os << "input " << in.name << ' ' << to_string(in.owner) << ' ' << in.wires.size();
    for (Wire w : in.wires) os << ' ' << w;
    os << '\n';
  }
  for (const auto& out : outputs_) {
    os << "output " << out.name << ' ' << to_string(out.destination) << ' ' << out.wires.size();
    for (Wire w : out.wires) os << ' ' << w;
    os << '\n';
  }
  for (const auto& g : gates_) {
    switch (g.kind) {
      case GateKind::kXor: os << "XOR " << g.a << ' ' << g.b << ' ' << g.out << '\n'; break;
      case GateKind::kAnd: os << "AND " << g.a << ' ' << g.b << ' ' << g.out << '\n'; break;
      case GateKind::kNot: os << "NOT " << g.a << ' ' << g.out << '\n'; break;
      case GateKind::kConst: os << "CONST " << g.a << ' ' << g.out << '\n'; break;
    }
  }
  os << "end\n";
  return os.str();
}

Circuit Circuit::parse(const std::string& text) {
  std::istringstream is(text);
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "ppod-circuit" || version != 1)
    throw InputError("not a ppod circuit (bad header)");
  std::string name;
  std::uint32_t wires = 0;
  std::vector<Gate> gates;
  std::vector<InputBundle> inputs;
  std::vector<OutputBundle> outputs;
  auto read_word = [&](std::size_t width) {
    Word w(width);
    for (auto& x : w)
      if (!(is >> x)) throw InputError("truncated wire list");
    return w;
  };
  while (is >> word) {
    if (word == "end") {
      Circuit c(name, wires, std::move(gates), std::move(inputs), std::move(outputs));
      c.validate();
      return c;
    }
    if (word == "name") {
      is >> name;
    } else if (word == "wires") {
      is >> wires;
    } else if (word == "input") {
      std::string n, owner;
      std::size_t width = 0;
      is >> n >> owner >> width;
      InputOwner o;
      if (owner == "garbler") o = InputOwner::kGarbler;
      else if (owner == "evaluator") o = InputOwner::kEvaluator;
      else throw InputError("unknown input owner '" + owner + "'");
      inputs.push_back({n, o, read_word(width)});
    } else if (word == "output") {
      std::string n, dest;
      std::size_t width = 0;
      is >> n >> dest >> width;
      Destination d;
      if (dest == "garbler") d = Destination::kGarbler;
      else if (dest == "evaluator") d = Destination::kEvaluator;
      else if (dest == "both") d = Destination::kBoth;
      else if (dest == "reshare") d = Destination::kReshare;
      else throw InputError("unknown output destination '" + dest + "'");
      outputs.push_back({n, d, read_word(width)});
    } else if (word == "XOR" || word == "AND") {
      Gate g{word == "XOR" ? GateKind::kXor : GateKind::kAnd, 0, 0, 0};
      is >> g.a >> g.b >> g.out;
      gates.push_back(g);
    } else if (word == "NOT") {
      Gate g{GateKind::kNot, 0, 0, 0};
      is >> g.a >> g.out;
      gates.push_back(g);
    } else if (word == "CONST") {
      Gate g{GateKind::kConst, 0, 0, 0};
      is >> g.a >> g.out;
      gates.push_back(g);
    } else {
      throw InputError("unknown circuit directive '" + word + "'");
    }
    if (!is) throw InputError("malformed circuit line near '" + word + "'");
  }
  throw InputError("circuit text missing 'end'");
}

std::map<std::string, BitVec> Circuit::evaluate(const std::map<std::string, BitVec>& inputs) const {
  std::vector<std::uint8_t> v(num_wires_, 0);
  for (const auto& in : inputs_) {
    auto it = inputs.find(in.name);
    if (it == inputs.end()) throw ParameterError("missing input bundle '" + in.name + "'");
    if (it->second.size() != in.wires.size())
      throw ParameterError("input bundle '" + in.name + "' has wrong width");
    for (std::size_t i = 0; i < in.wires.size(); ++i) v[in.wires[i]] = it->second[i] & 1u;
  }
  for (const auto& g : gates_) {
    switch (g.kind) {
      case GateKind::kXor: v[g.out] = v[g.a] ^ v[g.b]; break;
      case GateKind::kAnd: v[g.out] = v[g.a] & v[g.b]; break;
      case GateKind::kNot: v[g.out] = v[g.a] ^ 1u; break;
      case GateKind::kConst: v[g.out] = static_cast<std::uint8_t>(g.a); break;
    }
  }
  std::map<std::string, BitVec> out;
  for (const auto& o : outputs_) {
    BitVec bits(o.wires.size());
    for (std::size_t i = 0; i < o.wires.size(); ++i) bits[i] = v[o.wires[i]];
    out[o.name] = std::move(bits);
  }
  return out;
}

CircuitBuilder::CircuitBuilder(std::string name) : name_(std::move(name)) {
  gates_.push_back({GateKind::kConst, 0, 0, kZero});
  gates_.push_back({GateKind::kConst, 1, 0, kOne});
}

Wire CircuitBuilder::fresh() { return next_wire_++; }

std::optional<bool> CircuitBuilder::known(Wire w) const {
  if (w == kZero) return false;
  if (w == kOne) return true;
  return std::nullopt;
}

Word CircuitBuilder::input(const std::string& name, InputOwner owner, std::size_t width) {
  for (const auto& in : inputs_)
    if (in.name == name) throw ParameterError("duplicate input bundle '" + name + "'");
  Word w(width);
  for (auto& x : w) x = fresh();
  inputs_.push_back({name, owner, w});
  return w;
}

void CircuitBuilder::output(const std::string& name, Destination destination, const Word& wires) {
  for (const auto& o : outputs_)
    if (o.name == name) throw ParameterError("duplicate output bundle '" + name + "'");
  outputs_.push_back({name, destination, wires});
}

Word CircuitBuilder::constant_word(std::uint64_t value, std::size_t width) const {
  Word w(width);
  for (std::size_t i = 0; i < width; ++i) w[i] = constant(i < 64 && ((value >> i) & 1u));
  return w;
}

Wire CircuitBuilder::xor_gate(Wire a, Wire b) {
  auto ka = known(a), kb = known(b);
  if (ka && kb) return constant(*ka != *kb);
  if (a == b) return kZero;
  if (ka) return *ka ? not_gate(b) : b;
  if (kb) return *kb ? not_gate(a) : a;
  Wire o = fresh();
  gates_.push_back({GateKind::kXor, a, b, o});
  return o;
}

Wire CircuitBuilder::and_gate(Wire a, Wire b) {
  auto ka = known(a), kb = known(b);
  if (ka) return *ka ? b : kZero;
  if (kb) return *kb ? a : kZero;
  if (a == b) return a;
  Wire o = fresh();
  gates_.push_back({GateKind::kAnd, a, b, o});
  return o;
}

Wire CircuitBuilder::not_gate(Wire a) {
  if (auto k = known(a)) return constant(!*k);
  Wire o = fresh();
  gates_.push_back({GateKind::kNot, a, 0, o});
  return o;
}

Wire CircuitBuilder::or_gate(Wire a, Wire b) {
  // a | b = (a ^ b) ^ (a & b)
  return xor_gate(xor_gate(a, b), and_gate(a, b));
}

Circuit CircuitBuilder::build() && {
  Circuit c(std::move(name_), next_wire_, std::move(gates_), std::move(inputs_), std::move(outputs_));
  c.validate();
  return c;
}

BitVec to_bits(std::uint64_t value, std::size_t width) {
  BitVec b(width);
  for (std::size_t i = 0; i < width; ++i) b[i] = i < 64 ? (value >> i) & 1u : 0;
  return b;
}

std::uint64_t from_bits(const BitVec& bits, std::size_t offset, std::size_t width) {
  std::uint64_t v = 0;
  if (offset > bits.size()) throw ParameterError("bit offset past end");
  width = std::min({width, std::size_t(64), bits.size() - offset});
  for (std::size_t i = 0; i < width; ++i)
    if (bits[offset + i]) v |= std::uint64_t(1) << i;
  return v;
}

BitVec pack_bits(const std::vector<std::uint64_t>& values, std::size_t width) {
  BitVec out;
  out.reserve(values.size() * width);
  for (auto v : values) {
    auto b = to_bits(v, width);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<std::uint64_t> unpack_bits(const BitVec& bits, std::size_t width) {
  if (width == 0 || bits.size() % width) throw ParameterError("bit string not a multiple of width");
  std::vector<std::uint64_t> out(bits.size() / width);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = from_bits(bits, i * width, width);
  return out;
}

}  // namespace ppod
