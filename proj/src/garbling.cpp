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

#include "ppod/garbling.hpp"

#include <string>

#include "ppod/errors.hpp"

namespace ppod {
namespace {

constexpr std::uint64_t kDigestTweak = 0x6465'636f'6465'7277ull;

inline Block hash_input(const Block& a, const Block& b, std::uint64_t tweak) {
  return gf_double(a) ^ gf_double(gf_double(b)) ^ Block{tweak, 0};
}

inline Block select(bool bit, const Block& delta) { return bit ? delta : kZeroBlock; }

bool has_evaluator_decode(Destination d) { return d == Destination::kEvaluator || d == Destination::kBoth; }

void put_block(ByteWriter& w, const Block& b) {
  w.u64(b.lo);
  w.u64(b.hi);
}

Block get_block(ByteReader& r) {
  Block b;
  b.lo = r.u64();
  b.hi = r.u64();
  return b;
}

void put_blocks(ByteWriter& w, const std::vector<Block>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& b : v) put_block(w, b);
}

std::vector<Block> get_blocks(ByteReader& r) {
  std::uint32_t n = r.u32();
  if (n > r.remaining() / sizeof(Block)) throw ProtocolError("garbled circuit: label count exceeds payload");
  std::vector<Block> v(n);
  for (auto& b : v) b = get_block(r);
  return v;
}

}  // namespace

Block random_delta(Prg& prg) {
  Block d = prg.next_block();
  d.lo |= 1;
  return d;
}

std::uint64_t label_digest(const Block& label, std::uint32_t wire) {
  return FixedKeyHash::instance().hash(label ^ Block{wire, kDigestTweak}).lo;
}

Bytes GarbledCircuit::serialize() const {
  ByteWriter w;
  w.reserve(64 + tables.size() * sizeof(Block) + decode.size() * 16);
  w.raw(circuit_hash.data(), circuit_hash.size());
  w.u64(gate_count);
  w.u64(and_count);
  w.u64(tweak_base);
  w.u64(tables.size());
  for (const auto& b : tables) put_block(w, b);
  put_blocks(w, const_labels);
  w.u32(static_cast<std::uint32_t>(garbler_inputs.size()));
  for (const auto& [index, labels] : garbler_inputs) {
    w.u32(index);
    put_blocks(w, labels);
  }
  w.u32(static_cast<std::uint32_t>(decode.size()));
  for (const auto& d : decode) {
    w.u64(d.zero);
    w.u64(d.one);
  }
  return w.take();
}

GarbledCircuit GarbledCircuit::parse(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  GarbledCircuit gc;
  r.raw_into(gc.circuit_hash.data(), gc.circuit_hash.size());
  gc.gate_count = r.u64();
  gc.and_count = r.u64();
  gc.tweak_base = r.u64();
  std::uint64_t nt = r.u64();
  if (nt != gc.and_count * kBlocksPerTable || nt > r.remaining() / sizeof(Block))
    throw ProtocolError("garbled circuit: table size does not match AND count");
  gc.tables.resize(nt);
  for (auto& b : gc.tables) b = get_block(r);
  gc.const_labels = get_blocks(r);
  std::uint32_t ng = r.u32();
  for (std::uint32_t i = 0; i < ng; ++i) {
    std::uint32_t index = r.u32();
    gc.garbler_inputs.emplace_back(index, get_blocks(r));
  }
  std::uint32_t nd = r.u32();
  if (nd > r.remaining() / 16) throw ProtocolError("garbled circuit: decode map exceeds payload");
  gc.decode.resize(nd);
  for (auto& d : gc.decode) {
    d.zero = r.u64();
    d.one = r.u64();
  }
  r.expect_done();
  return gc;
}

GarbleResult garble(const Circuit& circuit, const Block& delta, Prg& prg, const GarbleOptions& options) {
  if (!delta.lsb()) throw ParameterError("free-XOR offset must have its low bit set");
  const auto& hash = FixedKeyHash::instance();
  GarbleResult res;
  res.delta = delta;
  auto& gc = res.gc;
  auto& zero = res.zero_labels;
  zero.assign(circuit.num_wires(), kZeroBlock);
  gc.circuit_hash = circuit.hash();
  gc.gate_count = circuit.gates().size();
  gc.and_count = circuit.and_count();
  gc.tweak_base = options.tweak_base;
  gc.tables.resize(gc.and_count * kBlocksPerTable);

  for (const auto& [name, labels] : options.fixed_inputs) {
    const auto& in = circuit.input(name);
    if (labels.size() != in.wires.size())
      throw ParameterError("Yao input '" + name + "' has " + std::to_string(labels.size()) + " labels, expected " +
                           std::to_string(in.wires.size()));
  }
  for (const auto& [name, bits] : options.garbler_bits) {
    (void)circuit.input(name);
    if (options.fixed_inputs.count(name)) throw ParameterError("input '" + name + "' supplied twice");
  }
  for (const auto& in : circuit.inputs()) {
    auto fixed = options.fixed_inputs.find(in.name);
    for (std::size_t i = 0; i < in.wires.size(); ++i)
      zero[in.wires[i]] = fixed != options.fixed_inputs.end() ? fixed->second[i] : prg.next_block();
  }

  std::uint64_t and_index = 0;
  Block rows[kBlocksPerTable];
  for (const auto& g : circuit.gates()) {
    switch (g.kind) {
      case GateKind::kXor:
        zero[g.out] = zero[g.a] ^ zero[g.b];
        break;
      case GateKind::kNot:
        zero[g.out] = zero[g.a] ^ delta;
        break;
      case GateKind::kConst: {
        zero[g.out] = prg.next_block();
        gc.const_labels.push_back(zero[g.out] ^ select(g.a != 0, delta));
        break;
      }
      case GateKind::kAnd: {
        const Block a0 = zero[g.a], b0 = zero[g.b];
        const Block c0 = prg.next_block();
        zero[g.out] = c0;
        const std::uint64_t t = 2 * (options.tweak_base + and_index);
        const bool pa = a0.lsb(), pb = b0.lsb();
        Block out_label[4];
        for (int va = 0; va < 2; ++va) {
          for (int vb = 0; vb < 2; ++vb) {
            const Block A = a0 ^ select(va, delta);
            const Block B = b0 ^ select(vb, delta);
            const int row = 2 * (pa ^ va) + (pb ^ vb);
            rows[row * 2] = hash_input(A, B, t);
            rows[row * 2 + 1] = hash_input(A, B, t + 1);
            out_label[row] = c0 ^ select(va & vb, delta);
          }
        }
        hash.hash_many(rows, kBlocksPerTable);
        Block* table = gc.tables.data() + and_index * kBlocksPerTable;
        for (int row = 0; row < 4; ++row) {
          table[row * 2] = rows[row * 2] ^ out_label[row];
          table[row * 2 + 1] = rows[row * 2 + 1];
        }
        ++and_index;
        break;
      }
    }
  }

  for (std::size_t i = 0; i < circuit.inputs().size(); ++i) {
    const auto& in = circuit.inputs()[i];
    auto it = options.garbler_bits.find(in.name);
    if (it == options.garbler_bits.end()) continue;
    if (it->second.size() != in.wires.size())
      throw ParameterError("garbler input '" + in.name + "' has " + std::to_string(it->second.size()) +
                           " bits, expected " + std::to_string(in.wires.size()));
    std::vector<Block> labels(in.wires.size());
    for (std::size_t j = 0; j < labels.size(); ++j) labels[j] = zero[in.wires[j]] ^ select(it->second[j], delta);
    gc.garbler_inputs.emplace_back(static_cast<std::uint32_t>(i), std::move(labels));
  }

  for (const auto& out : circuit.outputs()) {
    if (!has_evaluator_decode(out.destination)) continue;
    for (Wire w : out.wires)
      gc.decode.push_back({label_digest(zero[w], w), label_digest(zero[w] ^ delta, w)});
  }
  return res;
}

GarbleResult garble(const Circuit& circuit, Prg& prg, const GarbleOptions& options) {
  Block delta = random_delta(prg);
  return garble(circuit, delta, prg, options);
}

std::vector<Block> encode_garbler_inputs(std::span<const Block> zero, const BitVec& bits, const Block& delta) {
  if (zero.size() != bits.size())
    throw ParameterError("encode: " + std::to_string(bits.size()) + " bits for " + std::to_string(zero.size()) +
                         " labels");
  std::vector<Block> out(zero.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = zero[i] ^ select(bits[i] != 0, delta);
  return out;
}

std::vector<Block> evaluate(const Circuit& circuit, const GarbledCircuit& gc,
                            const std::map<std::string, std::vector<Block>>& inputs) {
  if (gc.circuit_hash != circuit.hash()) throw ProtocolError("garbled circuit does not match circuit '" + circuit.name() + "'");
  if (gc.and_count != circuit.and_count() || gc.tables.size() != gc.and_count * kBlocksPerTable)
    throw ProtocolError("garbled circuit table count mismatch");
  const auto& hash = FixedKeyHash::instance();
  std::vector<Block> label(circuit.num_wires());

  std::vector<const std::vector<Block>*> by_index(circuit.inputs().size(), nullptr);
  for (const auto& [index, labels] : gc.garbler_inputs) {
    if (index >= by_index.size()) throw ProtocolError("garbled circuit names an unknown input bundle");
    by_index[index] = &labels;
  }
  for (const auto& [name, labels] : inputs) by_index[circuit.input_index(name)] = &labels;
  for (std::size_t i = 0; i < circuit.inputs().size(); ++i) {
    const auto& in = circuit.inputs()[i];
    if (!by_index[i]) throw ParameterError("missing labels for input '" + in.name + "'");
    if (by_index[i]->size() != in.wires.size())
      throw ParameterError("input '" + in.name + "' has " + std::to_string(by_index[i]->size()) +
                           " labels, expected " + std::to_string(in.wires.size()));
    for (std::size_t j = 0; j < in.wires.size(); ++j) label[in.wires[j]] = (*by_index[i])[j];
  }

  std::size_t const_index = 0;
  std::uint64_t and_index = 0;
  for (const auto& g : circuit.gates()) {
    switch (g.kind) {
      case GateKind::kXor:
        label[g.out] = label[g.a] ^ label[g.b];
        break;
      case GateKind::kNot:
        label[g.out] = label[g.a];
        break;
      case GateKind::kConst:
        if (const_index >= gc.const_labels.size()) throw ProtocolError("garbled circuit is missing constant labels");
        label[g.out] = gc.const_labels[const_index++];
        break;
      case GateKind::kAnd: {
        const Block A = label[g.a], B = label[g.b];
        const std::uint64_t t = 2 * (gc.tweak_base + and_index);
        Block h[2] = {hash_input(A, B, t), hash_input(A, B, t + 1)};
        hash.hash_many(h, 2);
        const int row = 2 * A.lsb() + B.lsb();
        const Block* table = gc.tables.data() + and_index * kBlocksPerTable + row * 2;
        if (!(table[1] ^ h[1]).is_zero())
          throw IntegrityError("garbled table integrity check failed at AND gate " + std::to_string(and_index) +
                               " of '" + circuit.name() + "'");
        label[g.out] = table[0] ^ h[0];
        ++and_index;
        break;
      }
    }
  }
  return label;
}

void check_decode_access(const OutputBundle& bundle, Decoder who) {
  const auto d = bundle.destination;
  bool ok = d == Destination::kBoth ||
            (who == Decoder::kGarbler && d == Destination::kGarbler) ||
            (who == Decoder::kEvaluator && d == Destination::kEvaluator);
  if (!ok)
    throw AccessError(std::string(who == Decoder::kGarbler ? "garbler" : "evaluator") + " may not decode bundle '" +
                      bundle.name + "' (destination " + to_string(d) + ")");
}

std::vector<Block> bundle_labels(const Word& wires, std::span<const Block> all) {
  std::vector<Block> out(wires.size());
  for (std::size_t i = 0; i < wires.size(); ++i) out[i] = all[wires[i]];
  return out;
}

BitVec decode_evaluator(const Circuit& circuit, const GarbledCircuit& gc, const std::string& bundle,
                        std::span<const Block> active) {
  const auto& out = circuit.output(bundle);
  check_decode_access(out, Decoder::kEvaluator);
  if (active.size() != out.wires.size()) throw ParameterError("decode: label count mismatch for '" + bundle + "'");
  std::size_t offset = 0;
  for (const auto& o : circuit.outputs()) {
    if (&o == &out) break;
    if (has_evaluator_decode(o.destination)) offset += o.wires.size();
  }
  if (offset + out.wires.size() > gc.decode.size()) throw ProtocolError("decode map too short for '" + bundle + "'");
  BitVec bits(out.wires.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto& d = gc.decode[offset + i];
    std::uint64_t h = label_digest(active[i], out.wires[i]);
    if (h == d.zero) {
      bits[i] = 0;
    } else if (h == d.one) {
      bits[i] = 1;
    } else {
      throw IntegrityError("output label of '" + bundle + "' bit " + std::to_string(i) + " matches neither digest");
    }
  }
  return bits;
}

BitVec decode_garbler(const Circuit& circuit, const std::string& bundle, std::span<const Block> active,
                      std::span<const Block> zero_labels, const Block& delta) {
  const auto& out = circuit.output(bundle);
  check_decode_access(out, Decoder::kGarbler);
  if (active.size() != out.wires.size()) throw ParameterError("decode: label count mismatch for '" + bundle + "'");
  BitVec bits(out.wires.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const Block& k0 = zero_labels[out.wires[i]];
    if (active[i] == k0) {
      bits[i] = 0;
    } else if (active[i] == (k0 ^ delta)) {
      bits[i] = 1;
    } else {
      throw IntegrityError("returned label of '" + bundle + "' bit " + std::to_string(i) + " is not a valid label");
    }
  }
  return bits;
}

}  // namespace ppod
