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

#include "ppod/session.hpp"

#include "ppod/errors.hpp"

namespace ppod {
namespace {

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

bool to_garbler(Destination d) { return d == Destination::kGarbler || d == Destination::kBoth; }
bool to_evaluator(Destination d) { return d == Destination::kEvaluator || d == Destination::kBoth; }

void check_inputs(const Circuit& c, const std::map<std::string, GcInput>& inputs, InputOwner self) {
  for (const auto& [name, in] : inputs) {
    const auto& bundle = c.input(name);
    if (in.bits.has_value() == in.shared.has_value())
      throw ParameterError("input '" + name + "' must be either plaintext or a Yao share");
    if (in.bits && bundle.owner != self)
      throw ParameterError("input '" + name + "' is owned by the " + to_string(bundle.owner));
    std::size_t width = in.bits ? in.bits->size() : in.shared->size();
    if (width != bundle.wires.size())
      throw ParameterError("input '" + name + "' has width " + std::to_string(width) + ", circuit expects " +
                           std::to_string(bundle.wires.size()));
  }
}

}  // namespace

YaoWord YaoWord::slice(std::size_t offset, std::size_t count) const {
  if (offset + count > labels.size()) throw ParameterError("Yao word slice out of range");
  return {std::vector<Block>(labels.begin() + static_cast<std::ptrdiff_t>(offset),
                             labels.begin() + static_cast<std::ptrdiff_t>(offset + count))};
}

YaoWord YaoWord::concat(const std::vector<YaoWord>& parts) {
  YaoWord out;
  for (const auto& p : parts) out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  return out;
}

YaoSession::YaoSession(int party, Channel& peer, Channel& dealer, Prg& prg, OtMode mode)
    : party_(party), peer_(peer), prg_(prg) {
  if (party != 0 && party != 1) throw ParameterError("party must be 0 or 1");
  if (party == 0) {
    ot_sender_.emplace(dealer, mode);
    delta_ = random_delta(prg_);
  } else {
    ot_receiver_.emplace(dealer, mode);
  }
}

GcOutputs YaoSession::run(const Circuit& circuit, const std::map<std::string, GcInput>& inputs) {
  return is_garbler() ? run_garbler(circuit, inputs) : run_evaluator(circuit, inputs);
}

void YaoSession::emit(const Circuit& c, const OutputBundle& out, const BitVec& bits) {
  if (decode_hook_) decode_hook_({c.name(), out.name, party_, out.destination, bits});
}

GcOutputs YaoSession::run_garbler(const Circuit& circuit, const std::map<std::string, GcInput>& inputs) {
  check_inputs(circuit, inputs, InputOwner::kGarbler);
  GarbleOptions opt;
  opt.tweak_base = tweak_;
  std::vector<const InputBundle*> ot_bundles;
  for (const auto& bundle : circuit.inputs()) {
    auto it = inputs.find(bundle.name);
    if (it == inputs.end()) {
      if (bundle.owner == InputOwner::kGarbler) throw ParameterError("missing garbler input '" + bundle.name + "'");
      ot_bundles.push_back(&bundle);
    } else if (it->second.shared) {
      opt.fixed_inputs[bundle.name] = it->second.shared->labels;
    } else {
      opt.garbler_bits[bundle.name] = *it->second.bits;
    }
  }
  GarbleResult g = garble(circuit, delta_, prg_, opt);
  tweak_ += circuit.and_count();
  peer_.send(Tag::kGarbledCircuit, g.gc.serialize());
  stats_.circuits += 1;
  stats_.and_gates += circuit.and_count();
  stats_.table_bytes += g.gc.table_bytes();

  if (!ot_bundles.empty()) {
    std::vector<LabelPair> pairs;
    for (const auto* b : ot_bundles)
      for (Wire w : b->wires) pairs.push_back({g.zero_labels[w], g.zero_labels[w] ^ delta_});
    stats_.ot_labels += pairs.size();
    ot_sender_->send(pairs);
  }

  GcOutputs result;
  bool expect_labels = false;
  for (const auto& out : circuit.outputs()) {
    if (out.destination == Destination::kReshare) result.shared[out.name] = {bundle_labels(out.wires, g.zero_labels)};
    if (to_garbler(out.destination)) expect_labels = true;
  }
  if (expect_labels) {
    auto payload = peer_.recv(Tag::kOutputLabels);
    ByteReader r(payload);
    for (const auto& out : circuit.outputs()) {
      if (!to_garbler(out.destination)) continue;
      std::vector<Block> active(out.wires.size());
      for (auto& b : active) b = get_block(r);
      BitVec bits = decode_garbler(circuit, out.name, active, g.zero_labels, delta_);
      emit(circuit, out, bits);
      result.bits[out.name] = std::move(bits);
    }
    r.expect_done();
  }
  return result;
}

GcOutputs YaoSession::run_evaluator(const Circuit& circuit, const std::map<std::string, GcInput>& inputs) {
  check_inputs(circuit, inputs, InputOwner::kEvaluator);
  auto payload = peer_.recv(Tag::kGarbledCircuit);
  GarbledCircuit gc = GarbledCircuit::parse(payload);
  payload.clear();
  payload.shrink_to_fit();
  if (gc.circuit_hash != circuit.hash())
    throw ProtocolError("garbler sent a different circuit than '" + circuit.name() + "'");
  if (gc.tweak_base != tweak_)
    throw ProtocolError("garbled circuit tweak " + std::to_string(gc.tweak_base) + " != expected " +
                        std::to_string(tweak_));
  tweak_ += circuit.and_count();
  stats_.circuits += 1;
  stats_.and_gates += circuit.and_count();
  stats_.table_bytes += gc.table_bytes();

  std::map<std::string, std::vector<Block>> labels;
  std::vector<const InputBundle*> ot_bundles;
  BitVec choices;
  for (const auto& bundle : circuit.inputs()) {
    auto it = inputs.find(bundle.name);
    if (it == inputs.end()) {
      if (bundle.owner == InputOwner::kEvaluator)
        throw ParameterError("missing evaluator input '" + bundle.name + "'");
      continue;
    }
    if (it->second.shared) {
      labels[bundle.name] = it->second.shared->labels;
    } else {
      ot_bundles.push_back(&bundle);
      choices.insert(choices.end(), it->second.bits->begin(), it->second.bits->end());
    }
  }
  if (!ot_bundles.empty()) {
    auto received = ot_receiver_->receive(choices);
    stats_.ot_labels += received.size();
    std::size_t pos = 0;
    for (const auto* b : ot_bundles) {
      labels[b->name].assign(received.begin() + static_cast<std::ptrdiff_t>(pos),
                             received.begin() + static_cast<std::ptrdiff_t>(pos + b->wires.size()));
      pos += b->wires.size();
    }
  }

  std::vector<Block> all = evaluate(circuit, gc, labels);

  GcOutputs result;
  ByteWriter back;
  bool send_back = false;
  for (const auto& out : circuit.outputs()) {
    auto active = bundle_labels(out.wires, all);
    if (out.destination == Destination::kReshare) {
      result.shared[out.name] = {std::move(active)};
      continue;
    }
    if (to_evaluator(out.destination)) {
      BitVec bits = decode_evaluator(circuit, gc, out.name, active);
      emit(circuit, out, bits);
      result.bits[out.name] = std::move(bits);
    }
    if (to_garbler(out.destination)) {
      send_back = true;
      for (const auto& b : active) put_block(back, b);
    }
  }
  if (send_back) peer_.send(Tag::kOutputLabels, back);
  return result;
}

std::uint64_t YaoSession::debug_open(const YaoWord& word) {
  if (word.size() > 64) throw ParameterError("debug_open supports at most 64 bits");
  if (is_garbler()) {
    ByteWriter w;
    for (const auto& b : word.labels) put_block(w, b);
    put_block(w, delta_);
    peer_.send(Tag::kEcho, w);
    auto reply = peer_.recv(Tag::kEcho);
    ByteReader r(reply);
    std::uint64_t v = r.u64();
    r.expect_done();
    return v;
  }
  auto payload = peer_.recv(Tag::kEcho);
  ByteReader r(payload);
  std::uint64_t v = 0;
  std::vector<Block> zero(word.size());
  for (auto& b : zero) b = get_block(r);
  Block delta = get_block(r);
  r.expect_done();
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word.labels[i] == zero[i]) continue;
    if (word.labels[i] == (zero[i] ^ delta)) {
      v |= std::uint64_t(1) << i;
    } else {
      throw IntegrityError("debug_open: label is not valid for this wire");
    }
  }
  ByteWriter w;
  w.u64(v);
  peer_.send(Tag::kEcho, w);
  return v;
}

}  // namespace ppod
