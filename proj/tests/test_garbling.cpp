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

#include <algorithm>
#include <array>
#include <thread>
#include <set>

#include "doctest.h"
#include "harness.hpp"
#include "ppod/circuits.hpp"
#include "ppod/errors.hpp"
#include "ppod/garbling.hpp"
#include "ppod/ot.hpp"
#include "ppod/permutation.hpp"
#include "ppod/session.hpp"

using namespace ppod;
using ppod::testing::two_party;

namespace {

Circuit single_gate(GateKind kind) {
  CircuitBuilder cb("single");
  auto a = cb.input("a", InputOwner::kGarbler, 1);
  auto b = cb.input("b", InputOwner::kEvaluator, 1);
  Wire o = kind == GateKind::kAnd ? cb.and_gate(a[0], b[0]) : cb.xor_gate(a[0], b[0]);
  cb.output("o", Destination::kBoth, {o});
  return std::move(cb).build();
}

// Local garble + evaluate + evaluator decode of every output.
std::map<std::string, BitVec> local_run(const Circuit& c, const GarbleResult& g,
                                        const std::map<std::string, BitVec>& in) {
  std::map<std::string, std::vector<Block>> labels;
  for (const auto& bundle : c.inputs())
    labels[bundle.name] = encode_garbler_inputs(bundle_labels(bundle.wires, g.zero_labels), in.at(bundle.name),
                                                g.delta);
  auto all = evaluate(c, g.gc, labels);
  std::map<std::string, BitVec> out;
  for (const auto& o : c.outputs()) out[o.name] = decode_evaluator(c, g.gc, o.name, bundle_labels(o.wires, all));
  return out;
}

}  // namespace

TEST_CASE("XOR-only circuit has no tables") {
  Prg prg(1);
  auto c = single_gate(GateKind::kXor);
  auto g = garble(c, prg);
  CHECK(g.gc.tables.empty());
  CHECK(g.gc.table_bytes() == 0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(local_run(c, g, {{"a", {std::uint8_t(a)}}, {"b", {std::uint8_t(b)}}}).at("o")[0] == (a ^ b));
}

TEST_CASE("one AND gate: one table, truth table holds") {
  Prg prg(2);
  auto c = single_gate(GateKind::kAnd);
  auto g = garble(c, prg);
  CHECK(g.gc.tables.size() == kBlocksPerTable);
  CHECK(g.gc.table_bytes() == kTableBytes);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(local_run(c, g, {{"a", {std::uint8_t(a)}}, {"b", {std::uint8_t(b)}}}).at("o")[0] == (a & b));
}

TEST_CASE("garbling is deterministic given the seed") {
  auto c = circuits::build_comparator(8);
  Prg p1(3), p2(3);
  CHECK(garble(c, p1).gc.serialize() == garble(c, p2).gc.serialize());
}

TEST_CASE("free-XOR offset and label relation") {
  Prg prg(4);
  Block d = random_delta(prg);
  CHECK(d.lsb());
  auto c = circuits::build_adder(4);
  auto g = garble(c, d, prg);
  auto zero = bundle_labels(c.input("a").wires, g.zero_labels);
  CHECK(encode_garbler_inputs(zero, {0, 0, 0, 0}, d) == zero);
  auto ones = encode_garbler_inputs(zero, {1, 1, 1, 1}, d);
  for (std::size_t i = 0; i < 4; ++i) CHECK(ones[i] == (zero[i] ^ d));
  CHECK_THROWS_AS(encode_garbler_inputs(zero, {1}, d), ParameterError);
  CHECK_THROWS_AS(garble(c, Block{2, 0}, prg), ParameterError);
}

TEST_CASE("8-bit comparator and adder: all 65536 input pairs") {
  Prg prg(5);
  auto cmp = circuits::build_comparator(8);
  auto add = circuits::build_adder(8);
  auto gc = garble(cmp, prg), ga = garble(add, prg);
  for (std::uint64_t a = 0; a < 256; ++a) {
    for (std::uint64_t b = 0; b < 256; ++b) {
      std::map<std::string, BitVec> in{{"a", to_bits(a, 8)}, {"b", to_bits(b, 8)}};
      REQUIRE(local_run(cmp, gc, in).at("gt")[0] == (a > b));
      REQUIRE(from_bits(local_run(add, ga, in).at("sum")) == ((a + b) & 0xff));
    }
  }
}

TEST_CASE("decode: K0, K1, tampered label, access control") {
  Prg prg(6);
  CircuitBuilder cb("id");
  auto x = cb.input("x", InputOwner::kGarbler, 1);
  cb.output("to_ev", Destination::kEvaluator, x);
  cb.output("to_g", Destination::kGarbler, x);
  cb.output("kept", Destination::kReshare, x);
  auto c = std::move(cb).build();
  auto g = garble(c, prg);
  Block k0 = g.zero_labels[x[0]], k1 = k0 ^ g.delta;
  CHECK(decode_evaluator(c, g.gc, "to_ev", std::vector<Block>{k0}) == BitVec{0});
  CHECK(decode_evaluator(c, g.gc, "to_ev", std::vector<Block>{k1}) == BitVec{1});
  Block bad = k1;
  bad.hi ^= 1;
  CHECK_THROWS_AS(decode_evaluator(c, g.gc, "to_ev", std::vector<Block>{bad}), IntegrityError);
  CHECK(decode_garbler(c, "to_g", std::vector<Block>{k1}, g.zero_labels, g.delta) == BitVec{1});
  CHECK_THROWS_AS(decode_garbler(c, "to_g", std::vector<Block>{bad}, g.zero_labels, g.delta), IntegrityError);
  CHECK_THROWS_AS(decode_evaluator(c, g.gc, "to_g", std::vector<Block>{k0}), AccessError);
  CHECK_THROWS_AS(decode_garbler(c, "to_ev", std::vector<Block>{k0}, g.zero_labels, g.delta), AccessError);
  CHECK_THROWS_AS(decode_evaluator(c, g.gc, "kept", std::vector<Block>{k0}), AccessError);
  CHECK_THROWS_AS(decode_garbler(c, "kept", std::vector<Block>{k0}, g.zero_labels, g.delta), AccessError);
}

TEST_CASE("identity circuit returns the input label") {
  Prg prg(7);
  CircuitBuilder cb("id");
  auto x = cb.input("x", InputOwner::kEvaluator, 3);
  cb.output("x", Destination::kReshare, x);
  auto c = std::move(cb).build();
  auto g = garble(c, prg);
  auto in = encode_garbler_inputs(bundle_labels(x, g.zero_labels), {1, 0, 1}, g.delta);
  auto all = evaluate(c, g.gc, {{"x", in}});
  CHECK(bundle_labels(c.output("x").wires, all) == in);
}

TEST_CASE("corrupted table is detected") {
  Prg prg(8);
  auto c = circuits::build_adder(8);
  auto g = garble(c, prg);
  std::map<std::string, std::vector<Block>> labels;
  for (const auto& b : c.inputs())
    labels[b.name] = encode_garbler_inputs(bundle_labels(b.wires, g.zero_labels), to_bits(0x5a, 8), g.delta);
  CHECK_NOTHROW(evaluate(c, g.gc, labels));
  for (auto& t : g.gc.tables) t.lo ^= 0x10;
  CHECK_THROWS_AS(evaluate(c, g.gc, labels), IntegrityError);
}

TEST_CASE("garbled circuit wire format round trip and truncation") {
  Prg prg(9);
  auto c = circuits::build_comparator(16);
  GarbleOptions opt;
  opt.garbler_bits["a"] = to_bits(77, 16);
  opt.tweak_base = 500;
  auto g = garble(c, prg, opt);
  auto bytes = g.gc.serialize();
  auto back = GarbledCircuit::parse(bytes);
  CHECK(back.serialize() == bytes);
  CHECK(back.tweak_base == 500);
  CHECK(back.and_count == c.and_count());
  CHECK(back.gate_count == c.gates().size());
  CHECK(back.circuit_hash == c.hash());
  bytes.pop_back();
  CHECK_THROWS_AS(GarbledCircuit::parse(bytes), ProtocolError);
}

TEST_CASE("ideal OT selects the chosen label; real mode unsupported") {
  Prg prg(10);
  std::vector<LabelPair> pairs(2);
  for (auto& p : pairs) p = {prg.next_block(), prg.next_block()};
  auto got = ot_transfer({0, 1}, pairs, OtMode::kIdeal);
  CHECK(got[0] == pairs[0].zero);
  CHECK(got[1] == pairs[1].one);
  CHECK_THROWS_AS(ot_transfer({0, 1}, pairs, OtMode::kReal), UnsupportedMode);
  CHECK_THROWS_AS(ot_transfer({0}, pairs, OtMode::kIdeal), ParameterError);
  CHECK(parse_ot_mode("ideal-ot") == OtMode::kIdeal);
  CHECK_THROWS_AS(parse_ot_mode("quantum"), ParameterError);
}

TEST_CASE("128 OT choices decode through a pass-through circuit") {
  Prg prg(11);
  CircuitBuilder cb("pass");
  auto x = cb.input("x", InputOwner::kEvaluator, 128);
  cb.output("x", Destination::kEvaluator, x);
  auto c = std::move(cb).build();
  auto g = garble(c, prg);
  BitVec choices(128);
  for (auto& b : choices) b = prg.next_bit();
  std::vector<LabelPair> pairs;
  for (Wire w : x) pairs.push_back({g.zero_labels[w], g.zero_labels[w] ^ g.delta});
  auto labels = ot_transfer(choices, pairs, OtMode::kIdeal);
  auto all = evaluate(c, g.gc, {{"x", labels}});
  CHECK(decode_evaluator(c, g.gc, "x", bundle_labels(x, all)) == choices);
}

TEST_CASE("garbler-to-dealer OT traffic does not depend on the choices") {
  std::array<Transcript, 2> garbler_side;
  for (int run = 0; run < 2; ++run) {
    auto [g_end, d_from_g] = make_inproc_pair();
    auto [e_end, d_from_e] = make_inproc_pair();
    g_end->record_transcript(&garbler_side[run]);
    OtDealer dealer;
    Prg prg(12);
    std::vector<LabelPair> pairs(64);
    for (auto& p : pairs) p = {prg.next_block(), prg.next_block()};
    OtSender(*g_end, OtMode::kIdeal).send(pairs);
    ot_handle_send(dealer, d_from_g->recv(Tag::kOtSend));
    BitVec choices(64, static_cast<std::uint8_t>(run));
    OtReceiver receiver(*e_end, OtMode::kIdeal);
    std::thread t([&] { ot_handle_choose(dealer, *d_from_e, d_from_e->recv(Tag::kOtChoose)); });
    auto got = receiver.receive(choices);
    t.join();
    CHECK(got[5] == (run ? pairs[5].one : pairs[5].zero));
  }
  CHECK(garbler_side[0].frames == garbler_side[1].frames);
}

TEST_CASE("two-party session: 16-bit adder on random pairs") {
  Prg data(13);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> cases(50);
  for (auto& [a, b] : cases) a = data.next_u64() & 0xffff, b = data.next_u64() & 0xffff;
  std::array<std::vector<std::uint64_t>, 2> sums;
  auto c = circuits::build_adder(16);
  two_party([&](PartyContext& ctx) {
    for (auto [a, b] : cases) {
      auto in = ctx.is_garbler() ? std::map<std::string, GcInput>{{"a", GcInput::plain(to_bits(a, 16))}}
                                 : std::map<std::string, GcInput>{{"b", GcInput::plain(to_bits(b, 16))}};
      sums[ctx.party()].push_back(from_bits(ctx.yao().run(c, in).bits.at("sum")));
    }
  });
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CHECK(sums[0][i] == ((cases[i].first + cases[i].second) & 0xffff));
    CHECK(sums[1][i] == sums[0][i]);
  }
}

TEST_CASE("two-party session: Batcher sort of 8 keys matches std::sort") {
  // Sort-shuffle with k = W and the evaluator's permutation undone.
  Prg data(14);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<std::uint64_t> keys(8), ids(8);
    for (std::size_t i = 0; i < 8; ++i) keys[i] = data.next_u64() & 0xff, ids[i] = i;
    auto c = circuits::build_sort_shuffle({8, 8, 8, 32});
    std::array<std::vector<std::uint64_t>, 2> got;
    two_party([&](PartyContext& ctx) {
      std::map<std::string, GcInput> in;
      if (ctx.is_garbler()) {
        in["keys"] = GcInput::plain(pack_bits(keys, 8));
        in["ids"] = GcInput::plain(pack_bits(ids, 32));
      } else {
        in["control"] = GcInput::plain(BitVec(waksman_switch_count(8), 0));
      }
      auto out = ctx.yao().run(c, in);
      auto k = out.shared.at("keys");
      for (std::size_t j = 0; j < 8; ++j) got[ctx.party()].push_back(ctx.yao().debug_open(k.slice(j * 8, 8)));
    });
    auto want = keys;
    std::sort(want.begin(), want.end());
    CHECK(got[0] == want);
    CHECK(got[1] == want);
  }
}

TEST_CASE("free-XOR accounting: table bytes = AND count x table size") {
  std::array<YaoStats, 2> stats;
  std::array<std::uint64_t, 2> gc_bytes{};
  auto cmp = circuits::build_comparator(32);
  CircuitBuilder cb("xor-only");
  auto a = cb.input("a", InputOwner::kGarbler, 32);
  auto b = cb.input("b", InputOwner::kGarbler, 32);
  cb.output("x", Destination::kReshare, circuits::xor_words(cb, a, b));
  auto xo = std::move(cb).build();
  std::array<std::uint64_t, 2> xor_table{};
  two_party([&](PartyContext& ctx) {
    auto in = ctx.is_garbler() ? std::map<std::string, GcInput>{{"a", GcInput::plain(BitVec(32, 1))}}
                               : std::map<std::string, GcInput>{{"b", GcInput::plain(BitVec(32, 0))}};
    ctx.yao().run(cmp, in);
    stats[ctx.party()] = ctx.yao().stats();
    gc_bytes[ctx.party()] = ctx.peer_metrics().total.bytes_sent;
    std::map<std::string, GcInput> xin;
    if (ctx.is_garbler()) xin = {{"a", GcInput::plain(BitVec(32, 1))}, {"b", GcInput::plain(BitVec(32, 0))}};
    auto before = ctx.yao().stats().table_bytes;
    ctx.yao().run(xo, xin);
    xor_table[ctx.party()] = ctx.yao().stats().table_bytes - before;
  });
  CHECK(stats[0].table_bytes == cmp.and_count() * kTableBytes);
  CHECK(stats[1].table_bytes == stats[0].table_bytes);
  CHECK(xor_table[0] == 0);
  CHECK(xor_table[1] == 0);
  CHECK(cmp.and_count() == 32);
}

TEST_CASE("evaluator holds exactly one valid label per output wire") {
  auto c = circuits::build_adder(16, Destination::kReshare);
  std::vector<Block> zero, active;
  Block delta;
  two_party([&](PartyContext& ctx) {
    auto in = ctx.is_garbler() ? std::map<std::string, GcInput>{{"a", GcInput::plain(to_bits(1234, 16))}}
                               : std::map<std::string, GcInput>{{"b", GcInput::plain(to_bits(4321, 16))}};
    auto out = ctx.yao().run(c, in).shared.at("sum");
    if (ctx.is_garbler()) {
      zero = out.labels;
      delta = ctx.yao().delta();
    } else {
      active = out.labels;
    }
  });
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 16; ++i) {
    bool is0 = active[i] == zero[i], is1 = active[i] == (zero[i] ^ delta);
    REQUIRE(is0 != is1);
    if (is1) v |= 1u << i;
  }
  CHECK(v == 1234 + 4321);
}

TEST_CASE("missing or misplaced inputs are rejected") {
  auto c = circuits::build_adder(4);
  CHECK_THROWS_AS(two_party([&](PartyContext& ctx) {
                    std::map<std::string, GcInput> in;
                    if (!ctx.is_garbler()) in["b"] = GcInput::plain(BitVec(4, 0));
                    ctx.yao().run(c, in);
                  }),
                  ParameterError);
  CHECK_THROWS_AS(two_party([&](PartyContext& ctx) {
                    std::map<std::string, GcInput> in{{"b", GcInput::plain(BitVec(4, 0))}};
                    if (ctx.is_garbler()) in["a"] = GcInput::plain(BitVec(4, 0));
                    ctx.yao().run(c, in);
                  }),
                  ParameterError);
}
