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

#include "doctest.h"
#include "ppod/circuit.hpp"
#include "ppod/errors.hpp"

using namespace ppod;

TEST_CASE("constant folding removes gates on known wires") {
  CircuitBuilder cb("fold");
  auto x = cb.input("x", InputOwner::kGarbler, 1);
  CHECK(cb.and_gate(x[0], CircuitBuilder::kZero) == CircuitBuilder::kZero);
  CHECK(cb.and_gate(x[0], CircuitBuilder::kOne) == x[0]);
  CHECK(cb.xor_gate(x[0], CircuitBuilder::kZero) == x[0]);
  CHECK(cb.xor_gate(x[0], x[0]) == CircuitBuilder::kZero);
  CHECK(cb.and_gate(x[0], x[0]) == x[0]);
  CHECK(cb.not_gate(CircuitBuilder::kOne) == CircuitBuilder::kZero);
  cb.output("y", Destination::kBoth, {cb.xor_gate(x[0], CircuitBuilder::kOne)});
  auto c = std::move(cb).build();
  CHECK(c.counts().and_gates == 0);
  CHECK(c.counts().not_gates == 1);
  CHECK(c.counts().const_gates == 2);
  CHECK(c.evaluate({{"x", {1}}}).at("y") == BitVec{0});
}

TEST_CASE("duplicate bundle names are rejected") {
  CircuitBuilder cb("dup");
  cb.input("a", InputOwner::kGarbler, 1);
  CHECK_THROWS_AS(cb.input("a", InputOwner::kEvaluator, 1), ParameterError);
  cb.output("o", Destination::kBoth, {0});
  CHECK_THROWS_AS(cb.output("o", Destination::kBoth, {0}), ParameterError);
}

TEST_CASE("validation catches double writes and reads before writes") {
  std::vector<Gate> twice = {{GateKind::kConst, 0, 0, 0}, {GateKind::kConst, 1, 0, 0}};
  CHECK_THROWS_AS(Circuit("bad", 1, twice, {}, {}).validate(), ParameterError);
  std::vector<Gate> early = {{GateKind::kXor, 1, 2, 0}, {GateKind::kConst, 0, 0, 1}, {GateKind::kConst, 0, 0, 2}};
  CHECK_THROWS_AS(Circuit("bad", 3, early, {}, {}).validate(), ParameterError);
}

TEST_CASE("serialize and parse round trip") {
  CircuitBuilder cb("rt");
  auto a = cb.input("a", InputOwner::kGarbler, 3);
  auto b = cb.input("b", InputOwner::kEvaluator, 3);
  Word o;
  for (int i = 0; i < 3; ++i) o.push_back(cb.or_gate(cb.and_gate(a[i], b[i]), cb.not_gate(a[i])));
  cb.output("o", Destination::kReshare, o);
  auto c = std::move(cb).build();
  auto text = c.serialize();
  auto back = Circuit::parse(text);
  CHECK(back.serialize() == text);
  CHECK(back.hash() == c.hash());
  CHECK(back.counts().to_string() == c.counts().to_string());
  CHECK(back.output("o").destination == Destination::kReshare);
  CHECK_THROWS_AS(Circuit::parse("nonsense"), InputError);
  CHECK_THROWS_AS(Circuit::parse(text.substr(0, text.size() - 4)), InputError);
}

TEST_CASE("gate count report format") {
  GateCounts g{3, 2, 1, 2};
  CHECK(g.to_string() == "and=2 xor=3 not=1 const=2 total=8");
}

TEST_CASE("bit packing") {
  CHECK(to_bits(5, 4) == BitVec{1, 0, 1, 0});
  CHECK(from_bits({1, 0, 1, 0}) == 5);
  auto packed = pack_bits({1, 2, 3}, 2);
  CHECK(packed == BitVec{1, 0, 0, 1, 1, 1});
  CHECK(unpack_bits(packed, 2) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK_THROWS_AS(unpack_bits(packed, 4), ParameterError);
}

TEST_CASE("plaintext evaluation rejects missing or misfit inputs") {
  CircuitBuilder cb("id");
  auto a = cb.input("a", InputOwner::kGarbler, 2);
  cb.output("a", Destination::kBoth, a);
  auto c = std::move(cb).build();
  CHECK_THROWS_AS(c.evaluate({}), ParameterError);
  CHECK_THROWS_AS(c.evaluate({{"a", {1}}}), ParameterError);
  CHECK(c.evaluate({{"a", {1, 0}}}).at("a") == BitVec{1, 0});
}
