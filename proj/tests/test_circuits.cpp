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
#include <numeric>

#include "doctest.h"
#include "ppod/circuits.hpp"
#include "ppod/crypto.hpp"
#include "ppod/errors.hpp"
#include "ppod/permutation.hpp"

using namespace ppod;
using namespace ppod::circuits;

namespace {

std::uint64_t mask(std::size_t w) { return w >= 64 ? ~0ull : (1ull << w) - 1; }

std::uint64_t eval1(const Circuit& c, const std::string& out, std::map<std::string, BitVec> in) {
  return from_bits(c.evaluate(in).at(out));
}

}  // namespace

TEST_CASE("word gadgets against native arithmetic") {
  Prg prg(21);
  for (std::size_t w : {1u, 7u, 32u, 64u}) {
    auto add = build_adder(w), sub = build_subtractor(w), gt = build_comparator(w);
    for (int i = 0; i < 300; ++i) {
      std::uint64_t a = prg.next_u64() & mask(w), b = prg.next_u64() & mask(w);
      if (i % 10 == 0) b = a;
      std::map<std::string, BitVec> in{{"a", to_bits(a, w)}, {"b", to_bits(b, w)}};
      REQUIRE(eval1(add, "sum", in) == ((a + b) & mask(w)));
      REQUIRE(eval1(sub, "diff", in) == ((a - b) & mask(w)));
      REQUIRE(eval1(gt, "gt", in) == (a > b));
    }
  }
}

TEST_CASE("adder and comparator AND counts are linear in width") {
  CHECK(build_adder(64).and_count() <= 64);
  CHECK(build_comparator(64).and_count() == 64);
  CHECK(build_subtractor(16).and_count() <= 16);
}

TEST_CASE("outlier and inlier tests are complementary") {
  Prg prg(22);
  auto out = build_outlier_test(64), in = build_inlier_test(64);
  for (int i = 0; i < 500; ++i) {
    std::uint64_t d = prg.next_u64() >> (i % 60), r = prg.next_u64() >> (i % 61);
    if (i % 7 == 0) r = d;
    std::map<std::string, BitVec> x{{"distance", to_bits(d, 64)}, {"radius", to_bits(r, 64)}};
    REQUIRE(eval1(out, "outlier", x) == (d > r));
    REQUIRE(eval1(in, "inlier", x) == (d <= r));
  }
  CHECK(out.output("outlier").destination == Destination::kBoth);
}

TEST_CASE("or-reduce, max, reveal") {
  Prg prg(23);
  auto orr = build_or_reduce(9);
  CHECK(eval1(orr, "any", {{"bits", BitVec(9, 0)}}) == 0);
  for (std::size_t i = 0; i < 9; ++i) {
    BitVec b(9, 0);
    b[i] = 1;
    CHECK(eval1(orr, "any", {{"bits", b}}) == 1);
  }
  for (std::size_t k : {1u, 2u, 5u, 8u}) {
    auto mx = build_max(k, 64);
    CHECK(mx.output("max").destination == Destination::kReshare);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<std::uint64_t> v(k);
      for (auto& x : v) x = prg.next_u64() >> (rep % 3) * 20;
      REQUIRE(eval1(mx, "max", {{"values", pack_bits(v, 64)}}) == *std::max_element(v.begin(), v.end()));
    }
  }
  auto rv = build_reveal("t", 32);
  CHECK(eval1(rv, "value", {{"value", to_bits(0xdeadbeef, 32)}}) == 0xdeadbeef);
  CHECK(rv.and_count() == 0);
}

TEST_CASE("query assertion is OR of <= epsilon") {
  Prg prg(24);
  auto qa = build_query_assertion(5, 64);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<std::uint64_t> d(5);
    for (auto& x : d) x = prg.next_u64() & 0xffff;
    std::uint64_t eps = prg.next_u64() & 0xffff;
    if (rep % 5 == 0) eps = d[rep % 5];
    bool want = std::any_of(d.begin(), d.end(), [&](auto x) { return x <= eps; });
    REQUIRE(eval1(qa, "assertion", {{"distances", pack_bits(d, 64)}, {"epsilon", to_bits(eps, 64)}}) == want);
  }
}

TEST_CASE("batcher_pairs sorts every 0/1 input of size 8 and 16") {
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    auto pairs = batcher_pairs(n);
    for (std::uint64_t m = 0; m < (1ull << n); ++m) {
      std::vector<int> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = (m >> i) & 1;
      for (auto [i, j] : pairs)
        if (v[i] > v[j]) std::swap(v[i], v[j]);
      REQUIRE(std::is_sorted(v.begin(), v.end()));
    }
  }
  CHECK(batcher_pairs(64).size() == 543);
  CHECK_THROWS_AS(batcher_pairs(6), ParameterError);
  CHECK(next_power_of_two(40) == 64);
  CHECK(next_power_of_two(64) == 64);
  CHECK(next_power_of_two(1) == 1);
}

TEST_CASE("sort-shuffle on W in {8,16,32,64}, k = 1..8: k smallest, permuted") {
  Prg prg(25);
  for (std::size_t w : {8u, 16u, 32u, 64u}) {
    for (std::size_t k = 1; k <= 8; ++k) {
      auto c = build_sort_shuffle({w, k, 64, 32});
      std::vector<std::uint64_t> keys(w), ids(w);
      for (std::size_t i = 0; i < w; ++i) keys[i] = prg.next_u64() >> 40, ids[i] = 1000 + i;
      Block key = prg.next_block();
      auto spec = derive_permutation(key, k);
      auto out = c.evaluate({{"keys", pack_bits(keys, 64)}, {"ids", pack_bits(ids, 32)},
                             {"control", BitVec(spec.control.begin(), spec.control.end())}});
      auto ok = unpack_bits(out.at("keys"), 64), oi = unpack_bits(out.at("ids"), 32);
      REQUIRE(ok.size() == k);
      // Undo the shuffle: out[i] = sorted[perm[i]].
      std::vector<std::uint64_t> sk(k), si(k);
      for (std::size_t i = 0; i < k; ++i) sk[spec.perm[i]] = ok[i], si[spec.perm[i]] = oi[i];
      std::vector<std::size_t> order(w);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
      for (std::size_t i = 0; i < k; ++i) {
        REQUIRE(sk[i] == keys[order[i]]);
        REQUIRE(keys[si[i] - 1000] == sk[i]);
      }
    }
  }
}

TEST_CASE("sort-shuffle with non power-of-two W uses sentinels") {
  auto c = build_sort_shuffle({5, 3, 16, 32});
  std::vector<std::uint64_t> keys{9, 3, 7, 1, 5}, ids{0, 1, 2, 3, 4};
  auto out = c.evaluate({{"keys", pack_bits(keys, 16)}, {"ids", pack_bits(ids, 32)},
                         {"control", BitVec(waksman_switch_count(3), 0)}});
  CHECK(unpack_bits(out.at("keys"), 16) == std::vector<std::uint64_t>{1, 3, 5});
  CHECK(unpack_bits(out.at("ids"), 32) == std::vector<std::uint64_t>{3, 1, 4});
  CHECK_THROWS_AS(build_sort_shuffle({4, 5, 16, 32}), ParameterError);
  CHECK_THROWS_AS(build_sort_shuffle({4, 0, 16, 32}), ParameterError);
}

TEST_CASE("sort-shuffle cost is monotone in W and matches the built circuit") {
  std::size_t prev = 0;
  for (std::size_t w : {8u, 16u, 20u, 32u, 40u, 64u}) {
    SortShuffleShape s{w, 4, 64, 32};
    auto cost = sort_shuffle_cost(s);
    CHECK(cost.and_gates == build_sort_shuffle(s).and_count());
    CHECK(cost.and_gates >= prev);
    prev = cost.and_gates;
  }
}

TEST_CASE("randomise and derandomise circuits") {
  Prg prg(26);
  const std::size_t k = 4;
  auto rc = build_randomise({k, 64, 32, 32});
  std::vector<std::uint64_t> keys(k), ids(k), r(k), s(k), fm(k);
  for (std::size_t i = 0; i < k; ++i) {
    keys[i] = prg.next_u64();
    ids[i] = prg.next_u64() & 0xffffffff;
    r[i] = prg.next_u64();
    s[i] = prg.next_u64() & 0xffffffff;
    fm[i] = 100 + i;
  }
  std::uint64_t magic = 0xabcdef12;
  auto out = rc.evaluate({{"keys", pack_bits(keys, 64)},
                          {"ids", pack_bits(ids, 32)},
                          {"dist_masks", pack_bits(r, 64)},
                          {"id_masks", pack_bits(s, 32)},
                          {"flag_masks", pack_bits(fm, 32)},
                          {"magic", to_bits(magic, 32)}});
  auto ds = unpack_bits(out.at("dist_shares"), 64), is = unpack_bits(out.at("id_shares"), 32),
       fl = unpack_bits(out.at("flags"), 32);
  for (std::size_t i = 0; i < k; ++i) {
    CHECK(ds[i] == keys[i] - r[i]);
    CHECK(is[i] == ((ids[i] - s[i]) & 0xffffffff));
    CHECK(fl[i] == (magic ^ fm[i]));
  }
  for (const auto& o : rc.outputs()) CHECK(o.destination == Destination::kEvaluator);

  // Shuffle the flags and check the match matrix recovers the permutation.
  std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<std::uint64_t> shuffled(k);
  for (std::size_t j = 0; j < k; ++j) shuffled[j] = fl[perm[j]];
  auto dc = build_derandomise(k, 32);
  auto m = dc.evaluate({{"flag_masks", pack_bits(fm, 32)}, {"flags", pack_bits(shuffled, 32)},
                        {"magic", to_bits(magic, 32)}}).at("match");
  REQUIRE(m.size() == k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) CHECK(m[i * k + j] == (perm[j] == i));
}
