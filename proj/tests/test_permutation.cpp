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
#include "ppod/permutation.hpp"

using namespace ppod;

namespace {

std::vector<std::size_t> apply_plain(const std::vector<std::uint8_t>& bits, std::size_t n) {
  std::vector<std::size_t> items(n);
  std::iota(items.begin(), items.end(), 0);
  std::size_t cursor = 0;
  waksman_apply(items, bits, cursor, [](std::size_t& a, std::size_t& b, std::uint8_t bit) {
    if (bit) std::swap(a, b);
  });
  REQUIRE(cursor == bits.size());
  return items;
}

}  // namespace

TEST_CASE("Waksman switch counts") {
  CHECK(waksman_switch_count(1) == 0);
  CHECK(waksman_switch_count(2) == 1);
  CHECK(waksman_switch_count(3) == 3);
  CHECK(waksman_switch_count(4) == 5);
  CHECK(waksman_switch_count(8) == 17);
}

TEST_CASE("Waksman routing realises every permutation up to n=7") {
  for (std::size_t n = 1; n <= 7; ++n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      auto bits = waksman_route(perm);
      REQUIRE(bits.size() == waksman_switch_count(n));
      REQUIRE(apply_plain(bits, n) == perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("Waksman routing on random permutations up to n=64") {
  Prg prg(8);
  for (std::size_t n = 8; n <= 64; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), prg);
      REQUIRE(apply_plain(waksman_route(perm), n) == perm);
    }
  }
}

TEST_CASE("Feistel PRP is a bijection with a matching inverse") {
  for (std::uint64_t n : {1ull, 2ull, 7ull, 8ull, 100ull, 257ull, 1000ull}) {
    FeistelPrp prp(Block{n, 99}, n);
    std::vector<int> hit(n, 0);
    for (std::uint64_t x = 0; x < n; ++x) {
      auto y = prp.permute(x);
      REQUIRE(y < n);
      ++hit[y];
      REQUIRE(prp.unpermute(y) == x);
    }
    CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("derive_permutation: identity at n=1, deterministic, bijective over 1000 keys") {
  auto one = derive_permutation(Block{1, 2}, 1);
  CHECK(one.perm == std::vector<std::size_t>{0});
  CHECK(one.control.empty());
  auto a = derive_permutation(Block{5, 6}, 8), b = derive_permutation(Block{5, 6}, 8);
  CHECK(a.perm == b.perm);
  CHECK(a.control == b.control);
  Prg keys(12);
  for (int i = 0; i < 1000; ++i) {
    auto spec = derive_permutation(keys.next_block(), 8);
    REQUIRE(is_bijection(spec.perm));
    REQUIRE(apply_plain(spec.control, 8) == spec.perm);
  }
  CHECK_THROWS_AS(derive_permutation(Block{}, 0), ParameterError);
}

TEST_CASE("is_bijection") {
  CHECK(is_bijection({2, 0, 1}));
  CHECK_FALSE(is_bijection({0, 0, 1}));
  CHECK_FALSE(is_bijection({0, 3, 1}));
}
