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

#include <set>
#include <string>

#include "doctest.h"
#include "ppod/crypto.hpp"

using namespace ppod;

TEST_CASE("AES-128 matches the FIPS-197 test vector") {
  // Key 000102..0f, plaintext 00112233..ff.
  Block key{0x0706050403020100ull, 0x0f0e0d0c0b0a0908ull};
  Block pt{0x7766554433221100ull, 0xffeeddccbbaa9988ull};
  Block ct = Aes128(key).encrypt(pt);
  CHECK(ct.lo == 0x30047b6ad8e0c469ull);
  CHECK(ct.hi == 0x5ac5b47080b7cdd8ull);
}

TEST_CASE("pipelined encryption agrees with single-block encryption") {
  Aes128 aes(Block{1, 2});
  std::vector<Block> v(19);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = Block{i, i * 7};
  auto copy = v;
  aes.encrypt_many(v.data(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == aes.encrypt(copy[i]));
}

TEST_CASE("prg is deterministic per seed and differs across seeds") {
  Prg a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    auto x = a.next_u64();
    CHECK(x == b.next_u64());
    (void)c;
  }
  CHECK(Prg(42).next_u64() != Prg(43).next_u64());
  CHECK(Prg::derive_seed(1, "a") != Prg::derive_seed(1, "b"));
  CHECK(Prg::derive_seed(1, "a", 0) != Prg::derive_seed(1, "a", 1));
}

TEST_CASE("prg uniform stays in range and covers it") {
  Prg p(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    auto v = p.uniform(10);
    REQUIRE(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("sha256 of abc") {
  const std::string s = "abc";
  auto d = sha256({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  CHECK(d[0] == 0xba);
  CHECK(d[1] == 0x78);
  CHECK(d[31] == 0xad);
}

TEST_CASE("gf_double is multiplication by x") {
  CHECK(gf_double(Block{1, 0}) == Block{2, 0});
  CHECK(gf_double(Block{0x8000000000000000ull, 0}) == Block{0, 1});
  CHECK(gf_double(Block{0, 0x8000000000000000ull}) == Block{0x87, 0});
}
