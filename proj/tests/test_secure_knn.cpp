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
#include <numeric>
#include <set>

#include "doctest.h"
#include "harness.hpp"
#include "ppod/conversion.hpp"
#include "ppod/errors.hpp"
#include "ppod/secure_knn.hpp"
#include "ppod/sharing.hpp"

using namespace ppod;
using ppod::testing::two_party;

namespace {

using Point = std::vector<std::uint64_t>;

std::uint64_t sqdist(const Point& a, const Point& b) {
  unsigned __int128 acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    __int128 d = static_cast<__int128>(a[i]) - static_cast<__int128>(b[i]);
    acc += static_cast<unsigned __int128>(d * d);
  }
  return static_cast<std::uint64_t>(acc);
}

// Points in [0, 2^bits) split into additive shares.
struct Dataset {
  std::vector<Point> plain;
  std::array<std::vector<Point>, 2> shares;
};

Dataset make_points(std::size_t count, std::size_t dim, unsigned bits, std::uint64_t seed) {
  Ring ring(64);
  Prg prg(seed);
  Dataset d;
  for (std::size_t i = 0; i < count; ++i) {
    Point p(dim), s0(dim), s1(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      p[j] = prg.next_u64() >> (64 - bits);
      auto [a, b] = share(p[j], ring, prg);
      s0[j] = a.value;
      s1[j] = b.value;
    }
    d.plain.push_back(p);
    d.shares[0].push_back(s0);
    d.shares[1].push_back(s1);
  }
  return d;
}

std::vector<std::span<const std::uint64_t>> spans(const std::vector<Point>& pts, std::size_t from = 0) {
  std::vector<std::span<const std::uint64_t>> out;
  for (std::size_t i = from; i < pts.size(); ++i) out.emplace_back(pts[i]);
  return out;
}

}  // namespace

TEST_CASE("secure distance equals the plaintext squared distance") {
  auto d = make_points(30, 4, 16, 41);
  std::array<std::vector<std::uint64_t>, 2> out;
  std::array<std::uint64_t, 2> triples{};
  two_party([&](PartyContext& ctx) {
    SecureKnn knn(ctx);
    const auto& own = d.shares[ctx.party()];
    out[ctx.party()] = knn.distances(own[0], spans(own, 1));
    triples[ctx.party()] = ctx.mul().triples_used();
    CHECK(knn.counters().distance_evaluations == 29);
  });
  for (std::size_t j = 1; j < 30; ++j) CHECK(out[0][j - 1] + out[1][j - 1] == sqdist(d.plain[0], d.plain[j]));
  CHECK(triples[0] == 29 * 3 * 4);
}

TEST_CASE("distance rejects mismatched dimensions") {
  CHECK_THROWS_AS(two_party([&](PartyContext& ctx) {
                    SecureKnn knn(ctx);
                    Point p(3, 0), q(2, 0);
                    knn.distances(p, {std::span<const std::uint64_t>(q)});
                  }),
                  ParameterError);
}

TEST_CASE("kNN returns the k smallest distances in shuffled order") {
  for (std::size_t k : {1u, 3u, 5u}) {
    auto d = make_points(12, 3, 10, 42 + k);
    std::vector<std::uint64_t> ids(11);
    std::iota(ids.begin(), ids.end(), 101);
    std::array<std::vector<std::uint64_t>, 2> keys, got_ids;
    std::vector<std::size_t> perm;
    std::array<std::uint64_t, 2> kd{};
    two_party([&](PartyContext& ctx) {
      SecureKnn knn(ctx);
      const auto& own = d.shares[ctx.party()];
      auto list = knn.knn(own[0], spans(own, 1), ids, k);
      for (std::size_t j = 0; j < k; ++j) keys[ctx.party()].push_back(ctx.yao().debug_open(list.key(j)));
      got_ids[ctx.party()] = knn.reveal_ids(list);
      kd[ctx.party()] = ctx.yao().debug_open(knn.kdist(list));
      if (!ctx.is_garbler()) perm = knn.last_permutation();
      CHECK(knn.counters().knn_calls == 1);
      CHECK(knn.counters().sort_shuffles == 1);
    });
    std::vector<std::uint64_t> all;
    for (std::size_t j = 1; j < 12; ++j) all.push_back(sqdist(d.plain[0], d.plain[j]));
    auto sorted = all;
    std::sort(sorted.begin(), sorted.end());
    CHECK(keys[0] == keys[1]);
    CHECK(got_ids[0] == got_ids[1]);
    auto ks = keys[0];
    std::sort(ks.begin(), ks.end());
    CHECK(ks == std::vector<std::uint64_t>(sorted.begin(), sorted.begin() + k));
    for (std::size_t j = 0; j < k; ++j) CHECK(all[got_ids[0][j] - 101] == keys[0][j]);
    CHECK(kd[0] == sorted[k - 1]);
    CHECK(is_bijection(perm));
    CHECK(perm.size() == k);
    // Undoing the evaluator's permutation gives ascending order.
    std::vector<std::uint64_t> unshuffled(k);
    for (std::size_t i = 0; i < k; ++i) unshuffled[perm[i]] = keys[0][i];
    CHECK(std::is_sorted(unshuffled.begin(), unshuffled.end()));
  }
}

TEST_CASE("kNN needs at least k points and 32-bit ids") {
  auto d = make_points(3, 2, 8, 43);
  CHECK_THROWS_AS(two_party([&](PartyContext& ctx) {
                    SecureKnn knn(ctx);
                    const auto& own = d.shares[ctx.party()];
                    knn.knn(own[0], spans(own, 1), {0, 1}, 3);
                  }),
                  ParameterError);
  CHECK_THROWS_AS(two_party([&](PartyContext& ctx) {
                    SecureKnn knn(ctx);
                    const auto& own = d.shares[ctx.party()];
                    knn.knn(own[0], spans(own, 1), {0, 1ull << 33}, 1);
                  }),
                  RangeError);
}

TEST_CASE("sort-shuffle over shared ids") {
  Ring ring(64);
  Prg prg(44);
  std::vector<std::uint64_t> dist{50, 10, 40, 20, 30, 60}, ids{7, 8, 9, 10, 11, 12};
  std::array<std::vector<std::uint64_t>, 2> ds, is;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto [a, b] = share(dist[i], ring, prg);
    ds[0].push_back(a.value), ds[1].push_back(b.value);
    std::uint64_t m = prg.next_u32();
    is[0].push_back(m), is[1].push_back((ids[i] - m) & 0xffffffff);
  }
  std::array<std::vector<std::uint64_t>, 2> out;
  two_party([&](PartyContext& ctx) {
    SecureKnn knn(ctx);
    auto list = knn.sort_shuffle_shared_ids(ds[ctx.party()], is[ctx.party()], 3);
    out[ctx.party()] = knn.reveal_ids(list);
  });
  auto got = out[0];
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::uint64_t>{8, 10, 11});
  CHECK(out[1] == out[0]);
}

TEST_CASE("randomise then derandomise restores aligned shares") {
  auto d = make_points(9, 2, 12, 45);
  std::vector<std::uint64_t> ids{3, 1, 4, 15, 9, 2, 6, 5};
  const std::size_t k = 5;
  std::array<StoredList, 2> stored;
  std::array<std::vector<std::uint64_t>, 2> opened_keys, opened_ids;
  std::array<std::vector<std::size_t>, 2> pairing;
  std::vector<std::size_t> local_order;
  two_party([&](PartyContext& ctx) {
    SecureKnn knn(ctx);
    const auto& own = d.shares[ctx.party()];
    auto list = knn.knn(own[0], spans(own, 1), ids, k);
    for (std::size_t j = 0; j < k; ++j) {
      opened_keys[ctx.party()].push_back(ctx.yao().debug_open(list.key(j)));
      opened_ids[ctx.party()].push_back(ctx.yao().debug_open(list.id(j)));
    }
    auto s = knn.randomise(list);
    if (!ctx.is_garbler()) local_order = s.local_order;
    pairing[ctx.party()] = knn.derandomise(s);
    stored[ctx.party()] = s;
  });
  CHECK(is_bijection(local_order));
  CHECK(pairing[0] == pairing[1]);
  std::set<std::uint64_t> flags;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& g = stored[0].entries[i];
    const auto& e = stored[1].entries[i];
    flags.insert(g.flag);
    CHECK(g.dist + e.dist == opened_keys[0][i]);
    CHECK(((g.id + e.id) & 0xffffffff) == opened_ids[0][i]);
    CHECK((g.flag ^ e.flag) == stored[1].magic);
    // Evaluator entry pairing[i] was randomise position local_order[pairing[i]] == i.
    CHECK(local_order[pairing[0][i]] == i);
  }
  CHECK(flags.size() == k);
}

TEST_CASE("randomise rejects bad masks") {
  auto d = make_points(4, 1, 8, 46);
  CHECK_THROWS_AS(two_party([&](PartyContext& ctx) {
                    SecureKnn knn(ctx);
                    const auto& own = d.shares[ctx.party()];
                    auto list = knn.knn(own[0], spans(own, 1), {0, 1, 2}, 2);
                    knn.randomise_with_masks(list, {1, 2}, {1, 2}, {7, 7});
                  }),
                  ParameterError);
}

TEST_CASE("outlier and inlier tests against the plaintext comparison") {
  Ring ring(64);
  Prg prg(47);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> cases{{5, 5}, {6, 5}, {4, 5}, {0, 0}, {~0ull, 1}, {1, ~0ull}};
  for (int i = 0; i < 6; ++i) cases.emplace_back(prg.next_u64() >> 4, prg.next_u64() >> 4);
  std::array<std::vector<std::uint64_t>, 2> dsh, rsh;
  for (auto [dv, rv] : cases) {
    auto [a, b] = share(dv, ring, prg);
    auto [c, e] = share(rv, ring, prg);
    dsh[0].push_back(a.value), dsh[1].push_back(b.value);
    rsh[0].push_back(c.value), rsh[1].push_back(e.value);
  }
  std::array<std::vector<int>, 2> out, in;
  two_party([&](PartyContext& ctx) {
    SecureKnn knn(ctx);
    auto dy = a2y(ctx, dsh[ctx.party()], 64);
    auto ry = a2y(ctx, rsh[ctx.party()], 64);
    for (std::size_t i = 0; i < cases.size(); ++i) {
      out[ctx.party()].push_back(knn.outlier_test(dy.slice(i * 64, 64), ry.slice(i * 64, 64)));
      in[ctx.party()].push_back(knn.inlier_test(dy.slice(i * 64, 64), ry.slice(i * 64, 64)));
    }
  });
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CHECK(out[0][i] == (cases[i].first > cases[i].second));
    CHECK(in[0][i] == (cases[i].first <= cases[i].second));
    CHECK(out[1][i] == out[0][i]);
    CHECK(in[1][i] == in[0][i]);
  }
}

TEST_CASE("permutation_from_matrix") {
  CHECK(permutation_from_matrix({0, 1, 1, 0}, 2) == std::vector<std::size_t>{1, 0});
  CHECK_THROWS_AS(permutation_from_matrix({1, 1, 0, 0}, 2), PairingError);
  CHECK_THROWS_AS(permutation_from_matrix({1, 0, 1, 0}, 2), PairingError);
  CHECK_THROWS_AS(permutation_from_matrix({0, 0, 0, 0}, 2), PairingError);
  CHECK_THROWS_AS(permutation_from_matrix({1, 0, 0}, 2), PairingError);
}

TEST_CASE("repeated SortShuffle draws different permutations") {
  auto d = make_points(11, 2, 10, 48);
  std::vector<std::uint64_t> ids(10);
  std::iota(ids.begin(), ids.end(), 0);
  std::set<std::vector<std::size_t>> perms;
  two_party([&](PartyContext& ctx) {
    SecureKnn knn(ctx);
    const auto& own = d.shares[ctx.party()];
    for (int rep = 0; rep < 6; ++rep) {
      knn.knn(own[0], spans(own, 1), ids, 6);
      if (!ctx.is_garbler()) perms.insert(knn.last_permutation());
    }
  });
  CHECK(perms.size() >= 5);
}
