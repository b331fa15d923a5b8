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

#include "ppod/secure_knn.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "ppod/conversion.hpp"
#include "ppod/errors.hpp"

namespace ppod {

using circuits::kFlagBits;
using circuits::kIdBits;

WorkCounters& WorkCounters::operator+=(const WorkCounters& o) {
  distance_evaluations += o.distance_evaluations;
  knn_calls += o.knn_calls;
  sort_shuffles += o.sort_shuffles;
  resorts += o.resorts;
  resort_records += o.resort_records;
  randomise_calls += o.randomise_calls;
  derandomise_calls += o.derandomise_calls;
  return *this;
}

WorkCounters WorkCounters::operator-(const WorkCounters& o) const {
  WorkCounters d;
  d.distance_evaluations = distance_evaluations - o.distance_evaluations;
  d.knn_calls = knn_calls - o.knn_calls;
  d.sort_shuffles = sort_shuffles - o.sort_shuffles;
  d.resorts = resorts - o.resorts;
  d.resort_records = resort_records - o.resort_records;
  d.randomise_calls = randomise_calls - o.randomise_calls;
  d.derandomise_calls = derandomise_calls - o.derandomise_calls;
  return d;
}

std::vector<std::size_t> permutation_from_matrix(const BitVec& bits, std::size_t n) {
  if (bits.size() != n * n) throw PairingError("pairing matrix has the wrong size");
  std::vector<std::size_t> col(n);
  std::vector<int> col_hits(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int hits = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (bits[i * n + j]) {
        ++hits;
        ++col_hits[j];
        col[i] = j;
      }
    }
    if (hits != 1)
      throw PairingError("pairing row " + std::to_string(i) + " has " + std::to_string(hits) + " matches");
  }
  for (std::size_t j = 0; j < n; ++j)
    if (col_hits[j] != 1)
      throw PairingError("pairing column " + std::to_string(j) + " has " + std::to_string(col_hits[j]) + " matches");
  return col;
}

SecureKnn::SecureKnn(PartyContext& ctx) : ctx_(ctx), key_bits_(ctx.ring().bits()) {}

std::vector<std::uint64_t> SecureKnn::distances(std::span<const std::uint64_t> p,
                                                const std::vector<std::span<const std::uint64_t>>& qs) {
  const Ring& ring = ctx_.ring();
  const std::size_t n = p.size();
  std::vector<std::uint64_t> a, b;
  a.reserve(3 * n * qs.size());
  b.reserve(3 * n * qs.size());
  for (const auto& q : qs) {
    if (q.size() != n)
      throw ParameterError("distance: dimension mismatch (" + std::to_string(n) + " vs " + std::to_string(q.size()) +
                           ")");
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(p[i]), b.push_back(p[i]);
      a.push_back(q[i]), b.push_back(q[i]);
      a.push_back(p[i]), b.push_back(q[i]);
    }
  }
  auto prod = ctx_.mul().mul(a, b);
  std::vector<std::uint64_t> out(qs.size(), 0);
  for (std::size_t j = 0; j < qs.size(); ++j) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t base = 3 * (j * n + i);
      acc = ring.add(acc, ring.add(prod[base], prod[base + 1]));
      acc = ring.sub(acc, ring.mul(2, prod[base + 2]));
    }
    out[j] = acc;
  }
  counters_.distance_evaluations += qs.size();
  return out;
}

KnnYaoList SecureKnn::knn(std::span<const std::uint64_t> p, const std::vector<std::span<const std::uint64_t>>& qs,
                          const std::vector<std::uint64_t>& ids, std::size_t k) {
  if (qs.size() < k)
    throw ParameterError("kNN needs at least k=" + std::to_string(k) + " points, got " + std::to_string(qs.size()));
  if (ids.size() != qs.size()) throw ParameterError("kNN: one id per point required");
  auto d = distances(p, qs);
  counters_.knn_calls += 1;
  return sort_shuffle_public_ids(d, ids, k);
}

KnnYaoList SecureKnn::run_sort_shuffle(const YaoWord& keys, std::size_t records, std::size_t k, const GcInput* ids) {
  circuits::SortShuffleShape shape{records, k, key_bits_, kIdBits};
  const auto& c = ctx_.circuit("sort-shuffle/" + std::to_string(records) + "/" + std::to_string(k) + "/" +
                                   std::to_string(key_bits_),
                               [&] { return circuits::build_sort_shuffle(shape); });
  std::map<std::string, GcInput> in;
  in["keys"] = GcInput::yao(keys);
  if (ids) in["ids"] = *ids;
  if (!ctx_.is_garbler()) {
    auto spec = derive_permutation(ctx_.prg().next_block(), k);
    BitVec control(spec.control.begin(), spec.control.end());
    in["control"] = GcInput::plain(std::move(control));
    last_perm_ = spec.perm;
  }
  auto out = ctx_.yao().run(c, in);
  counters_.sort_shuffles += 1;
  KnnYaoList list;
  list.k = k;
  list.key_bits = key_bits_;
  list.keys = std::move(out.shared.at("keys"));
  list.ids = std::move(out.shared.at("ids"));
  return list;
}

KnnYaoList SecureKnn::sort_shuffle_public_ids(std::span<const std::uint64_t> dist_shares,
                                              const std::vector<std::uint64_t>& ids, std::size_t k) {
  if (ids.size() != dist_shares.size()) throw ParameterError("sort-shuffle: one id per distance required");
  YaoWord keys = a2y(ctx_, dist_shares, key_bits_);
  if (ctx_.is_garbler()) {
    for (auto id : ids)
      if (id >= circuits::kInvalidId) throw RangeError("point id " + std::to_string(id) + " does not fit in 32 bits");
    GcInput in = GcInput::plain(pack_bits(ids, kIdBits));
    return run_sort_shuffle(keys, ids.size(), k, &in);
  }
  return run_sort_shuffle(keys, ids.size(), k, nullptr);
}

KnnYaoList SecureKnn::sort_shuffle_shared_ids(std::span<const std::uint64_t> dist_shares,
                                              std::span<const std::uint64_t> id_shares, std::size_t k) {
  if (id_shares.size() != dist_shares.size()) throw ParameterError("sort-shuffle: one id per distance required");
  YaoWord keys = a2y(ctx_, dist_shares, key_bits_);
  GcInput ids = GcInput::yao(a2y(ctx_, id_shares, kIdBits));
  return run_sort_shuffle(keys, dist_shares.size(), k, &ids);
}

YaoWord SecureKnn::kdist(const KnnYaoList& list) {
  if (list.k == 0) throw ParameterError("k-distance of an empty list");
  const auto& c = ctx_.circuit("max/" + std::to_string(list.k) + "/" + std::to_string(list.key_bits),
                               [&] { return circuits::build_max(list.k, list.key_bits); });
  return ctx_.yao().run(c, {{"values", GcInput::yao(list.keys)}}).shared.at("max");
}

StoredList SecureKnn::randomise(const KnnYaoList& list) {
  std::vector<std::uint64_t> r, s, f;
  if (ctx_.is_garbler()) {
    const std::uint64_t km = width_mask(list.key_bits);
    std::set<std::uint64_t> used;
    for (std::size_t j = 0; j < list.k; ++j) {
      r.push_back(ctx_.prg().next_u64() & km);
      s.push_back(ctx_.prg().next_u32());
      std::uint64_t flag;
      do {
        flag = ctx_.prg().next_u32();
      } while (!used.insert(flag).second);
      f.push_back(flag);
    }
  }
  return randomise_with_masks(list, r, s, f);
}

StoredList SecureKnn::randomise_with_masks(const KnnYaoList& list, const std::vector<std::uint64_t>& dist_masks,
                                           const std::vector<std::uint64_t>& id_masks,
                                           const std::vector<std::uint64_t>& flag_masks) {
  const std::size_t k = list.k;
  circuits::RandomiseShape shape{k, list.key_bits, kIdBits, kFlagBits};
  const auto& c = ctx_.circuit("randomise/" + std::to_string(k) + "/" + std::to_string(list.key_bits),
                               [&] { return circuits::build_randomise(shape); });
  std::map<std::string, GcInput> in;
  in["keys"] = GcInput::yao(list.keys);
  in["ids"] = GcInput::yao(list.ids);
  StoredList out;
  counters_.randomise_calls += 1;
  if (ctx_.is_garbler()) {
    if (dist_masks.size() != k || id_masks.size() != k || flag_masks.size() != k)
      throw ParameterError("randomise: one mask of each kind per entry required");
    if (std::set<std::uint64_t>(flag_masks.begin(), flag_masks.end()).size() != k)
      throw ParameterError("randomise: flag masks must be distinct within a list");
    in["dist_masks"] = GcInput::plain(pack_bits(dist_masks, list.key_bits));
    in["id_masks"] = GcInput::plain(pack_bits(id_masks, kIdBits));
    in["flag_masks"] = GcInput::plain(pack_bits(flag_masks, kFlagBits));
    ctx_.yao().run(c, in);
    out.entries.resize(k);
    for (std::size_t j = 0; j < k; ++j) out.entries[j] = {dist_masks[j], id_masks[j], flag_masks[j]};
    return out;
  }
  out.magic = ctx_.prg().next_u32();
  in["magic"] = GcInput::plain(to_bits(out.magic, kFlagBits));
  auto res = ctx_.yao().run(c, in);
  auto d = unpack_bits(res.bits.at("dist_shares"), list.key_bits);
  auto ids = unpack_bits(res.bits.at("id_shares"), kIdBits);
  auto flags = unpack_bits(res.bits.at("flags"), kFlagBits);
  out.local_order.resize(k);
  std::iota(out.local_order.begin(), out.local_order.end(), 0);
  std::shuffle(out.local_order.begin(), out.local_order.end(), ctx_.prg());
  out.entries.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t src = out.local_order[i];
    out.entries[i] = {d[src], ids[src], flags[src]};
  }
  return out;
}

std::vector<std::size_t> SecureKnn::derandomise(StoredList& list) {
  const std::size_t n = list.entries.size();
  if (n == 0) throw ParameterError("derandomise of an empty list");
  const auto& c = ctx_.circuit("derandomise/" + std::to_string(n), [&] { return circuits::build_derandomise(n); });
  std::vector<std::uint64_t> flags(n);
  for (std::size_t i = 0; i < n; ++i) flags[i] = list.entries[i].flag;
  std::map<std::string, GcInput> in;
  if (ctx_.is_garbler()) {
    in["flag_masks"] = GcInput::plain(pack_bits(flags, kFlagBits));
  } else {
    in["flags"] = GcInput::plain(pack_bits(flags, kFlagBits));
    in["magic"] = GcInput::plain(to_bits(list.magic, kFlagBits));
  }
  auto res = ctx_.yao().run(c, in);
  counters_.derandomise_calls += 1;
  auto pairing = permutation_from_matrix(res.bits.at("match"), n);
  if (!ctx_.is_garbler()) {
    std::vector<StoredEntry> aligned(n);
    for (std::size_t i = 0; i < n; ++i) aligned[i] = list.entries[pairing[i]];
    list.entries = std::move(aligned);
    list.local_order.clear();
  }
  return pairing;
}

bool SecureKnn::outlier_test(const YaoWord& dist, const YaoWord& radius) {
  const auto& c = ctx_.circuit("outlier-test/" + std::to_string(key_bits_),
                               [&] { return circuits::build_outlier_test(key_bits_); });
  auto res = ctx_.yao().run(c, {{"distance", GcInput::yao(dist)}, {"radius", GcInput::yao(radius)}});
  return res.bits.at("outlier").at(0) != 0;
}

bool SecureKnn::inlier_test(const YaoWord& dist, const YaoWord& radius) {
  const auto& c = ctx_.circuit("inlier-test/" + std::to_string(key_bits_),
                               [&] { return circuits::build_inlier_test(key_bits_); });
  auto res = ctx_.yao().run(c, {{"distance", GcInput::yao(dist)}, {"radius", GcInput::yao(radius)}});
  return res.bits.at("inlier").at(0) != 0;
}

std::vector<std::uint64_t> SecureKnn::reveal_ids(const KnnYaoList& list) {
  const auto& c = ctx_.circuit("reveal-knn-ids/" + std::to_string(list.k),
                               [&] { return circuits::build_reveal("reveal-knn-ids", list.k * kIdBits); });
  auto res = ctx_.yao().run(c, {{"value", GcInput::yao(list.ids)}});
  return unpack_bits(res.bits.at("value"), kIdBits);
}

}  // namespace ppod
