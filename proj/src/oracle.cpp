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

#include "ppod/oracle.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <string>

#include "ppod/circuits.hpp"
#include "ppod/errors.hpp"

namespace ppod::oracle {

__extension__ using U128 = unsigned __int128;

std::uint64_t distance(std::span<const std::uint64_t> p, std::span<const std::uint64_t> q) {
  if (p.size() != q.size()) throw ParameterError("oracle distance: dimension mismatch");
  U128 acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const U128 d = p[i] > q[i] ? p[i] - q[i] : q[i] - p[i];
    acc += d * d;
  }
  if (acc >> 64) throw RangeError("oracle distance exceeds 64 bits");
  return static_cast<std::uint64_t>(acc);
}

std::vector<std::size_t> network_k_smallest(const std::vector<std::uint64_t>& keys, std::size_t k,
                                            unsigned key_bits) {
  if (k == 0 || k > keys.size()) throw ParameterError("oracle: need 1 <= k <= records");
  const std::size_t n = circuits::next_power_of_two(keys.size());
  const std::uint64_t sentinel = key_bits >= 64 ? ~0ull : (1ull << key_bits) - 1;
  std::vector<std::pair<std::uint64_t, std::size_t>> rec(n, {sentinel, SIZE_MAX});
  for (std::size_t i = 0; i < keys.size(); ++i) rec[i] = {keys[i], i};
  for (auto [i, j] : circuits::batcher_pairs(n))
    if (rec[i].first > rec[j].first) std::swap(rec[i], rec[j]);
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = rec[i].second;
  return out;
}

std::uint64_t k_distance(const std::vector<PlainPoint>& points, std::size_t index, std::size_t k) {
  std::vector<std::uint64_t> d;
  for (std::size_t j = 0; j < points.size(); ++j)
    if (j != index) d.push_back(distance(points[index].coords, points[j].coords));
  if (k == 0 || d.size() < k) throw ParameterError("oracle: fewer than k other points");
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
  return d[k - 1];
}

std::set<std::uint64_t> outliers(const std::vector<PlainPoint>& points, std::size_t k, std::uint64_t radius) {
  std::set<std::uint64_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t neighbours = 0;
    for (std::size_t j = 0; j < points.size(); ++j)
      if (j != i && distance(points[i].coords, points[j].coords) <= radius) ++neighbours;
    if (neighbours < k) out.insert(points[i].id);
  }
  return out;
}

std::set<std::uint64_t> outliers_by_kdist(const std::vector<PlainPoint>& points, std::size_t k,
                                          std::uint64_t radius) {
  std::set<std::uint64_t> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (k_distance(points, i, k) > radius) out.insert(points[i].id);
  return out;
}

namespace {

struct State {
  std::deque<std::size_t> active;                         // stream indices
  std::map<std::uint64_t, std::vector<std::uint64_t>> d;  // stored kNN distances
  std::set<std::uint64_t> outliers;
};

std::uint64_t max_of(const std::vector<std::uint64_t>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

Replay protocol_replay(const std::vector<PlainPoint>& stream, const StreamParams& prm) {
  if (stream.size() < prm.window) throw ParameterError("oracle: stream shorter than the window");
  if (prm.k == 0 || prm.slide == 0 || prm.k > prm.window - prm.slide)
    throw ParameterError("oracle: need 0 < k <= window - slide");
  Replay out;
  State st;
  for (std::size_t i = 0; i < prm.window; ++i) st.active.push_back(i);

  for (std::size_t i : st.active) {
    std::vector<std::uint64_t> keys;
    for (std::size_t j : st.active)
      if (j != i) keys.push_back(distance(stream[i].coords, stream[j].coords));
    out.init_distance_evaluations += keys.size();
    std::vector<std::uint64_t> kept;
    for (std::size_t pos : network_k_smallest(keys, prm.k, prm.key_bits)) kept.push_back(keys[pos]);
    if (max_of(kept) > prm.radius) st.outliers.insert(stream[i].id);
    st.d[stream[i].id] = std::move(kept);
  }
  out.outliers.push_back(st.outliers);

  for (std::size_t next = prm.window; next + prm.slide <= stream.size(); next += prm.slide) {
    for (std::size_t e = 0; e < prm.slide; ++e) {
      const auto id = stream[st.active.front()].id;
      st.active.pop_front();
      st.outliers.erase(id);
      st.d.erase(id);
    }
    std::uint64_t dist_evals = 0, resorts = 0;
    std::vector<std::vector<std::uint64_t>> slide_ids;
    for (std::size_t qi = next; qi < next + prm.slide; ++qi) {
      const auto& q = stream[qi];
      std::vector<std::uint64_t> keys;
      std::vector<std::size_t> idx(st.active.begin(), st.active.end());
      for (std::size_t j : idx) keys.push_back(distance(q.coords, stream[j].coords));
      dist_evals += keys.size();
      auto picked = network_k_smallest(keys, prm.k, prm.key_bits);
      std::vector<std::uint64_t> kept, ids;
      for (std::size_t pos : picked) {
        kept.push_back(keys[pos]);
        ids.push_back(stream[idx[pos]].id);
      }
      const bool outlier = max_of(kept) > prm.radius;
      st.d[q.id] = kept;
      st.active.push_back(qi);
      if (outlier) st.outliers.insert(q.id);
      for (std::size_t n = 0; n < picked.size(); ++n) {
        const auto a = ids[n];
        if (!st.outliers.count(a)) continue;
        // Only the distance multiset of a stored list affects later
        // decisions, so ties among kept entries are immaterial.
        auto& list = st.d[a];
        list.push_back(kept[n]);
        std::sort(list.begin(), list.end());
        list.resize(prm.k);
        ++resorts;
        if (max_of(list) <= prm.radius) st.outliers.erase(a);
      }
      std::sort(ids.begin(), ids.end());
      slide_ids.push_back(std::move(ids));
    }
    out.outliers.push_back(st.outliers);
    out.knn_ids.push_back(std::move(slide_ids));
    out.slide_distance_evaluations.push_back(dist_evals);
    out.slide_resorts.push_back(resorts);
  }
  return out;
}

std::vector<std::set<std::uint64_t>> textbook_stream(const std::vector<PlainPoint>& stream,
                                                     const StreamParams& prm) {
  if (stream.size() < prm.window) throw ParameterError("oracle: stream shorter than the window");
  std::vector<std::set<std::uint64_t>> out;
  for (std::size_t start = 0; start + prm.window <= stream.size(); start += prm.slide) {
    std::vector<PlainPoint> window(stream.begin() + static_cast<std::ptrdiff_t>(start),
                                   stream.begin() + static_cast<std::ptrdiff_t>(start + prm.window));
    out.push_back(outliers(window, prm.k, prm.radius));
  }
  return out;
}

bool query(const std::vector<PlainPoint>& outlier_points, std::span<const std::uint64_t> q, std::uint64_t epsilon) {
  return std::any_of(outlier_points.begin(), outlier_points.end(),
                     [&](const PlainPoint& o) { return distance(o.coords, q) <= epsilon; });
}

}  // namespace ppod::oracle
