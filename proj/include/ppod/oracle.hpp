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

#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

// Plaintext reference implementations on the rounded integer domain.
namespace ppod::oracle {

struct PlainPoint {
  std::uint64_t id = 0;
  std::vector<std::uint64_t> coords;
};

// Sum of squared coordinate differences, computed in 128 bits. Throws
// RangeError when the result does not fit 64 bits.
std::uint64_t distance(std::span<const std::uint64_t> p, std::span<const std::uint64_t> q);

// Ids of the k smallest keys, selected by the same sorting network the
// secure circuit uses over the same input order (so ties resolve alike).
// Returned in network output order.
std::vector<std::size_t> network_k_smallest(const std::vector<std::uint64_t>& keys, std::size_t k,
                                            unsigned key_bits = 64);

// k-th smallest distance from points[index] to every other point.
std::uint64_t k_distance(const std::vector<PlainPoint>& points, std::size_t index, std::size_t k);

// Points with fewer than k neighbours within distance <= radius.
std::set<std::uint64_t> outliers(const std::vector<PlainPoint>& points, std::size_t k, std::uint64_t radius);
// Points whose k-distance exceeds radius.
std::set<std::uint64_t> outliers_by_kdist(const std::vector<PlainPoint>& points, std::size_t k,
                                          std::uint64_t radius);

struct StreamParams {
  std::size_t window = 0;
  std::size_t slide = 0;
  std::size_t k = 0;
  std::uint64_t radius = 0;
  unsigned key_bits = 64;
};

struct Replay {
  // Index 0: after initialisation; then one entry per full slide.
  std::vector<std::set<std::uint64_t>> outliers;
  // Per slide, per arrival: kNN ids the protocol opens (sorted).
  std::vector<std::vector<std::vector<std::uint64_t>>> knn_ids;
  // Distance evaluations and neighbour re-sorts, per slide.
  std::uint64_t init_distance_evaluations = 0;
  std::vector<std::uint64_t> slide_distance_evaluations;
  std::vector<std::uint64_t> slide_resorts;
};

// The secure protocol's semantics on plaintext: stored lists are only
// refreshed for neighbours that are outliers, expired points may linger
// in stored lists, and inliers are never re-promoted.
Replay protocol_replay(const std::vector<PlainPoint>& stream, const StreamParams& params);

// Full recheck of every window after each slide.
std::vector<std::set<std::uint64_t>> textbook_stream(const std::vector<PlainPoint>& stream,
                                                     const StreamParams& params);

// True iff some outlier lies within epsilon of q.
bool query(const std::vector<PlainPoint>& outlier_points, std::span<const std::uint64_t> q, std::uint64_t epsilon);

}  // namespace ppod::oracle
