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
#include <span>
#include <vector>

#include "ppod/circuits.hpp"
#include "ppod/party.hpp"
#include "ppod/permutation.hpp"
#include "ppod/session.hpp"

// Secure squared-Euclidean distance, kNN selection and the stored
// (randomised) form of kNN lists.
namespace ppod {

// k records of Yao-shared (distance, id) in SortShuffle output order.
struct KnnYaoList {
  std::size_t k = 0;
  std::size_t key_bits = 64;
  YaoWord keys;
  YaoWord ids;

  YaoWord key(std::size_t j) const { return keys.slice(j * key_bits, key_bits); }
  YaoWord id(std::size_t j) const { return ids.slice(j * circuits::kIdBits, circuits::kIdBits); }
};

// One party's half of a randomised kNN entry. Garbler: masks (r, s, R^m).
// Evaluator: (d - r, id - s, m ^ R^m).
struct StoredEntry {
  std::uint64_t dist = 0;
  std::uint64_t id = 0;
  std::uint64_t flag = 0;
};

struct StoredList {
  std::vector<StoredEntry> entries;
  std::uint64_t magic = 0;  // evaluator only
  // Evaluator only: entries[i] came from randomise output position
  // local_order[i].
  std::vector<std::size_t> local_order;
};

struct WorkCounters {
  std::uint64_t distance_evaluations = 0;
  std::uint64_t knn_calls = 0;
  std::uint64_t sort_shuffles = 0;
  std::uint64_t resorts = 0;
  std::uint64_t resort_records = 0;
  std::uint64_t randomise_calls = 0;
  std::uint64_t derandomise_calls = 0;

  WorkCounters& operator+=(const WorkCounters& o);
  WorkCounters operator-(const WorkCounters& o) const;
};

class SecureKnn {
 public:
  explicit SecureKnn(PartyContext& ctx);

  std::size_t key_bits() const { return key_bits_; }

  // Additive shares of d(p, q) for each q; 3n triples per q, one round.
  std::vector<std::uint64_t> distances(std::span<const std::uint64_t> p,
                                       const std::vector<std::span<const std::uint64_t>>& qs);

  // Algorithm-level kNN of p over qs with public ids.
  KnnYaoList knn(std::span<const std::uint64_t> p, const std::vector<std::span<const std::uint64_t>>& qs,
                 const std::vector<std::uint64_t>& ids, std::size_t k);

  // A2Y of the additive distances followed by the SortShuffle circuit.
  // Public ids enter as garbler plaintext.
  KnnYaoList sort_shuffle_public_ids(std::span<const std::uint64_t> dist_shares,
                                     const std::vector<std::uint64_t>& ids, std::size_t k);
  // Ids held as additive shares mod 2^32.
  KnnYaoList sort_shuffle_shared_ids(std::span<const std::uint64_t> dist_shares,
                                     std::span<const std::uint64_t> id_shares, std::size_t k);

  YaoWord kdist(const KnnYaoList& list);

  StoredList randomise(const KnnYaoList& list);
  // Garbler-chosen masks (ignored on the evaluator). Duplicate flag masks
  // raise ParameterError.
  StoredList randomise_with_masks(const KnnYaoList& list, const std::vector<std::uint64_t>& dist_masks,
                                  const std::vector<std::uint64_t>& id_masks,
                                  const std::vector<std::uint64_t>& flag_masks);

  // Pairs the two parties' entries; on return both lists are index-aligned
  // (evaluator reordered to the garbler order). Returns pairing[i] = the
  // evaluator position that matched garbler entry i. Throws PairingError if
  // the match matrix is not a permutation.
  std::vector<std::size_t> derandomise(StoredList& list);

  // Decoded to both parties.
  bool outlier_test(const YaoWord& dist, const YaoWord& radius);
  bool inlier_test(const YaoWord& dist, const YaoWord& radius);
  // Opens the ids of a kNN list to both parties.
  std::vector<std::uint64_t> reveal_ids(const KnnYaoList& list);

  const WorkCounters& counters() const { return counters_; }
  // Books a re-sort of an existing list holding `records` stored entries.
  void note_resort(std::size_t records) {
    counters_.resorts += 1;
    counters_.resort_records += records;
  }
  // Evaluator only: permutation applied by the last SortShuffle.
  const std::vector<std::size_t>& last_permutation() const { return last_perm_; }

 private:
  KnnYaoList run_sort_shuffle(const YaoWord& keys, std::size_t records, std::size_t k, const GcInput* ids);

  PartyContext& ctx_;
  std::size_t key_bits_;
  WorkCounters counters_;
  std::vector<std::size_t> last_perm_;
};

// Throws PairingError unless `bits` (n x n, row-major) is a permutation
// matrix; returns column index per row.
std::vector<std::size_t> permutation_from_matrix(const BitVec& bits, std::size_t n);

}  // namespace ppod
