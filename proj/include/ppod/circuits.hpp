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

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ppod/circuit.hpp"

// Circuit builders for the secure outlier-detection pipeline. Word-level
// helpers compose inside a CircuitBuilder; build_* functions return
// complete circuits with named bundles.
namespace ppod::circuits {

// ---- word-level gadgets (unsigned, little-endian words) ----

// (a + b) mod 2^w, w = a.size(); final carry dropped.
Word add(CircuitBuilder& cb, const Word& a, const Word& b);
// (a - b) mod 2^w.
Word sub(CircuitBuilder& cb, const Word& a, const Word& b);
// a > b. One AND per bit.
Wire greater_than(CircuitBuilder& cb, const Word& a, const Word& b);
// sel ? if_one : if_zero.
Word mux(CircuitBuilder& cb, Wire sel, const Word& if_zero, const Word& if_one);
// a == b.
Wire equal(CircuitBuilder& cb, const Word& a, const Word& b);
Wire or_all(CircuitBuilder& cb, std::span<const Wire> bits);
Word xor_words(CircuitBuilder& cb, const Word& a, const Word& b);

// A key and the payload that travels with it through every swap.
struct Record {
  Word key;
  Word payload;
};

void conditional_swap(CircuitBuilder& cb, Record& a, Record& b, Wire swap);
// Leaves the smaller key in `lo`; swaps only when lo.key > hi.key.
void compare_swap(CircuitBuilder& cb, Record& lo, Record& hi);

// Comparator schedule of Batcher's odd-even merge sort for n = 2^m.
std::vector<std::pair<std::size_t, std::size_t>> batcher_pairs(std::size_t n);

std::size_t next_power_of_two(std::size_t n);

inline constexpr std::size_t kIdBits = 32;
inline constexpr std::size_t kFlagBits = 32;
// Payload carried by padding records; never a valid point id.
inline constexpr std::uint64_t kInvalidId = 0xFFFF'FFFFull;

// ---- complete circuits ----

// Inputs a (garbler), b (evaluator); output "sum"/"diff" to `dest`.
Circuit build_adder(std::size_t width, Destination dest = Destination::kBoth);
Circuit build_subtractor(std::size_t width, Destination dest = Destination::kBoth);
// Output "gt" = a > b.
Circuit build_comparator(std::size_t width, Destination dest = Destination::kBoth);
// Inputs "distance", "radius"; output "outlier" = distance > radius.
Circuit build_outlier_test(std::size_t width);
// Output "inlier" = distance <= radius.
Circuit build_inlier_test(std::size_t width);
// Input "bits" (count); output "any".
Circuit build_or_reduce(std::size_t count);
// Input "values" (k words); output "max" as Yao shares.
Circuit build_max(std::size_t k, std::size_t width);

struct SortShuffleShape {
  std::size_t records = 0;  // W: records entering the network
  std::size_t k = 0;        // records kept after truncation
  std::size_t key_bits = 64;
  std::size_t id_bits = kIdBits;
};

// Inputs "keys", "ids" (garbler or Yao shares), "control" (evaluator,
// waksman_switch_count(k) bits). Sorts ascending by key (padding to a power
// of two with all-ones sentinels), keeps the k smallest, then routes them
// through the keyed Waksman network. Outputs "keys", "ids" as Yao shares.
Circuit build_sort_shuffle(const SortShuffleShape& shape);
GateCounts sort_shuffle_cost(const SortShuffleShape& shape);

struct RandomiseShape {
  std::size_t k = 0;
  std::size_t key_bits = 64;
  std::size_t id_bits = kIdBits;
  std::size_t flag_bits = kFlagBits;
};

// Inputs: "keys", "ids" (Yao shares), garbler masks "dist_masks",
// "id_masks", "flag_masks", evaluator "magic". Evaluator outputs
// "dist_shares" = key - r, "id_shares" = id - s, "flags" = magic ^ R^m.
Circuit build_randomise(const RandomiseShape& shape);

// Inputs "flag_masks" (garbler, n words), "flags" (evaluator, n words),
// "magic" (evaluator). Output "match" (both), bit i*n+j set iff
// flags[j] ^ flag_masks[i] == magic.
Circuit build_derandomise(std::size_t n, std::size_t flag_bits = kFlagBits);

// Inputs "distances" (count words), "epsilon"; output "assertion" (both) =
// OR_j (distances[j] <= epsilon).
Circuit build_query_assertion(std::size_t count, std::size_t width);

// Identity circuit that opens a Yao-shared "value" to both parties.
Circuit build_reveal(const std::string& name, std::size_t width);

}  // namespace ppod::circuits
