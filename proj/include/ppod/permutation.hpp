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
#include <utility>
#include <vector>

#include "ppod/crypto.hpp"
#include "ppod/errors.hpp"

namespace ppod {

// Keyed pseudorandom permutation of [0, n): a 4-round Feistel network over
// the smallest even bit width >= max(8, log2 n), with cycle walking back
// into the domain.
class FeistelPrp {
 public:
  FeistelPrp(const Block& key, std::uint64_t n);

  std::uint64_t size() const { return n_; }
  std::uint64_t permute(std::uint64_t x) const;
  std::uint64_t unpermute(std::uint64_t x) const;

 private:
  std::uint64_t round(unsigned r, std::uint64_t half) const;
  std::uint64_t encrypt_block(std::uint64_t x) const;
  std::uint64_t decrypt_block(std::uint64_t x) const;

  Aes128 aes_;
  std::uint64_t n_;
  unsigned half_bits_;
  std::uint64_t half_mask_;
};

// Number of 2x2 switches in the arbitrary-size Waksman network on n inputs.
std::size_t waksman_switch_count(std::size_t n);

// Control bits that make the network realise out[i] = in[perm[i]].
// perm must be a bijection on [0, n).
std::vector<std::uint8_t> waksman_route(const std::vector<std::size_t>& perm);

// Applies the network to `items`. Bits are consumed in the order produced by
// waksman_route: input column, upper subnetwork, lower subnetwork, output
// column. `swap(a, b, bit)` must exchange a and b when bit is set; the bit
// type is whatever `bits[i]` yields, so the same routine drives plaintext
// vectors and circuit wires.
template <class T, class BitSeq, class Swap>
void waksman_apply(std::vector<T>& items, const BitSeq& bits, std::size_t& cursor, Swap&& swap) {
  const std::size_t n = items.size();
  if (n <= 1) return;
  if (n == 2) {
    swap(items[0], items[1], bits[cursor++]);
    return;
  }
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) swap(items[2 * i], items[2 * i + 1], bits[cursor++]);
  std::vector<T> upper, lower;
  upper.reserve(half);
  lower.reserve(n - half);
  for (std::size_t i = 0; i < half; ++i) {
    upper.push_back(std::move(items[2 * i]));
    lower.push_back(std::move(items[2 * i + 1]));
  }
  if (n % 2) lower.push_back(std::move(items[n - 1]));
  waksman_apply(upper, bits, cursor, swap);
  waksman_apply(lower, bits, cursor, swap);
  for (std::size_t j = 0; j < half; ++j) {
    items[2 * j] = std::move(upper[j]);
    items[2 * j + 1] = std::move(lower[j]);
    const bool fixed = (n % 2 == 0) && j == half - 1;
    if (!fixed) swap(items[2 * j], items[2 * j + 1], bits[cursor++]);
  }
  if (n % 2) items[n - 1] = std::move(lower[half]);
}

// Evaluator-side description of a keyed shuffle: the permutation derived
// from K and the network control bits realising it.
struct PermutationSpec {
  std::size_t size = 0;
  Block key;
  std::vector<std::size_t> perm;         // out[i] = in[perm[i]]
  std::vector<std::uint8_t> control;     // waksman_route(perm)
};

PermutationSpec derive_permutation(const Block& key, std::size_t n);

bool is_bijection(const std::vector<std::size_t>& perm);

}  // namespace ppod
