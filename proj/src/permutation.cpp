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

#include "ppod/permutation.hpp"

#include <string>

namespace ppod {

FeistelPrp::FeistelPrp(const Block& key, std::uint64_t n) : aes_(key), n_(n) {
  if (n == 0) throw ParameterError("permutation domain must be non-empty");
  unsigned bits = 0;
  while (bits < 63 && (std::uint64_t(1) << bits) < n) ++bits;
  bits = std::max(bits, 8u);
  bits += bits % 2;
  half_bits_ = bits / 2;
  half_mask_ = (std::uint64_t(1) << half_bits_) - 1;
}

std::uint64_t FeistelPrp::round(unsigned r, std::uint64_t half) const {
  return aes_.encrypt(Block{half, 0x7072'7000ull | r}).lo & half_mask_;
}

std::uint64_t FeistelPrp::encrypt_block(std::uint64_t x) const {
  std::uint64_t left = x >> half_bits_, right = x & half_mask_;
  for (unsigned r = 0; r < 4; ++r) {
    std::uint64_t next = left ^ round(r, right);
    left = right;
    right = next;
  }
  return (left << half_bits_) | right;
}

std::uint64_t FeistelPrp::decrypt_block(std::uint64_t x) const {
  std::uint64_t left = x >> half_bits_, right = x & half_mask_;
  for (unsigned r = 4; r-- > 0;) {
    std::uint64_t prev = right ^ round(r, left);
    right = left;
    left = prev;
  }
  return (left << half_bits_) | right;
}

std::uint64_t FeistelPrp::permute(std::uint64_t x) const {
  if (x >= n_) throw RangeError("permutation input out of domain");
  do {
    x = encrypt_block(x);
  } while (x >= n_);
  return x;
}

std::uint64_t FeistelPrp::unpermute(std::uint64_t x) const {
  if (x >= n_) throw RangeError("permutation input out of domain");
  do {
    x = decrypt_block(x);
  } while (x >= n_);
  return x;
}

std::size_t waksman_switch_count(std::size_t n) {
  if (n <= 1) return 0;
  if (n == 2) return 1;
  const std::size_t half = n / 2;
  const std::size_t outputs = n % 2 ? half : half - 1;
  return half + outputs + waksman_switch_count(half) + waksman_switch_count(n - half);
}

bool is_bijection(const std::vector<std::size_t>& perm) {
  std::vector<std::uint8_t> seen(perm.size(), 0);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) return false;
    seen[p] = 1;
  }
  return true;
}

namespace {

// Appends control bits for out[i] = in[perm[i]] in waksman_apply order.
void route(const std::vector<std::size_t>& perm, std::vector<std::uint8_t>& bits) {
  const std::size_t n = perm.size();
  if (n <= 1) return;
  if (n == 2) {
    bits.push_back(perm[0] == 1);
    return;
  }
  const std::size_t half = n / 2;
  const std::size_t paired = 2 * half;  // inputs/outputs that sit on a switch
  std::vector<std::size_t> dest(n);
  for (std::size_t i = 0; i < n; ++i) dest[perm[i]] = i;

  // 0 = upper subnetwork, 1 = lower. Inputs sharing an input switch, and
  // inputs headed to the same output switch, must split across the halves.
  constexpr std::uint8_t kUnset = 2;
  std::vector<std::uint8_t> side(n, kUnset);
  auto input_partner = [&](std::size_t x) -> std::size_t { return x < paired ? (x ^ 1u) : n; };
  auto output_partner = [&](std::size_t x) -> std::size_t {
    return dest[x] < paired ? perm[dest[x] ^ 1u] : n;
  };
  auto colour = [&](std::size_t start, std::uint8_t s) {
    // The constraint graph has degree <= 2, so walking both ways from the
    // start colours the whole path or cycle.
    std::vector<std::pair<std::size_t, std::uint8_t>> stack{{start, s}};
    while (!stack.empty()) {
      auto [x, c] = stack.back();
      stack.pop_back();
      if (side[x] != kUnset) continue;
      side[x] = c;
      for (std::size_t y : {input_partner(x), output_partner(x)})
        if (y < n && side[y] == kUnset) stack.push_back({y, std::uint8_t(c ^ 1u)});
    }
  };
  if (n % 2) {
    colour(n - 1, 1);           // the unpaired input feeds the lower half
    colour(perm[n - 1], 1);     // the unpaired output comes from the lower half
  } else {
    colour(perm[n - 1], 1);     // last output switch is fixed straight
  }
  for (std::size_t x = 0; x < n; ++x)
    if (side[x] == kUnset) colour(x, 0);

  for (std::size_t i = 0; i < half; ++i) bits.push_back(side[2 * i] == 1);

  // Sub-permutations: the element entering the upper half at slot i is the
  // upper-coloured member of input pair i.
  std::vector<std::size_t> upper(half), lower(n - half);
  auto slot = [&](std::size_t x) { return x < paired ? x / 2 : half; };
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t out_slot = dest[x] < paired ? dest[x] / 2 : half;
    if (side[x] == 0) upper[out_slot] = slot(x);
    else lower[out_slot] = slot(x);
  }
  route(upper, bits);
  route(lower, bits);

  for (std::size_t j = 0; j < half; ++j) {
    const bool fixed = (n % 2 == 0) && j == half - 1;
    if (fixed) continue;
    // Unswapped, the upper element lands on output 2j.
    std::size_t from_upper = perm[2 * j];
    bits.push_back(side[from_upper] != 0);
  }
}

}  // namespace

std::vector<std::uint8_t> waksman_route(const std::vector<std::size_t>& perm) {
  if (!is_bijection(perm)) throw ParameterError("waksman_route needs a permutation");
  std::vector<std::uint8_t> bits;
  bits.reserve(waksman_switch_count(perm.size()));
  route(perm, bits);
  return bits;
}

PermutationSpec derive_permutation(const Block& key, std::size_t n) {
  if (n == 0) throw ParameterError("permutation size must be at least 1");
  FeistelPrp prp(key, n);
  PermutationSpec spec;
  spec.size = n;
  spec.key = key;
  spec.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) spec.perm[i] = static_cast<std::size_t>(prp.permute(i));
  spec.control = waksman_route(spec.perm);
  return spec;
}

}  // namespace ppod
