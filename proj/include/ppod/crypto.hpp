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

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace ppod {

// 128-bit value used for wire labels, AES blocks and PRG seeds.
struct Block {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  constexpr Block() = default;
  constexpr Block(std::uint64_t low, std::uint64_t high) : lo(low), hi(high) {}

  constexpr Block operator^(const Block& o) const { return {lo ^ o.lo, hi ^ o.hi}; }
  constexpr Block& operator^=(const Block& o) {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  constexpr bool operator==(const Block&) const = default;
  constexpr bool lsb() const { return lo & 1u; }
  constexpr bool is_zero() const { return lo == 0 && hi == 0; }
};

inline constexpr Block kZeroBlock{};

// Multiplication by x in GF(2^128) (reduction polynomial x^128+x^7+x^2+x+1).
constexpr Block gf_double(const Block& b) {
  std::uint64_t carry = b.hi >> 63;
  Block out{b.lo << 1, (b.hi << 1) | (b.lo >> 63)};
  out.lo ^= carry * 0x87u;
  return out;
}

// AES-128 with an expanded key schedule. Uses AES-NI.
class Aes128 {
 public:
  explicit Aes128(const Block& key);
  Block encrypt(const Block& in) const;
  // In-place encryption of n independent blocks, pipelined.
  void encrypt_many(Block* blocks, std::size_t n) const;

 private:
  alignas(16) std::array<std::uint8_t, 11 * 16> round_keys_{};
};

// Correlation-robust hash built from fixed-key AES: H(x) = pi(x) ^ x.
class FixedKeyHash {
 public:
  static const FixedKeyHash& instance();

  Block hash(const Block& x) const {
    return aes_.encrypt(x) ^ x;
  }
  // In-place: x[i] <- pi(x[i]) ^ x[i].
  void hash_many(Block* x, std::size_t n) const;

 private:
  FixedKeyHash();
  Aes128 aes_;
};

// Seedable AES-CTR generator. The only source of randomness in the library:
// a fixed seed reproduces every transcript.
class Prg {
 public:
  using result_type = std::uint64_t;

  explicit Prg(const Block& seed);
  explicit Prg(std::uint64_t seed) : Prg(Block{seed, 0x5050'4f44'7072'6700ull}) {}

  // Seed drawn from std::random_device.
  static Prg from_entropy();
  // Child generator for a named purpose, independent of the parent's stream
  // position.
  static Block derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

  Block next_block();
  std::uint64_t next_u64();
  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64()); }
  bool next_bit() { return next_u64() & 1u; }
  // Uniform in [0, bound) by rejection. bound > 0.
  std::uint64_t uniform(std::uint64_t bound);
  void fill(std::span<std::uint8_t> out);

  // UniformRandomBitGenerator surface, so std::shuffle works.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

 private:
  void refill();

  Aes128 aes_;
  std::uint64_t counter_ = 0;
  std::array<Block, 8> buffer_{};
  std::size_t used_ = 8;
  std::uint64_t spare_ = 0;
  bool has_spare_ = false;
};

using Sha256Digest = std::array<std::uint8_t, 32>;
Sha256Digest sha256(std::span<const std::uint8_t> data);

}  // namespace ppod
