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

#include "ppod/crypto.hpp"

#include <openssl/sha.h>
#include <wmmintrin.h>
#include <emmintrin.h>

#include <cstring>
#include <random>

namespace ppod {
namespace {

inline __m128i load(const Block& b) {
  return _mm_loadu_si128(reinterpret_cast<const __m128i*>(&b));
}
inline void store(Block& b, __m128i v) { _mm_storeu_si128(reinterpret_cast<__m128i*>(&b), v); }

template <int Rcon>
__m128i expand_step(__m128i key) {
  __m128i t = _mm_aeskeygenassist_si128(key, Rcon);
  t = _mm_shuffle_epi32(t, 0xff);
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  return _mm_xor_si128(key, t);
}

}  // namespace

Aes128::Aes128(const Block& key) {
  __m128i rk[11];
  rk[0] = load(key);
  rk[1] = expand_step<0x01>(rk[0]);
  rk[2] = expand_step<0x02>(rk[1]);
  rk[3] = expand_step<0x04>(rk[2]);
  rk[4] = expand_step<0x08>(rk[3]);
  rk[5] = expand_step<0x10>(rk[4]);
  rk[6] = expand_step<0x20>(rk[5]);
  rk[7] = expand_step<0x40>(rk[6]);
  rk[8] = expand_step<0x80>(rk[7]);
  rk[9] = expand_step<0x1b>(rk[8]);
  rk[10] = expand_step<0x36>(rk[9]);
  std::memcpy(round_keys_.data(), rk, sizeof(rk));
}

Block Aes128::encrypt(const Block& in) const {
  const auto* rk = reinterpret_cast<const __m128i*>(round_keys_.data());
  __m128i s = _mm_xor_si128(load(in), _mm_load_si128(rk));
  for (int r = 1; r < 10; ++r) s = _mm_aesenc_si128(s, _mm_load_si128(rk + r));
  s = _mm_aesenclast_si128(s, _mm_load_si128(rk + 10));
  Block out;
  store(out, s);
  return out;
}

void Aes128::encrypt_many(Block* blocks, std::size_t n) const {
  const auto* rk = reinterpret_cast<const __m128i*>(round_keys_.data());
  constexpr std::size_t kLanes = 8;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m128i s[kLanes];
    __m128i k0 = _mm_load_si128(rk);
    for (std::size_t j = 0; j < kLanes; ++j) s[j] = _mm_xor_si128(load(blocks[i + j]), k0);
    for (int r = 1; r < 10; ++r) {
      __m128i kr = _mm_load_si128(rk + r);
      for (std::size_t j = 0; j < kLanes; ++j) s[j] = _mm_aesenc_si128(s[j], kr);
    }
    __m128i kl = _mm_load_si128(rk + 10);
    for (std::size_t j = 0; j < kLanes; ++j) store(blocks[i + j], _mm_aesenclast_si128(s[j], kl));
  }
  for (; i < n; ++i) blocks[i] = encrypt(blocks[i]);
}

FixedKeyHash::FixedKeyHash() : aes_(Block{0x243f6a8885a308d3ull, 0x13198a2e03707344ull}) {}

const FixedKeyHash& FixedKeyHash::instance() {
  static const FixedKeyHash h;
  return h;
}

void FixedKeyHash::hash_many(Block* x, std::size_t n) const {
  constexpr std::size_t kChunk = 64;
  Block tmp[kChunk];
  for (std::size_t i = 0; i < n; i += kChunk) {
    std::size_t m = std::min(kChunk, n - i);
    std::memcpy(tmp, x + i, m * sizeof(Block));
    aes_.encrypt_many(tmp, m);
    for (std::size_t j = 0; j < m; ++j) x[i + j] ^= tmp[j];
  }
}

Prg::Prg(const Block& seed) : aes_(seed) {}

Prg Prg::from_entropy() {
  std::random_device rd;
  auto word = [&] { return (std::uint64_t(rd()) << 32) | rd(); };
  return Prg(Block{word(), word()});
}

Block Prg::derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index) {
  // Absorb the label 16 bytes at a time through the fixed-key hash.
  const auto& h = FixedKeyHash::instance();
  Block state{root, index};
  state = h.hash(state);
  for (std::size_t i = 0; i < label.size(); i += 16) {
    Block chunk;
    std::memcpy(&chunk, label.data() + i, std::min<std::size_t>(16, label.size() - i));
    state = h.hash(gf_double(state) ^ chunk);
  }
  return h.hash(state ^ Block{label.size(), 0x6b64'6572'6976'6564ull});
}

void Prg::refill() {
  for (auto& b : buffer_) b = Block{counter_++, 0};
  aes_.encrypt_many(buffer_.data(), buffer_.size());
  used_ = 0;
}

Block Prg::next_block() {
  if (used_ == buffer_.size()) refill();
  return buffer_[used_++];
}

std::uint64_t Prg::next_u64() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  Block b = next_block();
  spare_ = b.hi;
  has_spare_ = true;
  return b.lo;
}

std::uint64_t Prg::uniform(std::uint64_t bound) {
  if (bound == 0) return 0;
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

void Prg::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    Block b = next_block();
    std::size_t n = std::min<std::size_t>(16, out.size() - i);
    std::memcpy(out.data() + i, &b, n);
    i += n;
  }
}

Sha256Digest sha256(std::span<const std::uint8_t> data) {
  Sha256Digest d{};
  SHA256(data.data(), data.size(), d.data());
  return d;
}

}  // namespace ppod
