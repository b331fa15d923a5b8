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

#include "ppod/sharing.hpp"

#include <string>

#include "ppod/bytes.hpp"
#include "ppod/transport.hpp"

namespace ppod {

Ring::Ring(unsigned bits) : bits_(bits) {
  if (bits == 0 || bits > 64) throw ParameterError("ring bit width must be in [1, 64]");
  mask_ = bits == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << bits) - 1;
}

std::pair<RingShare, RingShare> share(std::uint64_t secret, const Ring& ring, Prg& prg) {
  if (!ring.contains(secret))
    throw RangeError("secret " + std::to_string(secret) + " does not fit in " +
                     std::to_string(ring.bits()) + " bits");
  auto b = static_cast<std::uint8_t>(ring.bits());
  std::uint64_t a0 = ring.random(prg);
  return {RingShare{a0, 0, b}, RingShare{ring.sub(secret, a0), 1, b}};
}

std::uint64_t reconstruct(const RingShare& s0, const RingShare& s1) {
  if (s0.bits != s1.bits) throw ParameterError("share bit widths differ");
  return Ring(s0.bits).add(s0.value, s1.value);
}

RingShare add(const RingShare& a, const RingShare& b) {
  if (a.bits != b.bits) throw ParameterError("share bit widths differ");
  return {Ring(a.bits).add(a.value, b.value), a.party, a.bits};
}

RingShare sub(const RingShare& a, const RingShare& b) {
  if (a.bits != b.bits) throw ParameterError("share bit widths differ");
  return {Ring(a.bits).sub(a.value, b.value), a.party, a.bits};
}

RingShare add_public(const RingShare& a, std::uint64_t c) {
  if (a.party != 0) return a;
  return {Ring(a.bits).add(a.value, c), a.party, a.bits};
}

RingShare mul_public(const RingShare& a, std::uint64_t c) {
  return {Ring(a.bits).mul(a.value, c), a.party, a.bits};
}

TripleLists gen_triples(std::size_t count, const Ring& ring, Prg& prg, std::uint64_t first_index) {
  TripleLists out;
  out.party0.reserve(count);
  out.party1.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t x = ring.random(prg);
    std::uint64_t y = ring.random(prg);
    std::uint64_t z = ring.mul(x, y);
    std::uint64_t x0 = ring.random(prg), y0 = ring.random(prg), z0 = ring.random(prg);
    std::uint64_t idx = first_index + i;
    out.party0.push_back({x0, y0, z0, idx});
    out.party1.push_back({ring.sub(x, x0), ring.sub(y, y0), ring.sub(z, z0), idx});
  }
  return out;
}

TripleLists gen_triple_batch(std::uint64_t dealer_seed, std::uint64_t batch,
                             std::uint64_t first_index, std::size_t count, const Ring& ring) {
  Prg prg(Prg::derive_seed(dealer_seed, "triple-batch", batch ^ (std::uint64_t(count) << 40)));
  return gen_triples(count, ring, prg, first_index);
}

TriplePool::TriplePool(Source source, TriplePoolConfig config)
    : source_(std::move(source)), config_(config) {
  if (config_.refill == 0) throw ParameterError("triple pool refill size must be positive");
}

void TriplePool::refill(std::size_t at_least) {
  std::size_t want = std::max(config_.refill, at_least);
  auto batch = source_(batches_, next_index_, want);
  if (batch.size() != want) throw ProtocolError("triple source returned a short batch");
  for (auto& t : batch) {
    if (t.index != next_index_) throw ProtocolError("triple source out of sequence");
    ++next_index_;
    queue_.push_back(t);
  }
  ++batches_;
}

std::vector<TripleShare> TriplePool::take(std::size_t n) {
  if (queue_.size() < n + config_.low_water) refill(n + config_.low_water - queue_.size());
  std::vector<TripleShare> out(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(n));
  queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(n));
  consumed_ += n;
  return out;
}

Multiplier::Multiplier(const Ring& ring, int party, Channel& peer, TriplePool& pool)
    : ring_(ring), party_(party), peer_(peer), pool_(pool) {
  if (party != 0 && party != 1) throw ParameterError("party must be 0 or 1");
}

std::vector<std::uint64_t> Multiplier::mul(std::span<const std::uint64_t> a,
                                           std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) throw ParameterError("mul operand lengths differ");
  if (a.empty()) return {};
  auto triples = pool_.take(a.size());
  return mul_with(a, b, triples);
}

std::uint64_t Multiplier::mul(std::uint64_t a, std::uint64_t b) {
  return mul(std::span<const std::uint64_t>(&a, 1), std::span<const std::uint64_t>(&b, 1)).front();
}

std::vector<std::uint64_t> Multiplier::mul_with(std::span<const std::uint64_t> a,
                                                std::span<const std::uint64_t> b,
                                                std::span<const TripleShare> triples) {
  const std::size_t n = a.size();
  if (b.size() != n || triples.size() != n) throw ParameterError("mul operand lengths differ");
  for (const auto& t : triples) {
    if (any_used_ && t.index <= last_index_)
      throw ProtocolError("Beaver triple " + std::to_string(t.index) + " already consumed");
    any_used_ = true;
    last_index_ = t.index;
  }

  std::vector<std::uint64_t> opened(2 * n);
  ByteWriter w;
  w.reserve(4 + 2 * n * ring_.bytes());
  w.u32(static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    opened[2 * i] = ring_.sub(a[i], triples[i].x);
    opened[2 * i + 1] = ring_.sub(b[i], triples[i].y);
    w.uint(opened[2 * i], ring_.bytes());
    w.uint(opened[2 * i + 1], ring_.bytes());
  }
  if (open_hook_) open_hook_(opened);
  peer_.send(Tag::kMulOpen, w);
  Bytes reply = peer_.recv(Tag::kMulOpen);
  ByteReader r(reply);
  if (r.u32() != n) throw ProtocolError("peer opened a different number of products");

  std::vector<std::uint64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t e = ring_.add(opened[2 * i], ring_.reduce(r.uint(ring_.bytes())));
    std::uint64_t f = ring_.add(opened[2 * i + 1], ring_.reduce(r.uint(ring_.bytes())));
    std::uint64_t c = ring_.add(ring_.add(ring_.mul(f, triples[i].x), ring_.mul(e, triples[i].y)),
                                triples[i].z);
    if (party_ == 1) c = ring_.add(c, ring_.mul(e, f));
    out[i] = c;
  }
  r.expect_done();
  used_ += n;
  rounds_ += 1;
  return out;
}

}  // namespace ppod
