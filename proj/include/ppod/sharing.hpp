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
#include <deque>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ppod/crypto.hpp"
#include "ppod/errors.hpp"

namespace ppod {

class Channel;

// Z_{2^l} for l in [1, 64]. All share arithmetic goes through here.
class Ring {
 public:
  explicit Ring(unsigned bits = 64);

  unsigned bits() const { return bits_; }
  unsigned bytes() const { return (bits_ + 7) / 8; }
  std::uint64_t mask() const { return mask_; }
  bool contains(std::uint64_t v) const { return (v & ~mask_) == 0; }

  std::uint64_t reduce(std::uint64_t v) const { return v & mask_; }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return (a + b) & mask_; }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return (a - b) & mask_; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return (a * b) & mask_; }
  std::uint64_t neg(std::uint64_t a) const { return (0 - a) & mask_; }
  std::uint64_t random(Prg& prg) const { return prg.next_u64() & mask_; }

  bool operator==(const Ring&) const = default;

 private:
  unsigned bits_;
  std::uint64_t mask_;
};

struct RingShare {
  std::uint64_t value = 0;
  std::uint8_t party = 0;
  std::uint8_t bits = 64;

  bool operator==(const RingShare&) const = default;
};

// Splits `secret` into two additive shares; share0 is uniform.
std::pair<RingShare, RingShare> share(std::uint64_t secret, const Ring& ring, Prg& prg);
std::uint64_t reconstruct(const RingShare& s0, const RingShare& s1);

// Local operations on one party's shares.
RingShare add(const RingShare& a, const RingShare& b);
RingShare sub(const RingShare& a, const RingShare& b);
// Adds a public constant; only party 0 shifts its share.
RingShare add_public(const RingShare& a, std::uint64_t c);
RingShare mul_public(const RingShare& a, std::uint64_t c);

// One party's view of a Beaver triple.
struct TripleShare {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  std::uint64_t z = 0;
  std::uint64_t index = 0;  // position in the session-wide triple sequence
};

struct TripleLists {
  std::vector<TripleShare> party0;
  std::vector<TripleShare> party1;
};

// Trusted-dealer triple generation. Triple i carries index first_index + i.
TripleLists gen_triples(std::size_t count, const Ring& ring, Prg& prg,
                        std::uint64_t first_index = 0);

// Deterministic per-batch generation used by the dealer service: both
// parties asking for batch `batch` get halves of the same triples.
TripleLists gen_triple_batch(std::uint64_t dealer_seed, std::uint64_t batch,
                             std::uint64_t first_index, std::size_t count, const Ring& ring);

struct TriplePoolConfig {
  std::size_t low_water = 1024;
  std::size_t refill = 8192;
};

// Per-party queue of precomputed triples. Both parties run the same refill
// schedule, so triple i on one side pairs with triple i on the other.
class TriplePool {
 public:
  // fetch(batch_index, first_index, count) supplies `count` triples.
  using Source =
      std::function<std::vector<TripleShare>(std::uint64_t, std::uint64_t, std::size_t)>;

  TriplePool(Source source, TriplePoolConfig config = {});

  // Removes and returns the next `n` triples, refilling first when the
  // remaining stock would drop under the low-water mark.
  std::vector<TripleShare> take(std::size_t n);
  TripleShare take_one() { return take(1).front(); }

  std::size_t available() const { return queue_.size(); }
  std::uint64_t consumed() const { return consumed_; }
  std::uint64_t batches() const { return batches_; }

 private:
  void refill(std::size_t at_least);

  Source source_;
  TriplePoolConfig config_;
  std::deque<TripleShare> queue_;
  std::uint64_t consumed_ = 0;
  std::uint64_t next_index_ = 0;
  std::uint64_t batches_ = 0;
};

// Beaver multiplication for one party over a peer channel. Each call is one
// round: both sides send (e_i, f_i) for the whole batch, then combine.
// Wire payload: u32 count, then per element e||f as ring-width LE bytes.
class Multiplier {
 public:
  Multiplier(const Ring& ring, int party, Channel& peer, TriplePool& pool);

  std::vector<std::uint64_t> mul(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
  std::uint64_t mul(std::uint64_t a, std::uint64_t b);
  // Same as mul() but with caller-supplied triples. Throws ProtocolError if a
  // triple index is not strictly above every index already consumed.
  std::vector<std::uint64_t> mul_with(std::span<const std::uint64_t> a,
                                      std::span<const std::uint64_t> b,
                                      std::span<const TripleShare> triples);

  // Optional hook receiving this party's outgoing (e, f) values.
  void on_open(std::function<void(std::span<const std::uint64_t>)> hook) { open_hook_ = std::move(hook); }

  const Ring& ring() const { return ring_; }
  int party() const { return party_; }
  std::uint64_t triples_used() const { return used_; }
  std::uint64_t rounds() const { return rounds_; }

 private:
  Ring ring_;
  int party_;
  Channel& peer_;
  TriplePool& pool_;
  std::function<void(std::span<const std::uint64_t>)> open_hook_;
  bool any_used_ = false;
  std::uint64_t last_index_ = 0;
  std::uint64_t used_ = 0;
  std::uint64_t rounds_ = 0;
};

}  // namespace ppod
