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

#include "ppod/circuits.hpp"

#include <string>

#include "ppod/errors.hpp"
#include "ppod/permutation.hpp"

namespace ppod::circuits {
namespace {

void require_width(std::size_t width) {
  if (width == 0) throw ParameterError("circuit width must be positive");
}

void require_same(const Word& a, const Word& b) {
  if (a.size() != b.size()) throw ParameterError("word widths differ");
}

Word slice(const Word& w, std::size_t index, std::size_t width) {
  return Word(w.begin() + static_cast<std::ptrdiff_t>(index * width),
              w.begin() + static_cast<std::ptrdiff_t>((index + 1) * width));
}

void append(Word& dst, const Word& src) { dst.insert(dst.end(), src.begin(), src.end()); }

// Full-adder chain with 1 AND per bit: c' = c ^ ((x ^ c) & (y ^ c)).
Word ripple(CircuitBuilder& cb, const Word& x, const Word& y, Wire carry) {
  Word out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Wire xc = cb.xor_gate(x[i], carry);
    out[i] = cb.xor_gate(xc, y[i]);
    if (i + 1 < x.size()) carry = cb.xor_gate(carry, cb.and_gate(xc, cb.xor_gate(y[i], carry)));
  }
  return out;
}

}  // namespace

Word add(CircuitBuilder& cb, const Word& a, const Word& b) {
  require_same(a, b);
  return ripple(cb, a, b, CircuitBuilder::kZero);
}

Word sub(CircuitBuilder& cb, const Word& a, const Word& b) {
  require_same(a, b);
  Word nb(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) nb[i] = cb.not_gate(b[i]);
  return ripple(cb, a, nb, CircuitBuilder::kOne);
}

Wire greater_than(CircuitBuilder& cb, const Word& a, const Word& b) {
  require_same(a, b);
  // Carry out of b + ~a + 1 is (b >= a); a > b is its complement.
  Wire carry = CircuitBuilder::kOne;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Wire na = cb.not_gate(a[i]);
    Wire xc = cb.xor_gate(b[i], carry);
    carry = cb.xor_gate(carry, cb.and_gate(xc, cb.xor_gate(na, carry)));
  }
  return cb.not_gate(carry);
}

Word mux(CircuitBuilder& cb, Wire sel, const Word& if_zero, const Word& if_one) {
  require_same(if_zero, if_one);
  Word out(if_zero.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = cb.xor_gate(if_zero[i], cb.and_gate(sel, cb.xor_gate(if_zero[i], if_one[i])));
  return out;
}

Wire equal(CircuitBuilder& cb, const Word& a, const Word& b) {
  require_same(a, b);
  // AND of XNORs.
  Wire acc = CircuitBuilder::kOne;
  for (std::size_t i = 0; i < a.size(); ++i) acc = cb.and_gate(acc, cb.not_gate(cb.xor_gate(a[i], b[i])));
  return acc;
}

Wire or_all(CircuitBuilder& cb, std::span<const Wire> bits) {
  Wire acc = CircuitBuilder::kZero;
  for (Wire w : bits) acc = cb.or_gate(acc, w);
  return acc;
}

Word xor_words(CircuitBuilder& cb, const Word& a, const Word& b) {
  require_same(a, b);
  Word out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = cb.xor_gate(a[i], b[i]);
  return out;
}

void conditional_swap(CircuitBuilder& cb, Record& a, Record& b, Wire swap) {
  auto swap_words = [&](Word& x, Word& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      Wire d = cb.and_gate(swap, cb.xor_gate(x[i], y[i]));
      x[i] = cb.xor_gate(x[i], d);
      y[i] = cb.xor_gate(y[i], d);
    }
  };
  swap_words(a.key, b.key);
  swap_words(a.payload, b.payload);
}

void compare_swap(CircuitBuilder& cb, Record& lo, Record& hi) {
  conditional_swap(cb, lo, hi, greater_than(cb, lo.key, hi.key));
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::pair<std::size_t, std::size_t>> batcher_pairs(std::size_t n) {
  if (n != next_power_of_two(n)) throw ParameterError("Batcher network size must be a power of two");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t p = 1; p < n; p <<= 1)
    for (std::size_t k = p; k >= 1; k >>= 1)
      for (std::size_t j = k % p; j + k < n; j += 2 * k)
        for (std::size_t i = 0; i < k && i + j + k < n; ++i)
          if ((i + j) / (2 * p) == (i + j + k) / (2 * p)) pairs.emplace_back(i + j, i + j + k);
  return pairs;
}

Circuit build_adder(std::size_t width, Destination dest) {
  require_width(width);
  CircuitBuilder cb("adder-" + std::to_string(width));
  auto a = cb.input("a", InputOwner::kGarbler, width);
  auto b = cb.input("b", InputOwner::kEvaluator, width);
  cb.output("sum", dest, add(cb, a, b));
  return std::move(cb).build();
}

Circuit build_subtractor(std::size_t width, Destination dest) {
  require_width(width);
  CircuitBuilder cb("subtractor-" + std::to_string(width));
  auto a = cb.input("a", InputOwner::kGarbler, width);
  auto b = cb.input("b", InputOwner::kEvaluator, width);
  cb.output("diff", dest, sub(cb, a, b));
  return std::move(cb).build();
}

Circuit build_comparator(std::size_t width, Destination dest) {
  require_width(width);
  CircuitBuilder cb("comparator-" + std::to_string(width));
  auto a = cb.input("a", InputOwner::kGarbler, width);
  auto b = cb.input("b", InputOwner::kEvaluator, width);
  cb.output("gt", dest, {greater_than(cb, a, b)});
  return std::move(cb).build();
}

Circuit build_outlier_test(std::size_t width) {
  require_width(width);
  CircuitBuilder cb("outlier-test");
  auto d = cb.input("distance", InputOwner::kGarbler, width);
  auto r = cb.input("radius", InputOwner::kGarbler, width);
  cb.output("outlier", Destination::kBoth, {greater_than(cb, d, r)});
  return std::move(cb).build();
}

Circuit build_inlier_test(std::size_t width) {
  require_width(width);
  CircuitBuilder cb("inlier-test");
  auto d = cb.input("distance", InputOwner::kGarbler, width);
  auto r = cb.input("radius", InputOwner::kGarbler, width);
  cb.output("inlier", Destination::kBoth, {cb.not_gate(greater_than(cb, d, r))});
  return std::move(cb).build();
}

Circuit build_or_reduce(std::size_t count) {
  require_width(count);
  CircuitBuilder cb("or-reduce-" + std::to_string(count));
  auto bits = cb.input("bits", InputOwner::kGarbler, count);
  cb.output("any", Destination::kBoth, {or_all(cb, bits)});
  return std::move(cb).build();
}

Circuit build_max(std::size_t k, std::size_t width) {
  if (k == 0) throw ParameterError("max needs at least one input");
  require_width(width);
  CircuitBuilder cb("max-" + std::to_string(k));
  auto values = cb.input("values", InputOwner::kGarbler, k * width);
  Word best = slice(values, 0, width);
  for (std::size_t j = 1; j < k; ++j) {
    Word v = slice(values, j, width);
    best = mux(cb, greater_than(cb, v, best), best, v);
  }
  cb.output("max", Destination::kReshare, best);
  return std::move(cb).build();
}

Circuit build_sort_shuffle(const SortShuffleShape& shape) {
  if (shape.k == 0 || shape.k > shape.records)
    throw ParameterError("sort-shuffle needs 1 <= k <= W (k=" + std::to_string(shape.k) +
                         ", W=" + std::to_string(shape.records) + ")");
  require_width(shape.key_bits);
  require_width(shape.id_bits);
  const std::size_t W = shape.records, kb = shape.key_bits, ib = shape.id_bits;
  CircuitBuilder cb("sort-shuffle-" + std::to_string(W) + "-" + std::to_string(shape.k));
  auto keys = cb.input("keys", InputOwner::kGarbler, W * kb);
  auto ids = cb.input("ids", InputOwner::kGarbler, W * ib);
  auto control = cb.input("control", InputOwner::kEvaluator, waksman_switch_count(shape.k));

  const std::size_t padded = next_power_of_two(W);
  std::vector<Record> rec(padded);
  for (std::size_t i = 0; i < padded; ++i) {
    if (i < W) {
      rec[i] = {slice(keys, i, kb), slice(ids, i, ib)};
    } else {
      rec[i] = {cb.constant_word(~std::uint64_t(0), kb), cb.constant_word(kInvalidId, ib)};
    }
  }
  for (auto [i, j] : batcher_pairs(padded)) compare_swap(cb, rec[i], rec[j]);

  std::vector<Record> kept(rec.begin(), rec.begin() + static_cast<std::ptrdiff_t>(shape.k));
  std::size_t cursor = 0;
  waksman_apply(kept, control, cursor, [&](Record& a, Record& b, Wire bit) {
    conditional_swap(cb, a, b, bit);
  });

  Word out_keys, out_ids;
  for (const auto& r : kept) {
    append(out_keys, r.key);
    append(out_ids, r.payload);
  }
  cb.output("keys", Destination::kReshare, out_keys);
  cb.output("ids", Destination::kReshare, out_ids);
  return std::move(cb).build();
}

GateCounts sort_shuffle_cost(const SortShuffleShape& shape) { return build_sort_shuffle(shape).counts(); }

Circuit build_randomise(const RandomiseShape& s) {
  if (s.k == 0) throw ParameterError("randomise needs a non-empty list");
  require_width(s.key_bits);
  require_width(s.id_bits);
  require_width(s.flag_bits);
  CircuitBuilder cb("randomise-" + std::to_string(s.k));
  auto keys = cb.input("keys", InputOwner::kGarbler, s.k * s.key_bits);
  auto ids = cb.input("ids", InputOwner::kGarbler, s.k * s.id_bits);
  auto dist_masks = cb.input("dist_masks", InputOwner::kGarbler, s.k * s.key_bits);
  auto id_masks = cb.input("id_masks", InputOwner::kGarbler, s.k * s.id_bits);
  auto flag_masks = cb.input("flag_masks", InputOwner::kGarbler, s.k * s.flag_bits);
  auto magic = cb.input("magic", InputOwner::kEvaluator, s.flag_bits);
  Word dist_shares, id_shares, flags;
  for (std::size_t j = 0; j < s.k; ++j) {
    append(dist_shares, sub(cb, slice(keys, j, s.key_bits), slice(dist_masks, j, s.key_bits)));
    append(id_shares, sub(cb, slice(ids, j, s.id_bits), slice(id_masks, j, s.id_bits)));
    append(flags, xor_words(cb, magic, slice(flag_masks, j, s.flag_bits)));
  }
  cb.output("dist_shares", Destination::kEvaluator, dist_shares);
  cb.output("id_shares", Destination::kEvaluator, id_shares);
  cb.output("flags", Destination::kEvaluator, flags);
  return std::move(cb).build();
}

Circuit build_derandomise(std::size_t n, std::size_t flag_bits) {
  if (n == 0) throw ParameterError("derandomise needs a non-empty list");
  require_width(flag_bits);
  CircuitBuilder cb("derandomise-" + std::to_string(n));
  auto masks = cb.input("flag_masks", InputOwner::kGarbler, n * flag_bits);
  auto flags = cb.input("flags", InputOwner::kEvaluator, n * flag_bits);
  auto magic = cb.input("magic", InputOwner::kEvaluator, flag_bits);
  // flags[j] ^ masks[i] == magic  <=>  (flags[j] ^ magic) == masks[i]; the
  // left side is shared across i.
  std::vector<Word> unmasked(n);
  for (std::size_t j = 0; j < n; ++j) unmasked[j] = xor_words(cb, slice(flags, j, flag_bits), magic);
  Word match;
  match.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    Word m = slice(masks, i, flag_bits);
    for (std::size_t j = 0; j < n; ++j) match.push_back(equal(cb, unmasked[j], m));
  }
  cb.output("match", Destination::kBoth, match);
  return std::move(cb).build();
}

Circuit build_query_assertion(std::size_t count, std::size_t width) {
  if (count == 0) throw ParameterError("query assertion needs at least one distance");
  require_width(width);
  CircuitBuilder cb("query-assertion-" + std::to_string(count));
  auto d = cb.input("distances", InputOwner::kGarbler, count * width);
  auto eps = cb.input("epsilon", InputOwner::kGarbler, width);
  std::vector<Wire> within(count);
  for (std::size_t j = 0; j < count; ++j) within[j] = cb.not_gate(greater_than(cb, slice(d, j, width), eps));
  cb.output("assertion", Destination::kBoth, {or_all(cb, within)});
  return std::move(cb).build();
}

Circuit build_reveal(const std::string& name, std::size_t width) {
  require_width(width);
  CircuitBuilder cb(name);
  auto v = cb.input("value", InputOwner::kGarbler, width);
  cb.output("value", Destination::kBoth, v);
  return std::move(cb).build();
}

}  // namespace ppod::circuits
