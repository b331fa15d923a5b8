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

#include "ppod/conversion.hpp"

#include <string>

#include "ppod/circuits.hpp"
#include "ppod/errors.hpp"

namespace ppod {
namespace {

std::string key(const char* kind, std::size_t count, std::size_t width) {
  return std::string(kind) + "/" + std::to_string(count) + "/" + std::to_string(width);
}

void check_width(std::size_t width) {
  if (width == 0 || width > 64) throw ParameterError("conversion width must be in 1..64");
}

}  // namespace

std::uint64_t width_mask(std::size_t width) { return width >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << width) - 1; }

Circuit build_a2y(std::size_t count, std::size_t width) {
  check_width(width);
  if (count == 0) throw ParameterError("a2y needs at least one value");
  CircuitBuilder cb("a2y-" + std::to_string(count) + "x" + std::to_string(width));
  auto s0 = cb.input("share0", InputOwner::kGarbler, count * width);
  auto s1 = cb.input("share1", InputOwner::kEvaluator, count * width);
  Word out;
  out.reserve(count * width);
  for (std::size_t i = 0; i < count; ++i) {
    Word a(s0.begin() + i * width, s0.begin() + (i + 1) * width);
    Word b(s1.begin() + i * width, s1.begin() + (i + 1) * width);
    auto sum = circuits::add(cb, a, b);
    out.insert(out.end(), sum.begin(), sum.end());
  }
  cb.output("value", Destination::kReshare, out);
  return std::move(cb).build();
}

Circuit build_y2a(std::size_t count, std::size_t width) {
  check_width(width);
  if (count == 0) throw ParameterError("y2a needs at least one value");
  CircuitBuilder cb("y2a-" + std::to_string(count) + "x" + std::to_string(width));
  auto v = cb.input("value", InputOwner::kGarbler, count * width);
  auto m = cb.input("mask", InputOwner::kGarbler, count * width);
  Word out;
  out.reserve(count * width);
  for (std::size_t i = 0; i < count; ++i) {
    Word a(v.begin() + i * width, v.begin() + (i + 1) * width);
    Word b(m.begin() + i * width, m.begin() + (i + 1) * width);
    auto diff = circuits::sub(cb, a, b);
    out.insert(out.end(), diff.begin(), diff.end());
  }
  cb.output("masked", Destination::kEvaluator, out);
  return std::move(cb).build();
}

YaoWord a2y(PartyContext& ctx, std::span<const std::uint64_t> shares, std::size_t width) {
  check_width(width);
  const std::uint64_t mask = width_mask(width);
  std::vector<std::uint64_t> v(shares.begin(), shares.end());
  for (auto& x : v) {
    if (x & ~mask) throw RangeError("a2y: share does not fit in " + std::to_string(width) + " bits");
  }
  const auto& c = ctx.circuit(key("a2y", v.size(), width), [&] { return build_a2y(v.size(), width); });
  std::map<std::string, GcInput> in;
  in[ctx.is_garbler() ? "share0" : "share1"] = GcInput::plain(pack_bits(v, width));
  return ctx.yao().run(c, in).shared.at("value");
}

std::vector<std::uint64_t> y2a(PartyContext& ctx, const YaoWord& value, std::size_t count, std::size_t width) {
  std::vector<std::uint64_t> masks;
  if (ctx.is_garbler()) {
    masks.resize(count);
    const std::uint64_t m = width_mask(width);
    for (auto& x : masks) x = ctx.prg().next_u64() & m;
  }
  return y2a_with_masks(ctx, value, count, width, masks);
}

std::vector<std::uint64_t> y2a_with_masks(PartyContext& ctx, const YaoWord& value, std::size_t count,
                                          std::size_t width, std::span<const std::uint64_t> masks) {
  check_width(width);
  if (value.size() != count * width)
    throw ParameterError("y2a: Yao word has " + std::to_string(value.size()) + " bits, expected " +
                         std::to_string(count * width));
  const auto& c = ctx.circuit(key("y2a", count, width), [&] { return build_y2a(count, width); });
  std::map<std::string, GcInput> in;
  in["value"] = GcInput::yao(value);
  if (ctx.is_garbler()) {
    if (masks.size() != count) throw ParameterError("y2a: one mask per value required");
    std::vector<std::uint64_t> m(masks.begin(), masks.end());
    for (auto x : m) {
      if (x & ~width_mask(width)) throw RangeError("y2a: mask exceeds width");
      ctx.masks().claim(x);
    }
    in["mask"] = GcInput::plain(pack_bits(m, width));
    ctx.yao().run(c, in);
    return m;
  }
  auto out = ctx.yao().run(c, in);
  return unpack_bits(out.bits.at("masked"), width);
}

}  // namespace ppod
