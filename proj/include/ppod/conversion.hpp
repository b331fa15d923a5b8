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

#include "ppod/circuit.hpp"
#include "ppod/party.hpp"
#include "ppod/session.hpp"

// Conversions between additive shares and Yao shares.
namespace ppod {

// Inputs "share0" (garbler), "share1" (evaluator), `count` words each;
// output "value" = share0 + share1 per word, as Yao shares.
Circuit build_a2y(std::size_t count, std::size_t width);
// Inputs "value" (Yao shares) and "mask" (garbler); output "masked" =
// value - mask per word, to the evaluator.
Circuit build_y2a(std::size_t count, std::size_t width);

// `shares` is this party's additive share of each value, mod 2^width.
YaoWord a2y(PartyContext& ctx, std::span<const std::uint64_t> shares, std::size_t width);

// Re-shares a Yao word of `count` values additively. The garbler draws a
// fresh uniform mask per value and keeps it as its share.
std::vector<std::uint64_t> y2a(PartyContext& ctx, const YaoWord& value, std::size_t count, std::size_t width);
// As y2a with garbler-chosen masks (ignored on the evaluator). A mask seen
// before by this party is refused with ProtocolError.
std::vector<std::uint64_t> y2a_with_masks(PartyContext& ctx, const YaoWord& value, std::size_t count,
                                          std::size_t width, std::span<const std::uint64_t> masks);

std::uint64_t width_mask(std::size_t width);

}  // namespace ppod
