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
#include <functional>
#include <optional>

#include "ppod/gateway.hpp"
#include "ppod/party.hpp"

namespace ppod::testing {

// Runs `body` for both parties over in-process channels with a dealer.
inline void two_party(const std::function<void(PartyContext&)>& body, std::uint64_t seed = 1,
                      unsigned ring_bits = 64, TwoPartyOptions options = {},
                      DealerService::InputHandler inputs = {}) {
  DealerService dealer({seed, ring_bits, OtMode::kIdeal}, std::move(inputs));
  PartyOptions po;
  po.ring_bits = ring_bits;
  po.seed = seed;
  po.pool = {64, 512};
  run_two_party(
      dealer,
      [&](int party, Channel& peer, Channel& d) {
        PartyContext ctx(party, peer, d, po);
        body(ctx);
      },
      options);
}

// Config whose rounding is the identity on integers in [0, 2^l_d].
inline GatewayConfig int_config(std::size_t dims, std::size_t window, std::size_t slide, std::size_t k,
                                std::uint64_t radius, std::uint64_t epsilon = 0, unsigned l_d = 10) {
  GatewayConfig c;
  c.bounds.assign(dims, Bounds{0.0, static_cast<double>(1u << l_d)});
  c.l_d = l_d;
  c.window = window;
  c.slide = slide;
  c.k = k;
  c.radius = radius;
  c.epsilon = epsilon;
  return c;
}

inline std::vector<RawPoint> int_points(const std::vector<std::vector<double>>& coords,
                                        std::vector<std::uint64_t> ids = {}) {
  std::vector<RawPoint> out;
  for (std::size_t i = 0; i < coords.size(); ++i) out.push_back({ids.empty() ? i : ids[i], coords[i]});
  return out;
}

}  // namespace ppod::testing
