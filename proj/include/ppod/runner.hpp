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
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppod/gateway.hpp"
#include "ppod/oracle.hpp"
#include "ppod/ot.hpp"
#include "ppod/party.hpp"
#include "ppod/protocol.hpp"

// End-to-end sessions: synthetic data, the two servers plus dealer, oracle
// verification and the run report.
namespace ppod {

struct GenSpec {
  std::size_t points = 100;
  std::size_t dims = 2;
  std::size_t clusters = 3;
  std::size_t outliers = 3;
  double spread = 0.03;  // cluster standard deviation, unit cube
  std::uint64_t seed = 1;
};

// Gaussian clusters inside [0.2, 0.8]^dims plus isolated points near the
// cube's corners. Planted outliers get ids >= 1000000, in order. Deterministic
// per seed.
std::vector<RawPoint> generate_stream(const GenSpec& spec);

// Planted outlier ids use this offset.
inline constexpr std::uint64_t kPlantedIdBase = 1000000;

// Largest gap-aware radius: the `quantile` of the initial window's
// k-distances (rounded domain). quantile in (0, 1].
std::uint64_t calibrate_radius(const std::vector<std::vector<std::uint64_t>>& rounded, std::size_t window,
                               std::size_t k, double quantile);

std::vector<oracle::PlainPoint> plain_points(const GatewayFeed& feed);

struct SessionOptions {
  std::uint64_t seed = 1;
  TransportKind transport = TransportKind::kInproc;
  OtMode ot_mode = OtMode::kIdeal;
  bool verify_oracle = false;
  bool record_decodes = true;
  std::chrono::milliseconds timeout = kDefaultRecvTimeout;
  TriplePoolConfig pool;
};

struct OracleVerdict {
  bool checked = false;
  bool pass = false;
  std::vector<std::size_t> outlier_mismatches;  // step indices
  std::vector<std::size_t> knn_mismatches;      // slide indices
  std::vector<std::size_t> query_mismatches;
  std::size_t textbook_divergent_steps = 0;
};

struct RunReport {
  GatewayConfig config;
  SessionOptions options;
  std::array<PartyRun, 2> parties;
  OracleVerdict oracle;
  double wall_ms = 0;

  nlohmann::json to_json() const;
};

// Runs both parties and the dealer in this process. Throws if the parties
// disagree on any public output.
RunReport run_session(const GatewayFeed& feed, const SessionOptions& options);

// Compares a party run against the plaintext oracles.
OracleVerdict verify_against_oracle(const GatewayFeed& feed, const PartyRun& run);

nlohmann::json party_json(const PartyRun& run);

}  // namespace ppod
