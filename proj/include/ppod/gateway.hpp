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
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ppod/bytes.hpp"
#include "ppod/crypto.hpp"
#include "ppod/sharing.hpp"

// The trusted gateway: parameters, CSV input, normalisation, rounding and
// additive sharing of points, thresholds and queries.
namespace ppod {

enum class BoundsPolicy : std::uint8_t { kClamp, kReject };

struct Bounds {
  double min = 0.0;
  double max = 1.0;
  bool operator==(const Bounds&) const = default;
};

struct GatewayConfig {
  std::vector<Bounds> bounds;  // one per dimension
  unsigned l_d = 15;           // rounding factor
  unsigned ring_bits = 64;
  std::size_t window = 40;
  std::size_t slide = 5;
  std::size_t k = 5;
  // Thresholds live in the rounded squared-distance domain.
  std::uint64_t radius = 0;
  std::uint64_t epsilon = 0;
  BoundsPolicy policy = BoundsPolicy::kClamp;

  std::size_t dims() const { return bounds.size(); }
  // Throws ParameterError on any inconsistency, including a possible
  // distance wrap: dims * 2^(2 l_d + 2) must stay below 2^ring_bits.
  void validate() const;
  bool operator==(const GatewayConfig&) const = default;
};

// True when dims * 2^(2 l_d + 2) < 2^ring_bits.
bool distance_fits(std::size_t dims, unsigned l_d, unsigned ring_bits);

// "desk" (W=40, S=5, k=5) or "large" (W=400, S=20, k=50, R=25000), unit
// bounds on `dims` dimensions.
GatewayConfig profile_config(const std::string& profile, std::size_t dims);

// Key-value text, one "key = value" per line, '#' comments. Keys: dims,
// bounds ("lo:hi" per dimension, comma separated; a single entry is
// repeated over dims), l_d, ring_bits, window, slide, k, radius, epsilon,
// policy (clamp|reject), profile (applied first).
GatewayConfig parse_config(const std::string& text);
GatewayConfig load_config(const std::string& path);
std::string format_config(const GatewayConfig& config);

struct RawPoint {
  std::uint64_t id = 0;
  std::vector<double> coords;
};

// One point per row. A header row is detected when any field is not
// numeric; a column named "id" then supplies ids. Rows without ids get
// their 0-based row index. Throws InputError on malformed rows.
std::vector<RawPoint> read_csv(std::istream& in);
std::vector<RawPoint> load_csv(const std::string& path);
void write_csv(std::ostream& out, const std::vector<RawPoint>& points);

// Normalise then round one coordinate: floor((x - min)/(max - min) * 2^l_d).
std::uint64_t round_coordinate(double x, const Bounds& b, unsigned l_d, BoundsPolicy policy);
std::vector<std::uint64_t> round_point(std::span<const double> coords, const GatewayConfig& config);

struct SharedPointInput {
  std::uint64_t id = 0;
  std::array<std::vector<std::uint64_t>, 2> coords;
};

struct SharedQueryInput {
  std::array<std::vector<std::uint64_t>, 2> coords;
  std::array<std::uint64_t, 2> epsilon{};
};

// Public session parameters plus the party's share of R.
struct SessionParams {
  std::size_t dims = 0;
  std::size_t window = 0;
  std::size_t slide = 0;
  std::size_t k = 0;
  unsigned ring_bits = 64;
  std::uint64_t points = 0;
  std::uint64_t queries = 0;
  std::uint64_t radius_share = 0;
};

enum class InputKind : std::uint8_t { kParams = 1, kPoints = 2, kQuery = 3 };

Bytes encode_params_request();
Bytes encode_points_request(std::uint64_t first, std::uint32_t count);
Bytes encode_query_request(std::uint64_t index);

SessionParams decode_params(std::span<const std::uint8_t> payload);
// Each entry: id plus this party's coordinate shares.
std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> decode_points(std::span<const std::uint8_t> payload);
// Coordinates, then the epsilon share last.
std::pair<std::vector<std::uint64_t>, std::uint64_t> decode_query(std::span<const std::uint8_t> payload);

// Shares everything up front so both parties' requests see one split.
class GatewayFeed {
 public:
  GatewayFeed(GatewayConfig config, const std::vector<RawPoint>& stream,
              const std::vector<std::vector<double>>& queries, std::uint64_t seed);

  const GatewayConfig& config() const { return config_; }
  // Rounded (plaintext) coordinates in stream order, for oracles.
  const std::vector<std::vector<std::uint64_t>>& rounded() const { return rounded_; }
  const std::vector<std::uint64_t>& ids() const { return ids_; }
  const std::vector<std::vector<std::uint64_t>>& rounded_queries() const { return rounded_queries_; }

  // Answers one encoded request for `party`.
  Bytes handle(int party, std::span<const std::uint8_t> request) const;

 private:
  GatewayConfig config_;
  Ring ring_;
  std::vector<std::uint64_t> ids_;
  std::vector<std::vector<std::uint64_t>> rounded_;
  std::vector<std::vector<std::uint64_t>> rounded_queries_;
  std::vector<SharedPointInput> points_;
  std::vector<SharedQueryInput> queries_;
  std::array<std::uint64_t, 2> radius_{};
};

}  // namespace ppod
