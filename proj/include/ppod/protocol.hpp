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

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ppod/gateway.hpp"
#include "ppod/party.hpp"
#include "ppod/secure_knn.hpp"
#include "ppod/session.hpp"

// Server-side outlier detection over a count-based sliding window:
// initialisation, update on each slide, and outlier queries.
namespace ppod {

struct SharedPoint {
  std::uint64_t id = 0;
  std::vector<std::uint64_t> coords;  // this party's additive shares
  std::uint64_t count = 0;            // arrival counting number C_p
  StoredList knn;                     // randomised kNN list D
  std::uint64_t kdist = 0;            // additive share of the k-distance
};

// Active iff c_start < count <= c_end.
struct WindowState {
  std::deque<std::uint64_t> active;  // ids in arrival order
  std::map<std::uint64_t, SharedPoint> points;
  std::set<std::uint64_t> outliers;
  std::uint64_t c_start = 0;
  std::uint64_t c_end = 0;
};

struct ProtocolParams {
  std::size_t window = 0;
  std::size_t slide = 0;
  std::size_t k = 0;
  std::size_t dims = 0;
};

// Leakage classes a decode can belong to.
enum class LeakageKind : std::uint8_t {
  kOutlierDecision,
  kQueryAssertion,
  kKnnIds,
  kPairing,
  kMaskedShare,  // evaluator's own additive share, masked by the garbler
  kOther,
};
const char* to_string(LeakageKind kind);
LeakageKind classify_decode(const DecodeEvent& event);

class PpodParty {
 public:
  PpodParty(PartyContext& ctx, ProtocolParams params);

  // Converts this party's share of R to Yao form once per session.
  void setup(std::uint64_t radius_share);
  // Exactly `window` points; returns the outlier ids.
  const std::set<std::uint64_t>& initialise(std::vector<SharedPoint> batch);
  // Exactly `slide` points, in arrival order.
  const std::set<std::uint64_t>& slide(std::vector<SharedPoint> arrivals);
  // True iff some current outlier lies within epsilon of q.
  bool query(std::span<const std::uint64_t> q, std::uint64_t epsilon_share);

  const WindowState& window() const { return state_; }
  const std::set<std::uint64_t>& outliers() const { return state_.outliers; }
  // kNN ids opened for each arrival of the last slide, in arrival order.
  const std::vector<std::vector<std::uint64_t>>& last_knn_ids() const { return last_knn_ids_; }
  const WorkCounters& counters() const { return knn_.counters(); }
  SecureKnn& knn() { return knn_; }

 private:
  void insert(SharedPoint p);
  void update_neighbour(SharedPoint& a, const KnnYaoList& temp, std::size_t j, std::uint64_t q_id);

  PartyContext& ctx_;
  ProtocolParams params_;
  SecureKnn knn_;
  YaoWord radius_;
  bool ready_ = false;
  bool initialised_ = false;
  WindowState state_;
  std::vector<std::vector<std::uint64_t>> last_knn_ids_;
};

// Everything one party observes while running a full stream.
struct PartyRun {
  SessionParams params;
  // Outlier ids after initialisation (index 0) and after each slide.
  std::vector<std::set<std::uint64_t>> outliers;
  // Per slide, per arrival: opened kNN ids (sorted).
  std::vector<std::vector<std::vector<std::uint64_t>>> knn_ids;
  std::vector<bool> answers;
  std::map<std::string, double> phase_ms;
  // Per-slide counter deltas.
  WorkCounters init_counters;
  std::vector<WorkCounters> slide_counters;
  WorkCounters counters;
  ChannelMetrics metrics;
  std::vector<DecodeEvent> decodes;
  std::map<std::string, GateCounts> circuits;
  std::uint64_t triples = 0;
  std::uint64_t and_gates = 0;
  std::uint64_t table_bytes = 0;
  std::uint64_t leftover_points = 0;
};

// Fetches the stream through the gateway and runs setup, initialise, every
// full slide and the queries.
PartyRun run_party(PartyContext& ctx, bool record_decodes = true);

}  // namespace ppod
