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

#include "ppod/runner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "ppod/errors.hpp"

namespace ppod {

std::vector<RawPoint> generate_stream(const GenSpec& spec) {
  if (spec.dims == 0 || spec.points == 0) throw ParameterError("gen-data: need points > 0 and dims > 0");
  if (spec.clusters == 0 && spec.outliers < spec.points) throw ParameterError("gen-data: need at least one cluster");
  if (spec.outliers > spec.points) throw ParameterError("gen-data: more outliers than points");
  if (!(spec.spread > 0)) throw ParameterError("gen-data: spread must be positive");
  Prg prg(Prg::derive_seed(spec.seed, "gen-data", 0));
  auto unit = [&] { return static_cast<double>(prg.next_u64() >> 11) * 0x1.0p-53; };
  std::normal_distribution<double> gauss(0.0, spec.spread);

  std::vector<std::vector<double>> centres(spec.clusters, std::vector<double>(spec.dims));
  for (auto& c : centres)
    for (auto& x : c) x = 0.3 + 0.4 * unit();

  // Spread planted outliers over the stream so every window can see some.
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < spec.outliers; ++i) slots.push_back((2 * i + 1) * spec.points / (2 * spec.outliers));
  std::vector<RawPoint> out;
  std::size_t planted = 0, regular = 0;
  for (std::size_t i = 0; i < spec.points; ++i) {
    RawPoint p;
    p.coords.resize(spec.dims);
    if (planted < slots.size() && i == slots[planted]) {
      p.id = kPlantedIdBase + planted++;
      for (auto& x : p.coords) x = unit() < 0.5 ? 0.02 * unit() : 1.0 - 0.02 * unit();
    } else {
      p.id = regular++;
      const auto& c = centres[prg.uniform(spec.clusters)];
      for (std::size_t d = 0; d < spec.dims; ++d) p.coords[d] = std::clamp(c[d] + gauss(prg), 0.0, 1.0);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::uint64_t calibrate_radius(const std::vector<std::vector<std::uint64_t>>& rounded, std::size_t window,
                               std::size_t k, double quantile) {
  if (rounded.size() < window || window <= k) throw ParameterError("calibrate: window too small");
  if (!(quantile > 0 && quantile <= 1)) throw ParameterError("calibrate: quantile must be in (0, 1]");
  std::vector<oracle::PlainPoint> pts;
  for (std::size_t i = 0; i < window; ++i) pts.push_back({i, rounded[i]});
  std::vector<std::uint64_t> kd;
  for (std::size_t i = 0; i < window; ++i) kd.push_back(oracle::k_distance(pts, i, k));
  std::sort(kd.begin(), kd.end());
  auto idx = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(kd.size()))) - 1;
  return kd[std::min(idx, kd.size() - 1)];
}

std::vector<oracle::PlainPoint> plain_points(const GatewayFeed& feed) {
  std::vector<oracle::PlainPoint> out;
  for (std::size_t i = 0; i < feed.ids().size(); ++i) out.push_back({feed.ids()[i], feed.rounded()[i]});
  return out;
}

OracleVerdict verify_against_oracle(const GatewayFeed& feed, const PartyRun& run) {
  const auto& c = feed.config();
  auto stream = plain_points(feed);
  oracle::StreamParams sp{c.window, c.slide, c.k, c.radius, c.ring_bits};
  auto replay = oracle::protocol_replay(stream, sp);
  OracleVerdict v;
  v.checked = true;
  const std::size_t steps = std::max(replay.outliers.size(), run.outliers.size());
  for (std::size_t i = 0; i < steps; ++i)
    if (i >= replay.outliers.size() || i >= run.outliers.size() || replay.outliers[i] != run.outliers[i])
      v.outlier_mismatches.push_back(i);
  const std::size_t slides = std::max(replay.knn_ids.size(), run.knn_ids.size());
  for (std::size_t i = 0; i < slides; ++i)
    if (i >= replay.knn_ids.size() || i >= run.knn_ids.size() || replay.knn_ids[i] != run.knn_ids[i])
      v.knn_mismatches.push_back(i);

  // Queries run against the final outlier set.
  std::vector<oracle::PlainPoint> final_outliers;
  if (!replay.outliers.empty())
    for (const auto& p : stream)
      if (replay.outliers.back().count(p.id)) final_outliers.push_back(p);
  const auto& qs = feed.rounded_queries();
  for (std::size_t i = 0; i < qs.size(); ++i)
    if (i >= run.answers.size() || oracle::query(final_outliers, qs[i], c.epsilon) != run.answers[i])
      v.query_mismatches.push_back(i);

  auto textbook = oracle::textbook_stream(stream, sp);
  for (std::size_t i = 0; i < std::min(textbook.size(), replay.outliers.size()); ++i)
    if (textbook[i] != replay.outliers[i]) ++v.textbook_divergent_steps;
  v.pass = v.outlier_mismatches.empty() && v.knn_mismatches.empty() && v.query_mismatches.empty();
  return v;
}

RunReport run_session(const GatewayFeed& feed, const SessionOptions& options) {
  const auto& cfg = feed.config();
  require_supported(options.ot_mode);
  DealerService dealer({options.seed, cfg.ring_bits, options.ot_mode},
                       [&](int party, std::span<const std::uint8_t> req) { return feed.handle(party, req); });
  PartyOptions po;
  po.ring_bits = cfg.ring_bits;
  po.seed = options.seed;
  po.ot_mode = options.ot_mode;
  po.pool = options.pool;
  RunReport report;
  report.config = cfg;
  report.options = options;
  TwoPartyOptions tpo;
  tpo.transport = options.transport;
  tpo.timeout = options.timeout;
  auto start = std::chrono::steady_clock::now();
  run_two_party(
      dealer,
      [&](int party, Channel& peer, Channel& d) {
        PartyContext ctx(party, peer, d, po);
        report.parties[party] = run_party(ctx, options.record_decodes);
      },
      tpo);
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  const auto& a = report.parties[0];
  const auto& b = report.parties[1];
  if (a.outliers != b.outliers || a.knn_ids != b.knn_ids || a.answers != b.answers)
    throw ProtocolError("parties disagree on public outputs");
  if (options.verify_oracle) report.oracle = verify_against_oracle(feed, a);
  return report;
}

namespace {

nlohmann::json counters_json(const WorkCounters& c) {
  return {{"distance_evaluations", c.distance_evaluations}, {"knn_calls", c.knn_calls},
          {"sort_shuffles", c.sort_shuffles},               {"resorts", c.resorts},
          {"resort_records", c.resort_records},             {"randomise_calls", c.randomise_calls},
          {"derandomise_calls", c.derandomise_calls}};
}

nlohmann::json counts_json(const PhaseCounters& p) {
  return {{"bytes_sent", p.bytes_sent},
          {"bytes_received", p.bytes_received},
          {"messages_sent", p.messages_sent},
          {"messages_received", p.messages_received}};
}

}  // namespace

nlohmann::json party_json(const PartyRun& run) {
  nlohmann::json j;
  j["params"] = {{"dims", run.params.dims},   {"window", run.params.window}, {"slide", run.params.slide},
                 {"k", run.params.k},         {"points", run.params.points}, {"queries", run.params.queries},
                 {"ring_bits", run.params.ring_bits}};
  for (const auto& [name, ms] : run.phase_ms) j["wall_ms"][name] = ms;
  j["metrics"]["total"] = counts_json(run.metrics.total);
  for (const auto& [name, p] : run.metrics.phases) j["metrics"]["phases"][name] = counts_json(p);
  j["counters"]["total"] = counters_json(run.counters);
  j["counters"]["initialise"] = counters_json(run.init_counters);
  j["counters"]["slides"] = nlohmann::json::array();
  for (const auto& c : run.slide_counters) j["counters"]["slides"].push_back(counters_json(c));
  j["triples"] = run.triples;
  j["and_gates"] = run.and_gates;
  j["table_bytes"] = run.table_bytes;
  for (const auto& [name, c] : run.circuits)
    j["circuits"][name] = {{"and", c.and_gates}, {"xor", c.xor_gates}, {"not", c.not_gates}, {"const", c.const_gates}};
  j["steps"] = nlohmann::json::array();
  for (std::size_t i = 0; i < run.outliers.size(); ++i) {
    nlohmann::json s;
    s["step"] = i == 0 ? "initialise" : "slide " + std::to_string(i);
    s["outliers"] = std::vector<std::uint64_t>(run.outliers[i].begin(), run.outliers[i].end());
    if (i > 0) s["knn_ids"] = run.knn_ids[i - 1];
    j["steps"].push_back(std::move(s));
  }
  j["answers"] = run.answers;
  j["leftover_points"] = run.leftover_points;
  std::map<std::string, std::uint64_t> leak;
  for (const auto& e : run.decodes) ++leak[to_string(classify_decode(e))];
  j["decodes"] = leak;
  return j;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["config"] = {{"dims", config.dims()},     {"l_d", config.l_d},         {"ring_bits", config.ring_bits},
                 {"window", config.window},   {"slide", config.slide},     {"k", config.k},
                 {"radius", config.radius},   {"epsilon", config.epsilon}};
  j["seed"] = options.seed;
  j["transport"] = options.transport == TransportKind::kTcp ? "tcp" : "inproc";
  j["mode"] = to_string(options.ot_mode);
  j["wall_ms"] = wall_ms;
  // Public outputs are identical on both parties; show them once.
  auto p0 = party_json(parties[0]);
  auto p1 = party_json(parties[1]);
  j["steps"] = p0["steps"];
  j["answers"] = p0["answers"];
  j["phases"] = nlohmann::json::object();
  for (const auto& phase : {"preprocess", "setup", "initialise", "update", "query"}) {
    nlohmann::json ph;
    ph["wall_ms"] = parties[0].phase_ms.count(phase) ? parties[0].phase_ms.at(phase) : 0.0;
    PhaseCounters bytes;
    for (const auto& pr : parties) bytes += pr.metrics.phase_tree(phase);
    ph["bytes_sent"] = bytes.bytes_sent;
    ph["messages_sent"] = bytes.messages_sent;
    j["phases"][phase] = ph;
  }
  for (auto* key : {"steps", "answers"}) p0.erase(key), p1.erase(key);
  j["parties"] = {p0, p1};
  if (oracle.checked) {
    j["oracle"] = {{"verdict", oracle.pass ? "pass" : "fail"},
                   {"outlier_mismatches", oracle.outlier_mismatches},
                   {"knn_mismatches", oracle.knn_mismatches},
                   {"query_mismatches", oracle.query_mismatches},
                   {"textbook_divergent_steps", oracle.textbook_divergent_steps}};
  } else {
    j["oracle"] = {{"verdict", "skipped"}};
  }
  return j;
}

}  // namespace ppod
