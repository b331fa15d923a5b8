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

#include "ppod/protocol.hpp"

#include <algorithm>
#include <chrono>

#include "ppod/circuits.hpp"
#include "ppod/conversion.hpp"
#include "ppod/errors.hpp"

namespace ppod {

const char* to_string(LeakageKind kind) {
  switch (kind) {
    case LeakageKind::kOutlierDecision: return "outlier-decision";
    case LeakageKind::kQueryAssertion: return "query-assertion";
    case LeakageKind::kKnnIds: return "knn-ids";
    case LeakageKind::kPairing: return "pairing";
    case LeakageKind::kMaskedShare: return "masked-share";
    case LeakageKind::kOther: return "other";
  }
  return "other";
}

LeakageKind classify_decode(const DecodeEvent& e) {
  auto starts = [&](const char* prefix) { return e.circuit.rfind(prefix, 0) == 0; };
  if (starts("outlier-test") || starts("inlier-test")) return LeakageKind::kOutlierDecision;
  if (starts("query-assertion-")) return LeakageKind::kQueryAssertion;
  if (starts("reveal-knn-ids")) return LeakageKind::kKnnIds;
  if (starts("derandomise-")) return LeakageKind::kPairing;
  if ((starts("y2a-") || starts("randomise-")) && e.destination == Destination::kEvaluator && e.party == 1)
    return LeakageKind::kMaskedShare;
  return LeakageKind::kOther;
}

PpodParty::PpodParty(PartyContext& ctx, ProtocolParams params) : ctx_(ctx), params_(params), knn_(ctx) {
  if (params_.k == 0 || params_.slide == 0 || params_.slide >= params_.window || params_.k > params_.window - params_.slide)
    throw ParameterError("protocol: need 0 < k <= window - slide and 0 < slide < window");
}

void PpodParty::setup(std::uint64_t radius_share) {
  ctx_.set_phase("setup");
  std::uint64_t r[1] = {radius_share};
  radius_ = a2y(ctx_, r, knn_.key_bits());
  ready_ = true;
}

void PpodParty::insert(SharedPoint p) {
  if (p.coords.size() != params_.dims) throw ParameterError("protocol: point has the wrong dimension");
  if (state_.points.count(p.id)) throw ParameterError("protocol: duplicate point id " + std::to_string(p.id));
  p.count = ++state_.c_end;
  state_.active.push_back(p.id);
  auto id = p.id;
  state_.points.emplace(id, std::move(p));
}

const std::set<std::uint64_t>& PpodParty::initialise(std::vector<SharedPoint> batch) {
  if (!ready_) throw ProtocolError("protocol: setup must run before initialise");
  if (initialised_) throw ProtocolError("protocol: already initialised");
  if (batch.size() != params_.window)
    throw ParameterError("initialise needs exactly " + std::to_string(params_.window) + " points, got " +
                         std::to_string(batch.size()));
  ctx_.set_phase("initialise");
  for (auto& p : batch) insert(std::move(p));
  for (std::uint64_t pid : state_.active) {
    std::vector<std::span<const std::uint64_t>> qs;
    std::vector<std::uint64_t> ids;
    for (std::uint64_t other : state_.active) {
      if (other == pid) continue;
      qs.emplace_back(state_.points.at(other).coords);
      ids.push_back(other);
    }
    SharedPoint& p = state_.points.at(pid);
    auto temp = knn_.knn(p.coords, qs, ids, params_.k);
    p.knn = knn_.randomise(temp);
    auto dist = knn_.kdist(temp);
    p.kdist = y2a(ctx_, dist, 1, knn_.key_bits()).at(0);
    if (knn_.outlier_test(dist, radius_)) state_.outliers.insert(pid);
  }
  initialised_ = true;
  return state_.outliers;
}

void PpodParty::update_neighbour(SharedPoint& a, const KnnYaoList& temp, std::size_t j, std::uint64_t q_id) {
  knn_.derandomise(a.knn);
  const std::uint64_t id_mask = width_mask(circuits::kIdBits);
  std::vector<std::uint64_t> dist, ids;
  for (const auto& e : a.knn.entries) {
    dist.push_back(e.dist);
    ids.push_back(e.id & id_mask);
  }
  knn_.note_resort(dist.size());
  dist.push_back(y2a(ctx_, temp.key(j), 1, knn_.key_bits()).at(0));
  // The new id is public: the garbler holds it, the evaluator holds zero.
  ids.push_back(ctx_.is_garbler() ? q_id : 0);
  auto resorted = knn_.sort_shuffle_shared_ids(dist, ids, params_.k);
  a.knn = knn_.randomise(resorted);
  auto kd = knn_.kdist(resorted);
  a.kdist = y2a(ctx_, kd, 1, knn_.key_bits()).at(0);
  if (knn_.inlier_test(kd, radius_)) state_.outliers.erase(a.id);
}

const std::set<std::uint64_t>& PpodParty::slide(std::vector<SharedPoint> arrivals) {
  if (!initialised_) throw ProtocolError("protocol: initialise must run before slide");
  if (arrivals.size() != params_.slide)
    throw ParameterError("slide needs exactly " + std::to_string(params_.slide) + " points, got " +
                         std::to_string(arrivals.size()));
  // Expire the oldest points by counting number.
  for (std::size_t i = 0; i < params_.slide; ++i) {
    std::uint64_t old = state_.active.front();
    state_.active.pop_front();
    state_.outliers.erase(old);
    state_.points.erase(old);
    ++state_.c_start;
  }
  last_knn_ids_.clear();
  for (auto& q : arrivals) {
    if (state_.points.count(q.id)) throw ParameterError("protocol: duplicate point id " + std::to_string(q.id));
    ctx_.set_phase("update.knn");
    std::vector<std::span<const std::uint64_t>> qs;
    std::vector<std::uint64_t> ids;
    for (std::uint64_t other : state_.active) {
      qs.emplace_back(state_.points.at(other).coords);
      ids.push_back(other);
    }
    auto temp = knn_.knn(q.coords, qs, ids, params_.k);

    ctx_.set_phase("update.new");
    auto dist = knn_.kdist(temp);
    q.kdist = y2a(ctx_, dist, 1, knn_.key_bits()).at(0);
    const bool outlier = knn_.outlier_test(dist, radius_);
    q.knn = knn_.randomise(temp);
    const std::uint64_t q_id = q.id;
    insert(std::move(q));
    if (outlier) state_.outliers.insert(q_id);

    ctx_.set_phase("update.existing");
    auto neighbours = knn_.reveal_ids(temp);
    for (std::size_t j = 0; j < neighbours.size(); ++j) {
      auto it = state_.points.find(neighbours[j]);
      if (it == state_.points.end() || it->first == q_id)
        throw ProtocolError("protocol: opened neighbour id " + std::to_string(neighbours[j]) + " is not active");
      if (state_.outliers.count(it->first)) update_neighbour(it->second, temp, j, q_id);
    }
    auto sorted = neighbours;
    std::sort(sorted.begin(), sorted.end());
    last_knn_ids_.push_back(std::move(sorted));
  }
  return state_.outliers;
}

bool PpodParty::query(std::span<const std::uint64_t> q, std::uint64_t epsilon_share) {
  if (!initialised_) throw ProtocolError("protocol: query before initialise");
  if (q.size() != params_.dims) throw InputError("query point has the wrong dimension");
  if (state_.outliers.empty()) return false;
  ctx_.set_phase("query");
  std::vector<std::span<const std::uint64_t>> os;
  for (auto id : state_.outliers) os.emplace_back(state_.points.at(id).coords);
  auto d = knn_.distances(q, os);
  d.push_back(epsilon_share);
  auto y = a2y(ctx_, d, knn_.key_bits());
  const std::size_t n = os.size(), w = knn_.key_bits();
  const auto& c = ctx_.circuit("query-assertion/" + std::to_string(n) + "/" + std::to_string(w),
                               [&] { return circuits::build_query_assertion(n, w); });
  auto res = ctx_.yao().run(c, {{"distances", GcInput::yao(y.slice(0, n * w))}, {"epsilon", GcInput::yao(y.slice(n * w, w))}});
  return res.bits.at("assertion").at(0) != 0;
}

namespace {

std::vector<SharedPoint> fetch_points(PartyContext& ctx, std::uint64_t first, std::size_t count) {
  auto items = decode_points(ctx.request_input(encode_points_request(first, static_cast<std::uint32_t>(count))));
  std::vector<SharedPoint> out;
  out.reserve(items.size());
  for (auto& [id, coords] : items) {
    SharedPoint p;
    p.id = id;
    p.coords = std::move(coords);
    out.push_back(std::move(p));
  }
  return out;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

PartyRun run_party(PartyContext& ctx, bool record_decodes) {
  PartyRun run;
  if (record_decodes) ctx.yao().on_decode([&](const DecodeEvent& e) { run.decodes.push_back(e); });

  ctx.set_phase("preprocess");
  Stopwatch pre;
  run.params = decode_params(ctx.request_input(encode_params_request()));
  const auto& sp = run.params;
  if (sp.ring_bits != ctx.ring().bits()) throw ParameterError("gateway ring width differs from the party's ring");
  if (sp.points < sp.window)
    throw ParameterError("stream has " + std::to_string(sp.points) + " points, fewer than the window " +
                         std::to_string(sp.window));
  PpodParty party(ctx, {sp.window, sp.slide, sp.k, sp.dims});
  auto batch = fetch_points(ctx, 0, sp.window);
  run.phase_ms["preprocess"] += pre.ms();

  Stopwatch setup;
  party.setup(sp.radius_share);
  run.phase_ms["setup"] = setup.ms();

  Stopwatch init;
  run.outliers.push_back(party.initialise(std::move(batch)));
  run.phase_ms["initialise"] = init.ms();
  run.init_counters = party.counters();

  std::uint64_t next = sp.window;
  run.phase_ms["update"] = 0;
  while (next + sp.slide <= sp.points) {
    ctx.set_phase("preprocess");
    Stopwatch fetch;
    auto arrivals = fetch_points(ctx, next, sp.slide);
    run.phase_ms["preprocess"] += fetch.ms();
    next += sp.slide;
    auto before = party.counters();
    Stopwatch s;
    run.outliers.push_back(party.slide(std::move(arrivals)));
    run.phase_ms["update"] += s.ms();
    run.slide_counters.push_back(party.counters() - before);
    run.knn_ids.push_back(party.last_knn_ids());
  }
  run.leftover_points = sp.points - next;

  run.phase_ms["query"] = 0;
  for (std::uint64_t i = 0; i < sp.queries; ++i) {
    ctx.set_phase("preprocess");
    auto [coords, eps] = decode_query(ctx.request_input(encode_query_request(i)));
    Stopwatch q;
    run.answers.push_back(party.query(coords, eps));
    run.phase_ms["query"] += q.ms();
  }
  ctx.set_phase("default");
  ctx.yao().on_decode({});

  run.counters = party.counters();
  run.metrics = ctx.metrics();
  run.circuits = ctx.circuit_costs();
  run.triples = ctx.mul().triples_used();
  run.and_gates = ctx.yao().stats().and_gates;
  run.table_bytes = ctx.yao().stats().table_bytes;
  return run;
}

}  // namespace ppod
