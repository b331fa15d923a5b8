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

#include "ppod/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ppod/circuits.hpp"
#include "ppod/errors.hpp"

namespace ppod {

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw InputError("config: " + key + " expects a non-negative integer, got '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw InputError("config: " + key + " is out of range");
  }
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

bool distance_fits(std::size_t dims, unsigned l_d, unsigned ring_bits) {
  if (dims == 0) return true;
  // log2(dims) + 2 l_d + 2 < ring_bits, computed without overflow.
  unsigned dim_bits = 0;
  while ((std::size_t(1) << dim_bits) < dims) ++dim_bits;
  const bool pow2 = (std::size_t(1) << dim_bits) == dims;
  const unsigned need = 2 * l_d + 2 + dim_bits;
  return pow2 ? need < ring_bits : need <= ring_bits;
}

void GatewayConfig::validate() const {
  if (bounds.empty()) throw ParameterError("config: at least one dimension is required");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto& b = bounds[i];
    if (!std::isfinite(b.min) || !std::isfinite(b.max) || !(b.max > b.min))
      throw ParameterError("config: bounds of dimension " + std::to_string(i) + " need min < max");
  }
  if (ring_bits != 32 && ring_bits != 64) throw ParameterError("config: ring_bits must be 32 or 64");
  if (l_d == 0 || l_d > 30) throw ParameterError("config: l_d must be in [1, 30]");
  if (!distance_fits(dims(), l_d, ring_bits))
    throw ParameterError("config: " + std::to_string(dims()) + " dimensions at l_d=" + std::to_string(l_d) +
                         " can wrap a " + std::to_string(ring_bits) + "-bit ring");
  if (k == 0) throw ParameterError("config: k must be positive");
  if (slide == 0 || slide >= window) throw ParameterError("config: need 0 < slide < window");
  if (k > window - slide)
    throw ParameterError("config: k=" + std::to_string(k) + " exceeds window - slide = " +
                         std::to_string(window - slide));
  const std::uint64_t ring_max = ring_bits == 64 ? ~0ull : (1ull << ring_bits) - 1;
  if (radius >= ring_max || epsilon >= ring_max) throw ParameterError("config: threshold exceeds the ring");
}

GatewayConfig profile_config(const std::string& profile, std::size_t dims) {
  GatewayConfig c;
  c.bounds.assign(dims, Bounds{0.0, 1.0});
  if (profile == "desk") {
    c.window = 40, c.slide = 5, c.k = 5, c.l_d = 15;
  } else if (profile == "large") {
    c.window = 400, c.slide = 20, c.k = 50, c.radius = 25000, c.l_d = 8;
  } else {
    throw ParameterError("unknown profile '" + profile + "' (expected desk or large)");
  }
  return c;
}

GatewayConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    auto key = lower(trim(line.substr(0, eq)));
    if (kv.count(key)) throw InputError("config: duplicate key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }

  std::size_t dims = 0;
  if (kv.count("dims")) dims = parse_uint("dims", kv["dims"]);
  std::vector<Bounds> bounds;
  if (kv.count("bounds")) {
    for (const auto& item : split(kv["bounds"], ',')) {
      auto colon = item.find(':', item.size() > 1 ? 1 : 0);
      if (colon == std::string::npos) throw InputError("config: bounds entry '" + item + "' is not lo:hi");
      auto lo = parse_double(trim(item.substr(0, colon))), hi = parse_double(trim(item.substr(colon + 1)));
      if (!lo || !hi) throw InputError("config: bounds entry '" + item + "' is not numeric");
      bounds.push_back({*lo, *hi});
    }
  }
  if (dims == 0) dims = bounds.size();
  if (dims == 0) throw InputError("config: dims or bounds is required");

  GatewayConfig c = kv.count("profile") ? profile_config(kv["profile"], dims) : GatewayConfig{};
  if (bounds.size() == 1 && dims > 1) bounds.assign(dims, bounds[0]);
  if (!bounds.empty() && bounds.size() != dims)
    throw InputError("config: " + std::to_string(bounds.size()) + " bounds for " + std::to_string(dims) + " dims");
  c.bounds = bounds.empty() ? std::vector<Bounds>(dims, Bounds{}) : bounds;

  auto num = [&](const char* key, auto& field) {
    if (kv.count(key)) field = static_cast<std::remove_reference_t<decltype(field)>>(parse_uint(key, kv[key]));
  };
  num("l_d", c.l_d);
  num("ring_bits", c.ring_bits);
  num("window", c.window);
  num("slide", c.slide);
  num("k", c.k);
  num("radius", c.radius);
  num("epsilon", c.epsilon);
  if (kv.count("policy")) {
    auto p = lower(kv["policy"]);
    if (p == "clamp") c.policy = BoundsPolicy::kClamp;
    else if (p == "reject") c.policy = BoundsPolicy::kReject;
    else throw InputError("config: policy must be clamp or reject");
  }
  static const std::set<std::string> known{"dims", "bounds", "l_d", "ring_bits", "window", "slide",
                                           "k",    "radius", "epsilon", "policy", "profile"};
  for (const auto& [key, _] : kv)
    if (!known.count(key)) throw InputError("config: unknown key '" + key + "'");
  c.validate();
  return c;
}

GatewayConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const GatewayConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "dims = " << c.dims() << "\nbounds = ";
  for (std::size_t i = 0; i < c.bounds.size(); ++i) out << (i ? ", " : "") << c.bounds[i].min << ":" << c.bounds[i].max;
  out << "\nl_d = " << c.l_d << "\nring_bits = " << c.ring_bits << "\nwindow = " << c.window
      << "\nslide = " << c.slide << "\nk = " << c.k << "\nradius = " << c.radius << "\nepsilon = " << c.epsilon
      << "\npolicy = " << (c.policy == BoundsPolicy::kClamp ? "clamp" : "reject") << "\n";
  return out.str();
}

std::vector<RawPoint> read_csv(std::istream& in) {
  std::vector<RawPoint> out;
  std::string line;
  std::size_t lineno = 0, row = 0, width = 0;
  std::optional<std::size_t> id_col;
  bool first = true;
  std::set<std::uint64_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (first) {
      first = false;
      bool header = std::any_of(fields.begin(), fields.end(), [](const auto& f) { return !parse_double(f); });
      if (header) {
        for (std::size_t i = 0; i < fields.size(); ++i)
          if (lower(fields[i]) == "id") id_col = i;
        width = fields.size();
        continue;
      }
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw InputError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields, got " +
                       std::to_string(fields.size()));
    RawPoint p;
    p.id = row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (id_col && i == *id_col) {
        if (fields[i].empty() || fields[i].find_first_not_of("0123456789") != std::string::npos)
          throw InputError("csv line " + std::to_string(lineno) + ": bad id '" + fields[i] + "'");
        p.id = std::stoull(fields[i]);
        continue;
      }
      auto v = parse_double(fields[i]);
      if (!v) throw InputError("csv line " + std::to_string(lineno) + ": '" + fields[i] + "' is not a number");
      p.coords.push_back(*v);
    }
    if (p.coords.empty()) throw InputError("csv line " + std::to_string(lineno) + ": no coordinates");
    if (!seen.insert(p.id).second) throw InputError("csv line " + std::to_string(lineno) + ": duplicate id");
    out.push_back(std::move(p));
    ++row;
  }
  return out;
}

std::vector<RawPoint> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const std::vector<RawPoint>& points) {
  if (points.empty()) return;
  out << "id";
  for (std::size_t i = 0; i < points[0].coords.size(); ++i) out << ",x" << i;
  out << "\n";
  out.precision(17);
  for (const auto& p : points) {
    out << p.id;
    for (double v : p.coords) out << "," << v;
    out << "\n";
  }
}

std::uint64_t round_coordinate(double x, const Bounds& b, unsigned l_d, BoundsPolicy policy) {
  if (!std::isfinite(x)) throw InputError("non-finite coordinate");
  if (x < b.min || x > b.max) {
    if (policy == BoundsPolicy::kReject)
      throw RangeError("coordinate " + std::to_string(x) + " outside [" + std::to_string(b.min) + ", " +
                       std::to_string(b.max) + "]");
    x = std::clamp(x, b.min, b.max);
  }
  const double scaled = (x - b.min) / (b.max - b.min) * std::ldexp(1.0, static_cast<int>(l_d));
  const auto limit = std::uint64_t(1) << l_d;
  return std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor(scaled)), limit);
}

std::vector<std::uint64_t> round_point(std::span<const double> coords, const GatewayConfig& c) {
  if (coords.size() != c.dims())
    throw InputError("point has " + std::to_string(coords.size()) + " coordinates, expected " +
                     std::to_string(c.dims()));
  std::vector<std::uint64_t> out(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) out[i] = round_coordinate(coords[i], c.bounds[i], c.l_d, c.policy);
  return out;
}

Bytes encode_params_request() {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(InputKind::kParams));
  return w.take();
}

Bytes encode_points_request(std::uint64_t first, std::uint32_t count) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(InputKind::kPoints));
  w.u64(first);
  w.u32(count);
  return w.take();
}

Bytes encode_query_request(std::uint64_t index) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(InputKind::kQuery));
  w.u64(index);
  return w.take();
}

SessionParams decode_params(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  SessionParams p;
  p.dims = r.u32();
  p.window = r.u32();
  p.slide = r.u32();
  p.k = r.u32();
  p.ring_bits = r.u8();
  p.points = r.u64();
  p.queries = r.u64();
  p.radius_share = r.u64();
  r.expect_done();
  return p;
}

std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> decode_points(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const std::uint32_t n = r.u32(), dims = r.u32();
  std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> out(n);
  for (auto& [id, coords] : out) {
    id = r.u64();
    coords.resize(dims);
    for (auto& c : coords) c = r.u64();
  }
  r.expect_done();
  return out;
}

std::pair<std::vector<std::uint64_t>, std::uint64_t> decode_query(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  std::vector<std::uint64_t> coords(r.u32());
  for (auto& c : coords) c = r.u64();
  std::uint64_t eps = r.u64();
  r.expect_done();
  return {std::move(coords), eps};
}

GatewayFeed::GatewayFeed(GatewayConfig config, const std::vector<RawPoint>& stream,
                         const std::vector<std::vector<double>>& queries, std::uint64_t seed)
    : config_(std::move(config)), ring_(config_.ring_bits) {
  config_.validate();
  Prg prg(Prg::derive_seed(seed, "gateway", 0));
  auto split_vec = [&](const std::vector<std::uint64_t>& v, std::array<std::vector<std::uint64_t>, 2>& out) {
    for (auto x : v) {
      auto [a, b] = share(x, ring_, prg);
      out[0].push_back(a.value);
      out[1].push_back(b.value);
    }
  };
  std::set<std::uint64_t> seen;
  for (const auto& raw : stream) {
    if (raw.id >= circuits::kInvalidId) throw InputError("point id " + std::to_string(raw.id) + " exceeds 32 bits");
    if (!seen.insert(raw.id).second) throw InputError("duplicate point id " + std::to_string(raw.id));
    auto rounded = round_point(raw.coords, config_);
    SharedPointInput sp;
    sp.id = raw.id;
    split_vec(rounded, sp.coords);
    ids_.push_back(raw.id);
    rounded_.push_back(std::move(rounded));
    points_.push_back(std::move(sp));
  }
  for (const auto& q : queries) {
    auto rounded = round_point(q, config_);
    SharedQueryInput sq;
    split_vec(rounded, sq.coords);
    auto [e0, e1] = share(config_.epsilon, ring_, prg);
    sq.epsilon = {e0.value, e1.value};
    rounded_queries_.push_back(std::move(rounded));
    queries_.push_back(std::move(sq));
  }
  auto [r0, r1] = share(config_.radius, ring_, prg);
  radius_ = {r0.value, r1.value};
}

Bytes GatewayFeed::handle(int party, std::span<const std::uint8_t> request) const {
  if (party != 0 && party != 1) throw ParameterError("gateway: unknown party");
  ByteReader r(request);
  ByteWriter w;
  switch (static_cast<InputKind>(r.u8())) {
    case InputKind::kParams:
      r.expect_done();
      w.u32(static_cast<std::uint32_t>(config_.dims()));
      w.u32(static_cast<std::uint32_t>(config_.window));
      w.u32(static_cast<std::uint32_t>(config_.slide));
      w.u32(static_cast<std::uint32_t>(config_.k));
      w.u8(static_cast<std::uint8_t>(config_.ring_bits));
      w.u64(points_.size());
      w.u64(queries_.size());
      w.u64(radius_[party]);
      break;
    case InputKind::kPoints: {
      const std::uint64_t first = r.u64();
      const std::uint32_t count = r.u32();
      r.expect_done();
      if (first > points_.size() || count > points_.size() - first)
        throw ParameterError("gateway: point range past the end of the stream");
      w.u32(count);
      w.u32(static_cast<std::uint32_t>(config_.dims()));
      for (std::uint64_t i = first; i < first + count; ++i) {
        w.u64(points_[i].id);
        for (auto c : points_[i].coords[party]) w.u64(c);
      }
      break;
    }
    case InputKind::kQuery: {
      const std::uint64_t index = r.u64();
      r.expect_done();
      if (index >= queries_.size()) throw ParameterError("gateway: no such query");
      w.u32(static_cast<std::uint32_t>(config_.dims()));
      for (auto c : queries_[index].coords[party]) w.u64(c);
      w.u64(queries_[index].epsilon[party]);
      break;
    }
    default:
      throw ProtocolError("gateway: unknown request kind");
  }
  return w.take();
}

}  // namespace ppod
