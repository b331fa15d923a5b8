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

// Command-line front end: synthetic data, two-party runs, queries, sweeps.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppod/errors.hpp"
#include "ppod/runner.hpp"

using namespace ppod;

namespace {

struct Common {
  std::string config_path;
  std::string profile = "desk";
  std::size_t dims = 0;
  std::string data_path;
  std::string query_path;
  std::uint64_t seed = 1;
  std::string mode = "ideal-ot";
  std::string transport = "inproc";
  std::optional<std::uint64_t> radius;
  std::optional<std::uint64_t> epsilon;
  double quantile = 0.9;
  bool verify = false;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Key-value config file");
  cmd->add_option("--profile", c.profile, "Parameter profile when no config is given")
      ->check(CLI::IsMember({"desk", "large"}));
  cmd->add_option("--dims", c.dims, "Dimensions (default: from the data)");
  cmd->add_option("--data", c.data_path, "CSV stream");
  cmd->add_option("--queries", c.query_path, "CSV of query points");
  cmd->add_option("--seed", c.seed, "Session seed");
  cmd->add_option("--mode", c.mode, "OT mode")->check(CLI::IsMember({"ideal-ot", "real-ot"}));
  cmd->add_option("--transport", c.transport, "Transport for --role all")->check(CLI::IsMember({"inproc", "tcp"}));
  cmd->add_option("--radius", c.radius, "Distance threshold R (rounded squared distance)");
  cmd->add_option("--epsilon", c.epsilon, "Query threshold (rounded squared distance)");
  cmd->add_option("--calibrate", c.quantile, "k-distance quantile used for R when none is given")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--verify-oracle", c.verify, "Compare against the plaintext protocol replay");
  cmd->add_option("--out", c.out, "Write the report here instead of stdout");
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << text << "\n";
}

std::vector<std::vector<double>> load_queries(const std::string& path) {
  std::vector<std::vector<double>> out;
  if (path.empty()) return out;
  for (auto& p : load_csv(path)) out.push_back(std::move(p.coords));
  return out;
}

// Config from file or profile; R from flag, file, or calibration.
GatewayConfig resolve_config(const Common& c, const std::vector<RawPoint>& stream) {
  const std::size_t dims = c.dims ? c.dims : (stream.empty() ? 0 : stream[0].coords.size());
  GatewayConfig cfg = c.config_path.empty() ? profile_config(c.profile, dims) : load_config(c.config_path);
  if (c.radius) {
    cfg.radius = *c.radius;
  } else if (c.config_path.empty() && c.profile == "desk") {
    GatewayFeed probe(cfg, stream, {}, c.seed);
    cfg.radius = calibrate_radius(probe.rounded(), cfg.window, cfg.k, c.quantile);
  }
  if (c.epsilon) cfg.epsilon = *c.epsilon;
  cfg.validate();
  if (stream.size() < cfg.window)
    throw ParameterError("data has " + std::to_string(stream.size()) + " points, fewer than the window " +
                         std::to_string(cfg.window));
  return cfg;
}

std::vector<RawPoint> load_stream(const Common& c) {
  if (c.data_path.empty()) throw InputError("--data is required");
  return load_csv(c.data_path);
}

SessionOptions session_options(const Common& c) {
  SessionOptions o;
  o.seed = c.seed;
  o.ot_mode = parse_ot_mode(c.mode);
  o.transport = parse_transport(c.transport);
  o.verify_oracle = c.verify;
  o.record_decodes = false;
  return o;
}

// ---- distributed roles ----

void send_hello(Channel& ch, int party) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(party));
  ch.send(Tag::kHello, w);
}

int run_dealer(const Common& c, const std::string& listen) {
  auto stream = load_stream(c);
  auto cfg = resolve_config(c, stream);
  GatewayFeed feed(cfg, stream, load_queries(c.query_path), c.seed);
  auto [host, port] = parse_endpoint(listen);
  TcpListener listener(host, port);
  std::cerr << "dealer listening on " << host << ":" << listener.port() << "\n";
  DealerService dealer(DealerOptions{c.seed, cfg.ring_bits, parse_ot_mode(c.mode)},
                       [&](int p, std::span<const std::uint8_t> req) { return feed.handle(p, req); });
  std::array<ChannelPtr, 2> chans;
  for (int i = 0; i < 2; ++i) {
    auto ch = listener.accept();
    const Bytes hello = ch->recv(Tag::kHello);
    ByteReader r(hello);
    int party = r.u8();
    if (party > 1 || chans[party]) throw ProtocolError("dealer: bad or repeated party hello");
    chans[party] = std::move(ch);
  }
  std::array<std::exception_ptr, 2> err;
  std::vector<std::thread> threads;
  for (int p = 0; p < 2; ++p)
    threads.emplace_back([&, p] {
      try {
        dealer.serve(p, *chans[p]);
      } catch (...) {
        err[p] = std::current_exception();
        dealer.abort();
      }
    });
  for (auto& t : threads) t.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  if (c.verify) std::cerr << "dealer: oracle verification runs on the parties' reports, not here\n";
  return 0;
}

int run_remote_party(const Common& c, int party, const std::string& listen, const std::string& connect,
                     const std::string& dealer_ep) {
  if (dealer_ep.empty()) throw InputError("--dealer is required for p0/p1");
  ChannelPtr peer;
  if (party == 0) {
    if (listen.empty()) throw InputError("p0 needs --listen for p1");
    auto [h, p] = parse_endpoint(listen);
    TcpListener l(h, p);
    std::cerr << "p0 listening on " << h << ":" << l.port() << "\n";
    peer = l.accept();
  } else {
    if (connect.empty()) throw InputError("p1 needs --connect to p0");
    auto [h, p] = parse_endpoint(connect);
    peer = tcp_connect(h, p);
  }
  auto [dh, dp] = parse_endpoint(dealer_ep);
  auto dealer = tcp_connect(dh, dp);
  send_hello(*dealer, party);
  PartyOptions po;
  po.seed = c.seed;
  po.ot_mode = parse_ot_mode(c.mode);
  if (!c.config_path.empty()) po.ring_bits = load_config(c.config_path).ring_bits;
  nlohmann::json j;
  {
    PartyContext ctx(party, *peer, *dealer, po);
    auto run = run_party(ctx);
    j = party_json(run);
  }
  dealer->send(Tag::kBye, std::span<const std::uint8_t>{});
  j["party"] = party;
  emit(c.out, j.dump(2));
  return 0;
}

// ---- bench ----

nlohmann::json bench_point(const GatewayConfig& cfg, const std::vector<RawPoint>& stream, const Common& c) {
  GatewayFeed feed(cfg, stream, {}, c.seed);
  auto r = run_session(feed, session_options(c));
  const auto& p = r.parties[0];
  const std::size_t arrivals = p.slide_counters.size() * cfg.slide;
  auto bytes = [&](const std::string& phase) {
    std::uint64_t b = 0;
    for (const auto& pr : r.parties) b += pr.metrics.phase_tree(phase).bytes_sent;
    return b;
  };
  nlohmann::json j;
  j["window"] = cfg.window;
  j["k"] = cfg.k;
  j["radius"] = cfg.radius;
  j["init_distance_evaluations"] = p.init_counters.distance_evaluations;
  j["initialise_bytes"] = bytes("initialise");
  j["arrivals"] = arrivals;
  if (arrivals) {
    j["knn_bytes_per_arrival"] = bytes("update.knn") / arrivals;
    j["update_bytes_per_arrival"] = (bytes("update.new") + bytes("update.existing")) / arrivals;
    j["update_ms_per_slide"] = p.phase_ms.at("update") / static_cast<double>(p.slide_counters.size());
  }
  j["initialise_ms"] = p.phase_ms.at("initialise");
  if (c.verify) j["oracle"] = r.oracle.pass ? "pass" : "fail";
  return j;
}

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving distance-based outlier detection over two servers"};
  app.require_subcommand(1);

  GenSpec gen;
  std::string gen_out;
  auto* g = app.add_subcommand("gen-data", "Write a synthetic clustered stream as CSV");
  g->add_option("--points", gen.points, "Number of points");
  g->add_option("--dims", gen.dims, "Dimensions");
  g->add_option("--clusters", gen.clusters, "Gaussian clusters");
  g->add_option("--outliers", gen.outliers, "Planted isolated points");
  g->add_option("--spread", gen.spread, "Cluster standard deviation in the unit cube");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen_out, "Output CSV (default stdout)");

  Common run_opts;
  std::string role = "all", listen, connect, dealer_ep;
  auto* r = app.add_subcommand("run", "Run the protocol over a stream");
  add_common(r, run_opts);
  r->add_option("--role", role, "Which part to play")->check(CLI::IsMember({"all", "p0", "p1", "dealer"}));
  r->add_option("--listen", listen, "host:port to accept on (dealer, p0)");
  r->add_option("--connect", connect, "host:port of p0 (p1)");
  r->add_option("--dealer", dealer_ep, "host:port of the dealer (p0, p1)");

  Common q_opts;
  std::string point;
  auto* q = app.add_subcommand("query", "Run the stream, then ask whether a point lies near an outlier");
  add_common(q, q_opts);
  q->add_option("--point", point, "Comma-separated coordinates")->required();

  Common b_opts;
  std::string sweep = "k", values = "5,10,20";
  std::size_t bench_points = 90;
  auto* b = app.add_subcommand("bench", "Sweep W or k and report costs");
  add_common(b, b_opts);
  b->add_option("--sweep", sweep, "Parameter to sweep")->check(CLI::IsMember({"k", "W"}));
  b->add_option("--values", values, "Comma-separated values (may be empty)");
  b->add_option("--points", bench_points, "Synthetic stream length when --data is absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*g) {
      auto pts = generate_stream(gen);
      if (gen_out.empty()) {
        write_csv(std::cout, pts);
      } else {
        std::ofstream f(gen_out);
        if (!f) throw InputError("cannot write " + gen_out);
        write_csv(f, pts);
      }
      return 0;
    }
    if (*r) {
      if (role == "dealer") return run_dealer(run_opts, listen.empty() ? "127.0.0.1:7700" : listen);
      if (role == "p0" || role == "p1") return run_remote_party(run_opts, role == "p0" ? 0 : 1, listen, connect, dealer_ep);
      auto stream = load_stream(run_opts);
      auto cfg = resolve_config(run_opts, stream);
      GatewayFeed feed(cfg, stream, load_queries(run_opts.query_path), run_opts.seed);
      auto report = run_session(feed, session_options(run_opts));
      emit(run_opts.out, report.to_json().dump(2));
      return report.oracle.checked && !report.oracle.pass ? 1 : 0;
    }
    if (*q) {
      std::vector<double> coords;
      std::stringstream ss(point);
      std::string item;
      while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        double v = std::strtod(item.c_str(), &end);
        if (item.empty() || end != item.c_str() + item.size()) throw InputError("malformed point '" + point + "'");
        coords.push_back(v);
      }
      auto stream = load_stream(q_opts);
      auto cfg = resolve_config(q_opts, stream);
      if (coords.size() != cfg.dims())
        throw InputError("point has " + std::to_string(coords.size()) + " coordinates, expected " +
                         std::to_string(cfg.dims()));
      GatewayFeed feed(cfg, stream, {coords}, q_opts.seed);
      auto report = run_session(feed, session_options(q_opts));
      const bool answer = report.parties[0].answers.at(0);
      if (q_opts.out.empty()) {
        std::cout << (answer ? "True" : "False") << "\n";
      } else {
        auto j = report.to_json();
        j["answer"] = answer;
        emit(q_opts.out, j.dump(2));
      }
      return 0;
    }
    if (*b) {
      std::vector<RawPoint> stream;
      const std::size_t dims = b_opts.dims ? b_opts.dims : 2;
      stream = b_opts.data_path.empty() ? generate_stream({bench_points, dims, 3, 4, 0.05, b_opts.seed})
                                        : load_stream(b_opts);
      auto base = resolve_config(b_opts, stream);
      nlohmann::json series = nlohmann::json::array();
      for (std::size_t v : parse_list(values)) {
        auto cfg = base;
        (sweep == "k" ? cfg.k : cfg.window) = v;
        if (sweep == "W") cfg.slide = std::min(cfg.slide, v > 1 ? v - 1 : 1);
        cfg.validate();
        series.push_back(bench_point(cfg, stream, b_opts));
      }
      emit(b_opts.out, nlohmann::json{{"sweep", sweep}, {"series", series}}.dump(2));
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const RangeError& e) {
    std::cerr << "range error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedMode& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
