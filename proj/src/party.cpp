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

#include "ppod/party.hpp"

#include <exception>
#include <fstream>
#include <iterator>
#include <optional>
#include <thread>

#include "ppod/bytes.hpp"
#include "ppod/errors.hpp"

namespace ppod {

void MaskRegistry::claim(std::uint64_t mask) {
  if (!seen_.insert(mask).second) throw ProtocolError("Y2A mask reused");
}

DealerService::DealerService(DealerOptions options, InputHandler inputs)
    : options_(options), ring_(options.ring_bits), inputs_(std::move(inputs)) {
  require_supported(options.ot_mode);
}

void DealerService::serve(int party, Channel& channel) {
  if (party != 0 && party != 1) throw ParameterError("party must be 0 or 1");
  for (;;) {
    auto [tag, payload] = channel.recv_any();
    switch (tag) {
      case Tag::kTripleRequest: {
        ByteReader r(payload);
        std::uint64_t batch = r.u64();
        std::uint64_t first = r.u64();
        std::uint32_t count = r.u32();
        r.expect_done();
        auto lists = gen_triple_batch(options_.seed, batch, first, count, ring_);
        const auto& mine = party == 0 ? lists.party0 : lists.party1;
        ByteWriter w;
        w.reserve(12 + mine.size() * 3 * ring_.bytes());
        w.u64(first);
        w.u32(count);
        for (const auto& t : mine) {
          w.uint(t.x, ring_.bytes());
          w.uint(t.y, ring_.bytes());
          w.uint(t.z, ring_.bytes());
        }
        channel.send(Tag::kTripleBatch, w);
        triples_served_[party] += count;
        break;
      }
      case Tag::kOtSend:
        if (party != 0) throw ProtocolError("only the garbler deposits OT pairs");
        ot_handle_send(ot_, payload);
        break;
      case Tag::kOtChoose:
        if (party != 1) throw ProtocolError("only the evaluator makes OT choices");
        ot_handle_choose(ot_, channel, payload);
        break;
      case Tag::kInputRequest: {
        if (!inputs_) throw ProtocolError("dealer has no input feed");
        channel.send(Tag::kInputItem, inputs_(party, payload));
        break;
      }
      case Tag::kBye:
        return;
      default:
        throw ProtocolError(std::string("dealer got unexpected message '") + tag_name(tag) + "'");
    }
  }
}

namespace {

TriplePool::Source dealer_source(Channel& dealer, const Ring& ring) {
  return [&dealer, ring](std::uint64_t batch, std::uint64_t first, std::size_t count) {
    ByteWriter w;
    w.u64(batch);
    w.u64(first);
    w.u32(static_cast<std::uint32_t>(count));
    dealer.send(Tag::kTripleRequest, w);
    auto payload = dealer.recv(Tag::kTripleBatch);
    ByteReader r(payload);
    if (r.u64() != first || r.u32() != count) throw ProtocolError("dealer answered a different triple request");
    std::vector<TripleShare> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      out[i].x = r.uint(ring.bytes());
      out[i].y = r.uint(ring.bytes());
      out[i].z = r.uint(ring.bytes());
      out[i].index = first + i;
    }
    r.expect_done();
    return out;
  };
}

Block party_seed(const PartyOptions& o, int party) {
  if (o.fresh_entropy) return Prg::from_entropy().next_block();
  return Prg::derive_seed(o.seed, "party", static_cast<std::uint64_t>(party));
}

}  // namespace

PartyContext::PartyContext(int party, Channel& peer, Channel& dealer, const PartyOptions& options)
    : party_(party),
      peer_(peer),
      dealer_(dealer),
      ring_(options.ring_bits),
      prg_(party_seed(options, party)),
      pool_(dealer_source(dealer, ring_), options.pool),
      mul_(ring_, party, peer, pool_),
      yao_(party, peer, dealer, prg_, options.ot_mode) {}

const Circuit& PartyContext::circuit(const std::string& key, const std::function<Circuit()>& build) {
  auto it = circuits_.find(key);
  if (it == circuits_.end()) it = circuits_.emplace(key, std::make_unique<Circuit>(build())).first;
  return *it->second;
}

std::map<std::string, GateCounts> PartyContext::circuit_costs() const {
  std::map<std::string, GateCounts> out;
  for (const auto& [key, c] : circuits_) out[c->name()] = c->counts();
  return out;
}

void PartyContext::set_phase(const std::string& phase) {
  phase_ = phase;
  peer_.set_phase(phase);
  dealer_.set_phase(phase);
}

ChannelMetrics PartyContext::metrics() const {
  ChannelMetrics m = peer_.metrics_snapshot();
  m += dealer_.metrics_snapshot();
  return m;
}

Bytes PartyContext::request_input(const Bytes& request) {
  dealer_.send(Tag::kInputRequest, request);
  return dealer_.recv(Tag::kInputItem);
}

TransportKind parse_transport(const std::string& text) {
  if (text == "inproc") return TransportKind::kInproc;
  if (text == "tcp") return TransportKind::kTcp;
  throw ParameterError("unknown transport '" + text + "' (expected inproc or tcp)");
}

namespace {

using EndPair = std::pair<ChannelPtr, ChannelPtr>;

EndPair make_pair_of(TransportKind kind, std::chrono::milliseconds timeout) {
  if (kind == TransportKind::kInproc) return make_inproc_pair(timeout);
  TcpListener listener("127.0.0.1", 0);
  ChannelPtr accepted;
  std::exception_ptr err;
  std::thread t([&] {
    try {
      accepted = listener.accept(timeout);
    } catch (...) {
      err = std::current_exception();
    }
  });
  ChannelPtr dialed;
  try {
    dialed = tcp_connect("127.0.0.1", listener.port(), std::chrono::seconds(10), timeout);
  } catch (...) {
    t.join();
    throw;
  }
  t.join();
  if (err) std::rethrow_exception(err);
  return {std::move(accepted), std::move(dialed)};
}

bool is_transport(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const TransportError&) {
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace

void run_two_party(DealerService& dealer, const PartyBody& body, const TwoPartyOptions& options) {
  auto peers = make_pair_of(options.transport, options.timeout);
  std::array<EndPair, 2> dealer_links{make_pair_of(options.transport, options.timeout),
                                      make_pair_of(options.transport, options.timeout)};
  std::array<ChannelPtr, 2> party_peer{std::move(peers.first), std::move(peers.second)};
  std::array<ChannelPtr, 2> party_dealer{std::move(dealer_links[0].second), std::move(dealer_links[1].second)};
  std::array<ChannelPtr, 2> dealer_side{std::move(dealer_links[0].first), std::move(dealer_links[1].first)};
  for (int p = 0; p < 2; ++p)
    if (options.peer_transcripts[p]) party_peer[p]->record_transcript(options.peer_transcripts[p]);

  std::array<std::exception_ptr, 4> errors;
  std::vector<std::thread> threads;
  for (int p = 0; p < 2; ++p) {
    threads.emplace_back([&, p] {
      try {
        dealer.serve(p, *dealer_side[p]);
      } catch (...) {
        errors[2 + p] = std::current_exception();
        dealer.abort();
        dealer_side[p].reset();
      }
    });
  }
  for (int p = 0; p < 2; ++p) {
    threads.emplace_back([&, p] {
      try {
        body(p, *party_peer[p], *party_dealer[p]);
        party_dealer[p]->send(Tag::kBye, std::span<const std::uint8_t>{});
      } catch (...) {
        errors[p] = std::current_exception();
        dealer.abort();
        party_peer[p].reset();
        party_dealer[p].reset();
      }
    });
  }
  for (auto& t : threads) t.join();

  std::exception_ptr first;
  for (const auto& e : errors) {
    if (!e) continue;
    if (!is_transport(e)) std::rethrow_exception(e);
    if (!first) first = e;
  }
  if (first) std::rethrow_exception(first);
}

void write_triple_file(const std::string& path, const TripleLists& lists, const Ring& ring) {
  if (lists.party0.size() != lists.party1.size()) throw ParameterError("triple lists differ in length");
  ByteWriter w;
  w.raw("PPODTRP1", 8);
  w.u8(static_cast<std::uint8_t>(ring.bits()));
  w.u64(lists.party0.size());
  for (std::size_t i = 0; i < lists.party0.size(); ++i) {
    for (const auto* t : {&lists.party0[i], &lists.party1[i]}) {
      w.uint(t->x, ring.bytes());
      w.uint(t->y, ring.bytes());
      w.uint(t->z, ring.bytes());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write triple file '" + path + "'");
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.size()));
  if (!out) throw InputError("short write to triple file '" + path + "'");
}

TripleLists read_triple_file(const std::string& path, Ring* ring_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read triple file '" + path + "'");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(data);
  auto magic = r.raw(8);
  if (std::string(magic.begin(), magic.end()) != "PPODTRP1") throw InputError("'" + path + "' is not a triple file");
  Ring ring(r.u8());
  std::uint64_t count = r.u64();
  if (count > r.remaining() / (6 * ring.bytes())) throw InputError("triple file '" + path + "' is truncated");
  TripleLists lists;
  lists.party0.resize(count);
  lists.party1.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (auto* t : {&lists.party0[i], &lists.party1[i]}) {
      t->x = r.uint(ring.bytes());
      t->y = r.uint(ring.bytes());
      t->z = r.uint(ring.bytes());
      t->index = i;
    }
  }
  r.expect_done();
  if (ring_out) *ring_out = ring;
  return lists;
}

}  // namespace ppod
