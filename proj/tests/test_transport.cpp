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

#include <thread>

#include "doctest.h"
#include "ppod/errors.hpp"
#include "ppod/crypto.hpp"
#include "ppod/transport.hpp"

using namespace ppod;

namespace {

Bytes payload_of(std::size_t n, std::uint64_t seed) {
  Bytes b(n);
  Prg(seed).fill(b);
  return b;
}

}  // namespace

TEST_CASE("echo round trip over the in-process pair") {
  auto [a, b] = make_inproc_pair();
  Bytes msg = {1, 2, 3};
  a->send(Tag::kEcho, msg);
  auto got = b->recv(Tag::kEcho);
  CHECK(got == msg);
  b->send(Tag::kEcho, got);
  CHECK(a->recv(Tag::kEcho) == msg);
}

TEST_CASE("tag mismatch is a protocol error") {
  auto [a, b] = make_inproc_pair();
  a->send(Tag::kHello, Bytes{});
  CHECK_THROWS_AS(b->recv(Tag::kEcho), ProtocolError);
}

TEST_CASE("fresh channel metrics are zero and count framing") {
  auto [a, b] = make_inproc_pair();
  CHECK(a->metrics_snapshot().total == PhaseCounters{});
  a->set_phase("x");
  a->send(Tag::kEcho, Bytes(10));
  b->recv(Tag::kEcho);
  auto m = a->metrics_snapshot();
  CHECK(m.total.bytes_sent == 10 + kFrameHeaderBytes);
  CHECK(m.total.messages_sent == 1);
  CHECK(m.phase("x").bytes_sent == 10 + kFrameHeaderBytes);
  CHECK(b->metrics_snapshot().total.bytes_received == 10 + kFrameHeaderBytes);
}

TEST_CASE("phase totals sum to the session total") {
  auto [a, b] = make_inproc_pair();
  for (int i = 0; i < 5; ++i) {
    a->set_phase(i % 2 ? "odd" : "even.sub");
    a->send(Tag::kEcho, Bytes(static_cast<std::size_t>(i * 3)));
  }
  auto m = a->metrics_snapshot();
  PhaseCounters sum;
  for (const auto& [name, c] : m.phases) sum += c;
  CHECK(sum == m.total);
  CHECK(m.phase_tree("even").messages_sent == 3);
}

TEST_CASE("oversize frames are refused") {
  auto [a, b] = make_inproc_pair();
  a->set_max_frame(8);
  CHECK_THROWS_AS(a->send(Tag::kEcho, Bytes(9)), TransportError);
}

TEST_CASE("disconnect surfaces as transport error after queued data drains") {
  auto [a, b] = make_inproc_pair();
  a->send(Tag::kEcho, Bytes{9});
  a.reset();
  CHECK(b->recv(Tag::kEcho) == Bytes{9});
  CHECK_THROWS_AS(b->recv(Tag::kEcho), TransportError);
  CHECK_THROWS_AS(b->send(Tag::kEcho, Bytes{}), TransportError);
}

TEST_CASE("receive timeout") {
  auto [a, b] = make_inproc_pair(std::chrono::milliseconds(20));
  CHECK_THROWS_AS(b->recv(Tag::kEcho), TransportError);
}

TEST_CASE("10 MB frame transfers intact over tcp") {
  TcpListener listener("127.0.0.1", 0);
  Bytes big = payload_of(10 * 1024 * 1024, 3);
  auto want = sha256(big);
  Sha256Digest got{};
  std::thread server([&] {
    auto ch = listener.accept();
    auto data = ch->recv(Tag::kGarbledCircuit);
    got = sha256(data);
    ch->send(Tag::kEcho, Bytes{1});
  });
  auto client = tcp_connect("127.0.0.1", listener.port());
  client->send(Tag::kGarbledCircuit, big);
  CHECK(client->recv(Tag::kEcho) == Bytes{1});
  server.join();
  CHECK(got == want);
}

TEST_CASE("10 MB frame transfers intact in process") {
  auto [a, b] = make_inproc_pair();
  Bytes big = payload_of(10 * 1024 * 1024, 4);
  a->send(Tag::kGarbledCircuit, big);
  CHECK(sha256(b->recv(Tag::kGarbledCircuit)) == sha256(big));
}

TEST_CASE("tcp and in-process produce identical frames") {
  Transcript t_inproc, t_tcp;
  {
    auto [a, b] = make_inproc_pair();
    a->record_transcript(&t_inproc);
    a->send(Tag::kHello, Bytes{1, 2});
    a->send(Tag::kEcho, payload_of(1000, 5));
  }
  {
    TcpListener listener("127.0.0.1", 0);
    std::thread server([&] {
      auto ch = listener.accept();
      ch->recv(Tag::kHello);
      ch->recv(Tag::kEcho);
    });
    auto c = tcp_connect("127.0.0.1", listener.port());
    c->record_transcript(&t_tcp);
    c->send(Tag::kHello, Bytes{1, 2});
    c->send(Tag::kEcho, payload_of(1000, 5));
    server.join();
  }
  CHECK(t_inproc.frames == t_tcp.frames);
}

TEST_CASE("endpoint parsing") {
  auto [h, p] = parse_endpoint("127.0.0.1:9000");
  CHECK(h == "127.0.0.1");
  CHECK(p == 9000);
  CHECK_THROWS_AS(parse_endpoint("nohost"), InputError);
}
