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
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppod/bytes.hpp"

namespace ppod {

// Message tags. The numeric values are part of the wire format.
enum class Tag : std::uint16_t {
  kHello = 1,
  kMulOpen = 2,
  kGarbledCircuit = 3,
  kOutputLabels = 4,
  kOutputBits = 5,
  kOtSend = 6,
  kOtChoose = 7,
  kOtResult = 8,
  kTripleRequest = 9,
  kTripleBatch = 10,
  kInputRequest = 11,
  kInputItem = 12,
  kBye = 13,
  kEcho = 14,
};

const char* tag_name(Tag tag);

struct PhaseCounters {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_received = 0;

  PhaseCounters& operator+=(const PhaseCounters& o) {
    bytes_sent += o.bytes_sent;
    bytes_received += o.bytes_received;
    messages_sent += o.messages_sent;
    messages_received += o.messages_received;
    return *this;
  }
  bool operator==(const PhaseCounters&) const = default;
};

// Counters for one channel end. Every byte is attributed to exactly one
// phase, so the per-phase entries sum to `total`.
struct ChannelMetrics {
  PhaseCounters total;
  std::map<std::string, PhaseCounters> phases;

  ChannelMetrics& operator+=(const ChannelMetrics& o);
  // Counters accumulated since `earlier` (same channel, earlier snapshot).
  ChannelMetrics since(const ChannelMetrics& earlier) const;
  PhaseCounters phase(const std::string& name) const;
  // Sum over phases whose name equals `prefix` or starts with `prefix.`.
  PhaseCounters phase_tree(const std::string& prefix) const;
};

// Frames as they left this channel end; used to compare transcripts across
// backends.
struct Transcript {
  std::vector<Bytes> frames;
};

inline constexpr std::size_t kFrameHeaderBytes = 6;
inline constexpr std::size_t kDefaultMaxFrame = std::size_t(1) << 31;

// One end of a full-duplex, in-order, exactly-once message channel.
// Frame: u32 LE payload length, u16 LE tag, payload.
// A channel end is owned by a single session thread.
class Channel {
 public:
  virtual ~Channel() = default;

  void send(Tag tag, std::span<const std::uint8_t> payload);
  void send(Tag tag, const ByteWriter& w) { send(tag, std::span<const std::uint8_t>(w.bytes())); }
  // Blocks until the next frame arrives; throws ProtocolError if its tag
  // differs from `expected`.
  Bytes recv(Tag expected);
  std::pair<Tag, Bytes> recv_any();

  void set_phase(std::string phase) { phase_ = std::move(phase); }
  const std::string& phase() const { return phase_; }
  ChannelMetrics metrics_snapshot() const { return metrics_; }

  void record_transcript(Transcript* t) { transcript_ = t; }
  void set_max_frame(std::size_t bytes) { max_frame_ = bytes; }

 protected:
  virtual void write_all(std::span<const std::uint8_t> data) = 0;
  virtual void read_exact(std::span<std::uint8_t> out) = 0;
  // Backends that can take ownership of a finished frame override this.
  virtual void write_frame(Bytes&& frame) { write_all(frame); }

 private:
  PhaseCounters& current();

  std::string phase_ = "default";
  ChannelMetrics metrics_;
  Transcript* transcript_ = nullptr;
  std::size_t max_frame_ = kDefaultMaxFrame;
};

using ChannelPtr = std::unique_ptr<Channel>;

inline constexpr std::chrono::milliseconds kDefaultRecvTimeout{std::chrono::minutes(30)};

// Two connected in-process channel ends.
std::pair<ChannelPtr, ChannelPtr> make_inproc_pair(
    std::chrono::milliseconds recv_timeout = kDefaultRecvTimeout);

class TcpListener {
 public:
  // port 0 picks an ephemeral port; see port().
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  ChannelPtr accept(std::chrono::milliseconds recv_timeout = kDefaultRecvTimeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Retries until the peer is listening or `connect_timeout` elapses.
ChannelPtr tcp_connect(const std::string& host, std::uint16_t port,
                       std::chrono::milliseconds connect_timeout = std::chrono::seconds(30),
                       std::chrono::milliseconds recv_timeout = kDefaultRecvTimeout);

// "host:port" -> (host, port); throws InputError.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text);

}  // namespace ppod
