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

#include "ppod/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace ppod {

const char* tag_name(Tag tag) {
  switch (tag) {
    case Tag::kHello: return "hello";
    case Tag::kMulOpen: return "mul-open";
    case Tag::kGarbledCircuit: return "garbled-circuit";
    case Tag::kOutputLabels: return "output-labels";
    case Tag::kOutputBits: return "output-bits";
    case Tag::kOtSend: return "ot-send";
    case Tag::kOtChoose: return "ot-choose";
    case Tag::kOtResult: return "ot-result";
    case Tag::kTripleRequest: return "triple-request";
    case Tag::kTripleBatch: return "triple-batch";
    case Tag::kInputRequest: return "input-request";
    case Tag::kInputItem: return "input-item";
    case Tag::kBye: return "bye";
    case Tag::kEcho: return "echo";
  }
  return "unknown";
}

ChannelMetrics& ChannelMetrics::operator+=(const ChannelMetrics& o) {
  total += o.total;
  for (const auto& [name, c] : o.phases) phases[name] += c;
  return *this;
}

ChannelMetrics ChannelMetrics::since(const ChannelMetrics& earlier) const {
  auto diff = [](const PhaseCounters& a, const PhaseCounters& b) {
    return PhaseCounters{a.bytes_sent - b.bytes_sent, a.bytes_received - b.bytes_received,
                         a.messages_sent - b.messages_sent,
                         a.messages_received - b.messages_received};
  };
  ChannelMetrics out;
  out.total = diff(total, earlier.total);
  for (const auto& [name, c] : phases) {
    auto it = earlier.phases.find(name);
    PhaseCounters d = it == earlier.phases.end() ? c : diff(c, it->second);
    if (!(d == PhaseCounters{})) out.phases[name] = d;
  }
  return out;
}

PhaseCounters ChannelMetrics::phase(const std::string& name) const {
  auto it = phases.find(name);
  return it == phases.end() ? PhaseCounters{} : it->second;
}

PhaseCounters ChannelMetrics::phase_tree(const std::string& prefix) const {
  PhaseCounters sum;
  for (const auto& [name, c] : phases) {
    if (name == prefix || (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0 &&
                           name[prefix.size()] == '.'))
      sum += c;
  }
  return sum;
}

PhaseCounters& Channel::current() { return metrics_.phases[phase_]; }

void Channel::send(Tag tag, std::span<const std::uint8_t> payload) {
  if (payload.size() > max_frame_)
    throw TransportError("frame of " + std::to_string(payload.size()) + " bytes exceeds limit");
  Bytes frame(kFrameHeaderBytes + payload.size());
  auto len = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) frame[i] = static_cast<std::uint8_t>(len >> (8 * i));
  auto t = static_cast<std::uint16_t>(tag);
  frame[4] = static_cast<std::uint8_t>(t);
  frame[5] = static_cast<std::uint8_t>(t >> 8);
  if (!payload.empty()) std::memcpy(frame.data() + kFrameHeaderBytes, payload.data(), payload.size());
  const std::size_t size = frame.size();
  if (transcript_) transcript_->frames.push_back(frame);
  write_frame(std::move(frame));
  auto& c = current();
  c.bytes_sent += size;
  c.messages_sent += 1;
  metrics_.total.bytes_sent += size;
  metrics_.total.messages_sent += 1;
}

std::pair<Tag, Bytes> Channel::recv_any() {
  std::uint8_t header[kFrameHeaderBytes];
  read_exact(header);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= std::uint32_t(header[i]) << (8 * i);
  auto tag = static_cast<Tag>(std::uint16_t(header[4]) | (std::uint16_t(header[5]) << 8));
  if (len > max_frame_) throw TransportError("incoming frame exceeds limit");
  Bytes payload(len);
  if (len) read_exact(payload);
  auto& c = current();
  c.bytes_received += kFrameHeaderBytes + len;
  c.messages_received += 1;
  metrics_.total.bytes_received += kFrameHeaderBytes + len;
  metrics_.total.messages_received += 1;
  return {tag, std::move(payload)};
}

Bytes Channel::recv(Tag expected) {
  auto [tag, payload] = recv_any();
  if (tag != expected)
    throw ProtocolError(std::string("expected message '") + tag_name(expected) + "', got '" +
                        tag_name(tag) + "'");
  return std::move(payload);
}

namespace {

// One direction of an in-process link.
struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> chunks;
  std::size_t offset = 0;  // consumed bytes of chunks.front()
  bool closed = false;
};

class InprocChannel final : public Channel {
 public:
  InprocChannel(std::shared_ptr<Pipe> out, std::shared_ptr<Pipe> in,
                std::chrono::milliseconds timeout)
      : out_(std::move(out)), in_(std::move(in)), timeout_(timeout) {}

  ~InprocChannel() override {
    for (auto* p : {out_.get(), in_.get()}) {
      std::lock_guard lock(p->mu);
      p->closed = true;
      p->cv.notify_all();
    }
  }

 protected:
  void write_all(std::span<const std::uint8_t> data) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw TransportError("peer disconnected");
    out_->chunks.emplace_back(data.begin(), data.end());
    out_->cv.notify_all();
  }

  void write_frame(Bytes&& frame) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw TransportError("peer disconnected");
    out_->chunks.push_back(std::move(frame));
    out_->cv.notify_all();
  }

  void read_exact(std::span<std::uint8_t> out) override {
    std::unique_lock lock(in_->mu);
    std::size_t got = 0;
    while (got < out.size()) {
      if (!in_->cv.wait_for(lock, timeout_, [&] { return !in_->chunks.empty() || in_->closed; }))
        throw TransportError("receive timed out");
      if (in_->chunks.empty()) throw TransportError("peer disconnected");
      auto& front = in_->chunks.front();
      std::size_t n = std::min(out.size() - got, front.size() - in_->offset);
      std::memcpy(out.data() + got, front.data() + in_->offset, n);
      got += n;
      in_->offset += n;
      if (in_->offset == front.size()) {
        in_->chunks.pop_front();
        in_->offset = 0;
      }
    }
  }

 private:
  std::shared_ptr<Pipe> out_;
  std::shared_ptr<Pipe> in_;
  std::chrono::milliseconds timeout_;
};

class TcpChannel final : public Channel {
 public:
  TcpChannel(int fd, std::chrono::milliseconds timeout) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    timeval tv{};
    tv.tv_sec = static_cast<long>(timeout.count() / 1000);
    tv.tv_usec = static_cast<long>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  }
  ~TcpChannel() override { ::close(fd_); }

 protected:
  void write_all(std::span<const std::uint8_t> data) override {
    std::size_t sent = 0;
    while (sent < data.size()) {
      ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw TransportError(std::string("tcp send failed: ") + std::strerror(errno));
      sent += static_cast<std::size_t>(n);
    }
  }

  void read_exact(std::span<std::uint8_t> out) override {
    std::size_t got = 0;
    while (got < out.size()) {
      ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK))
        throw TransportError("receive timed out");
      if (n < 0) throw TransportError(std::string("tcp recv failed: ") + std::strerror(errno));
      if (n == 0) throw TransportError("peer disconnected");
      got += static_cast<std::size_t>(n);
    }
  }

 private:
  int fd_;
};

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  std::string h = host.empty() || host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* res = nullptr;
  if (::getaddrinfo(h.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw TransportError("cannot resolve host " + host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

std::pair<ChannelPtr, ChannelPtr> make_inproc_pair(std::chrono::milliseconds recv_timeout) {
  auto a_to_b = std::make_shared<Pipe>();
  auto b_to_a = std::make_shared<Pipe>();
  return {std::make_unique<InprocChannel>(a_to_b, b_to_a, recv_timeout),
          std::make_unique<InprocChannel>(b_to_a, a_to_b, recv_timeout)};
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError("socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    throw TransportError("bind to " + host + ":" + std::to_string(port) + " failed: " +
                         std::strerror(errno));
  }
  if (::listen(fd_, 8) != 0) {
    ::close(fd_);
    throw TransportError("listen failed");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

ChannelPtr TcpListener::accept(std::chrono::milliseconds recv_timeout) {
  for (;;) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpChannel>(fd, recv_timeout);
    if (errno != EINTR) throw TransportError(std::string("accept failed: ") + std::strerror(errno));
  }
}

ChannelPtr tcp_connect(const std::string& host, std::uint16_t port,
                       std::chrono::milliseconds connect_timeout,
                       std::chrono::milliseconds recv_timeout) {
  sockaddr_in addr = resolve(host, port);
  auto deadline = std::chrono::steady_clock::now() + connect_timeout;
  for (;;) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket() failed");
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0)
      return std::make_unique<TcpChannel>(fd, recv_timeout);
    ::close(fd);
    if (std::chrono::steady_clock::now() > deadline)
      throw TransportError("cannot connect to " + host + ":" + std::to_string(port));
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos) throw InputError("endpoint must be host:port, got '" + text + "'");
  std::string host = text.substr(0, colon);
  try {
    unsigned long port = std::stoul(text.substr(colon + 1));
    if (port > 65535) throw InputError("port out of range in '" + text + "'");
    return {host, static_cast<std::uint16_t>(port)};
  } catch (const std::logic_error&) {
    throw InputError("bad port in endpoint '" + text + "'");
  }
}

}  // namespace ppod
