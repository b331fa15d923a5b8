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

#include "ppod/ot.hpp"

#include <exception>
#include <thread>

#include "ppod/bytes.hpp"
#include "ppod/errors.hpp"

namespace ppod {
namespace {

void put_block(ByteWriter& w, const Block& b) {
  w.u64(b.lo);
  w.u64(b.hi);
}

Block get_block(ByteReader& r) {
  Block b;
  b.lo = r.u64();
  b.hi = r.u64();
  return b;
}

}  // namespace

OtMode parse_ot_mode(const std::string& text) {
  if (text == "ideal-ot" || text == "ideal") return OtMode::kIdeal;
  if (text == "real-ot" || text == "real") return OtMode::kReal;
  throw ParameterError("unknown OT mode '" + text + "' (expected ideal-ot or real-ot)");
}

const char* to_string(OtMode mode) { return mode == OtMode::kIdeal ? "ideal-ot" : "real-ot"; }

void require_supported(OtMode mode) {
  if (mode == OtMode::kReal) throw UnsupportedMode("real-ot is not available in this build; use ideal-ot");
}

void OtDealer::deposit(std::uint64_t seq, std::vector<LabelPair> pairs) {
  std::lock_guard lock(mu_);
  if (pending_.count(seq)) throw ProtocolError("OT sequence " + std::to_string(seq) + " deposited twice");
  pending_.emplace(seq, std::move(pairs));
  cv_.notify_all();
}

std::vector<Block> OtDealer::select(std::uint64_t seq, const BitVec& choices) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout_, [&] { return aborted_ || pending_.count(seq) > 0; }))
    throw TransportError("OT sender never deposited sequence " + std::to_string(seq));
  if (aborted_) throw TransportError("OT dealer aborted");
  auto node = pending_.extract(seq);
  const auto& pairs = node.mapped();
  if (pairs.size() != choices.size())
    throw ParameterError("OT: " + std::to_string(choices.size()) + " choices for " + std::to_string(pairs.size()) +
                         " pairs");
  std::vector<Block> out(pairs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = choices[i] ? pairs[i].one : pairs[i].zero;
  ++transfers_;
  return out;
}

void OtDealer::abort() {
  std::lock_guard lock(mu_);
  aborted_ = true;
  cv_.notify_all();
}

std::uint64_t OtDealer::transfers() const {
  std::lock_guard lock(mu_);
  return transfers_;
}

void ot_handle_send(OtDealer& dealer, std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  std::uint64_t seq = r.u64();
  std::uint32_t n = r.u32();
  if (n > r.remaining() / 32) throw ProtocolError("OT send: pair count exceeds payload");
  std::vector<LabelPair> pairs(n);
  for (auto& p : pairs) {
    p.zero = get_block(r);
    p.one = get_block(r);
  }
  r.expect_done();
  dealer.deposit(seq, std::move(pairs));
}

void ot_handle_choose(OtDealer& dealer, Channel& receiver, std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  std::uint64_t seq = r.u64();
  std::uint32_t n = r.u32();
  auto packed = r.raw((n + 7) / 8);
  r.expect_done();
  BitVec choices(n);
  for (std::uint32_t i = 0; i < n; ++i) choices[i] = (packed[i / 8] >> (i % 8)) & 1u;
  auto labels = dealer.select(seq, choices);
  ByteWriter w;
  w.reserve(12 + labels.size() * 16);
  w.u64(seq);
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (const auto& b : labels) put_block(w, b);
  receiver.send(Tag::kOtResult, w);
}

OtSender::OtSender(Channel& dealer, OtMode mode) : dealer_(dealer) { require_supported(mode); }

void OtSender::send(std::span<const LabelPair> pairs) {
  ByteWriter w;
  w.reserve(12 + pairs.size() * 32);
  w.u64(seq_++);
  w.u32(static_cast<std::uint32_t>(pairs.size()));
  for (const auto& p : pairs) {
    put_block(w, p.zero);
    put_block(w, p.one);
  }
  dealer_.send(Tag::kOtSend, w);
}

OtReceiver::OtReceiver(Channel& dealer, OtMode mode) : dealer_(dealer) { require_supported(mode); }

std::vector<Block> OtReceiver::receive(const BitVec& choices) {
  const std::uint64_t seq = seq_++;
  ByteWriter w;
  w.u64(seq);
  w.u32(static_cast<std::uint32_t>(choices.size()));
  std::vector<std::uint8_t> packed((choices.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < choices.size(); ++i)
    if (choices[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  w.raw(packed);
  dealer_.send(Tag::kOtChoose, w);
  auto payload = dealer_.recv(Tag::kOtResult);
  ByteReader r(payload);
  if (r.u64() != seq) throw ProtocolError("OT result for the wrong sequence number");
  std::uint32_t n = r.u32();
  if (n != choices.size()) throw ProtocolError("OT result has the wrong label count");
  std::vector<Block> out(n);
  for (auto& b : out) b = get_block(r);
  r.expect_done();
  return out;
}

std::vector<Block> ot_transfer(const BitVec& choices, std::span<const LabelPair> pairs, OtMode mode) {
  require_supported(mode);
  if (choices.size() != pairs.size())
    throw ParameterError("OT: " + std::to_string(choices.size()) + " choices for " + std::to_string(pairs.size()) +
                         " pairs");
  auto [sender_end, dealer_s] = make_inproc_pair();
  auto [receiver_end, dealer_r] = make_inproc_pair();
  OtDealer dealer;
  std::exception_ptr failure;
  std::thread serve([&, ds = dealer_s.get(), dr = dealer_r.get()] {
    try {
      ot_handle_send(dealer, ds->recv(Tag::kOtSend));
      ot_handle_choose(dealer, *dr, dr->recv(Tag::kOtChoose));
    } catch (...) {
      failure = std::current_exception();
      dealer.abort();
    }
  });
  std::vector<Block> out;
  try {
    OtSender(*sender_end, mode).send(pairs);
    out = OtReceiver(*receiver_end, mode).receive(choices);
  } catch (...) {
    sender_end.reset();
    receiver_end.reset();
    dealer.abort();
    serve.join();
    throw;
  }
  serve.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace ppod
