// Copyright 2026 The privagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Pluggable channel layer between protocol parties. The in-process network
// doubles as a deterministic fault-injection harness; fault scripts live
// here so party state machines stay identical across test and production
// paths.

#ifndef PRIVAGG_TRANSPORT_H_
#define PRIVAGG_TRANSPORT_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace privagg {

enum class MessageKind : uint8_t {
  kClientShare = 0,
  kComputePartial = 1,
  kParticipantSet = 2,
  kAbort = 3,
};

// Round message header + payload. Header wire layout: u64 round_id,
// u32 sender_id, u32 recipient_id, u8 message_kind, all little-endian.
struct Frame {
  uint64_t round_id = 0;
  uint32_t sender = 0;
  uint32_t recipient = 0;
  MessageKind kind = MessageKind::kClientShare;
  std::vector<uint8_t> payload;

  std::vector<uint8_t> Encode() const;
  static Frame Decode(std::span<const uint8_t> bytes);
};

// Per-party mailbox view of the network. Owned by exactly one party.
class Transport {
 public:
  virtual ~Transport() = default;
  // At-most-once delivery; silently dropped when a scripted fault fires.
  virtual void Send(const Frame& frame) = 0;
  // Next frame addressed to this party, or nullopt on timeout.
  virtual std::optional<Frame> Recv(std::chrono::milliseconds timeout) = 0;
};

class Network {
 public:
  virtual ~Network() = default;
  virtual std::unique_ptr<Transport> Join(uint32_t party_id) = 0;
};

enum class FaultAction {
  kDropBeforeSend,        // every send by the party in the round is dropped
  kCrashAfterPartialSend,  // first send delivered, the rest dropped
  kDelay,                 // delivery delayed by delay_ms
};

struct FaultEvent {
  uint32_t party_id = 0;
  uint64_t round_id = 0;
  FaultAction action = FaultAction::kDropBeforeSend;
  uint32_t delay_ms = 0;
};

using FaultScript = std::vector<FaultEvent>;

// Thread-safe in-process network of per-party queues.
class InProcNetwork : public Network {
 public:
  InProcNetwork() = default;
  explicit InProcNetwork(FaultScript script);

  std::unique_ptr<Transport> Join(uint32_t party_id) override;

 private:
  class Mailbox;
  class InProcTransport;

  void Deliver(const Frame& frame);
  bool ShouldDrop(uint32_t sender, uint64_t round_id, uint32_t send_index);

  std::mutex mu_;
  std::map<uint32_t, std::shared_ptr<Mailbox>> mailboxes_;
  FaultScript script_;
  // (party, round) -> number of sends so far, for partial-crash scripts.
  std::map<std::pair<uint32_t, uint64_t>, uint32_t> send_counts_;
};

}  // namespace privagg

#endif  // PRIVAGG_TRANSPORT_H_
