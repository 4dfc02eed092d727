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

#include "privagg/transport.h"

#include <thread>

#include "privagg/errors.h"

namespace privagg {

std::vector<uint8_t> Frame::Encode() const {
  std::vector<uint8_t> out;
  out.reserve(17 + payload.size());
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<uint8_t>((round_id >> (8 * i)) & 0xff));
  }
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<uint8_t>((sender >> (8 * i)) & 0xff));
  }
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<uint8_t>((recipient >> (8 * i)) & 0xff));
  }
  out.push_back(static_cast<uint8_t>(kind));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Frame Frame::Decode(std::span<const uint8_t> b) {
  if (b.size() < 17) throw Error("frame too short");
  Frame f;
  for (int i = 0; i < 8; ++i) f.round_id |= static_cast<uint64_t>(b[i]) << (8 * i);
  for (int i = 0; i < 4; ++i) f.sender |= static_cast<uint32_t>(b[8 + i]) << (8 * i);
  for (int i = 0; i < 4; ++i) {
    f.recipient |= static_cast<uint32_t>(b[12 + i]) << (8 * i);
  }
  if (b[16] > static_cast<uint8_t>(MessageKind::kAbort)) {
    throw Error("unknown message kind");
  }
  f.kind = static_cast<MessageKind>(b[16]);
  f.payload.assign(b.begin() + 17, b.end());
  return f;
}

class InProcNetwork::Mailbox {
 public:
  void Push(Frame frame) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      queue_.push_back(std::move(frame));
    }
    cv_.notify_one();
  }

  std::optional<Frame> Pop(std::chrono::milliseconds timeout) {
    std::unique_lock<std::mutex> lock(mu_);
    if (!cv_.wait_for(lock, timeout, [this] { return !queue_.empty(); })) {
      return std::nullopt;
    }
    Frame f = std::move(queue_.front());
    queue_.pop_front();
    return f;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Frame> queue_;
};

class InProcNetwork::InProcTransport : public Transport {
 public:
  InProcTransport(InProcNetwork* net, uint32_t party_id,
                  std::shared_ptr<Mailbox> inbox)
      : net_(net), party_id_(party_id), inbox_(std::move(inbox)) {}

  void Send(const Frame& frame) override {
    uint32_t index;
    {
      std::lock_guard<std::mutex> lock(net_->mu_);
      index = net_->send_counts_[{party_id_, frame.round_id}]++;
    }
    if (net_->ShouldDrop(party_id_, frame.round_id, index)) return;
    net_->Deliver(frame);
  }

  std::optional<Frame> Recv(std::chrono::milliseconds timeout) override {
    return inbox_->Pop(timeout);
  }

 private:
  InProcNetwork* net_;
  uint32_t party_id_;
  std::shared_ptr<Mailbox> inbox_;
};

InProcNetwork::InProcNetwork(FaultScript script) : script_(std::move(script)) {}

std::unique_ptr<Transport> InProcNetwork::Join(uint32_t party_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto& box = mailboxes_[party_id];
  if (!box) box = std::make_shared<Mailbox>();
  return std::make_unique<InProcTransport>(this, party_id, box);
}

bool InProcNetwork::ShouldDrop(uint32_t sender, uint64_t round_id,
                               uint32_t send_index) {
  for (const FaultEvent& ev : script_) {
    if (ev.party_id != sender || ev.round_id != round_id) continue;
    switch (ev.action) {
      case FaultAction::kDropBeforeSend:
        return true;
      case FaultAction::kCrashAfterPartialSend:
        if (send_index >= 1) return true;
        break;
      case FaultAction::kDelay:
        std::this_thread::sleep_for(std::chrono::milliseconds(ev.delay_ms));
        break;
    }
  }
  return false;
}

void InProcNetwork::Deliver(const Frame& frame) {
  std::shared_ptr<Mailbox> box;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = mailboxes_.find(frame.recipient);
    if (it == mailboxes_.end()) {
      auto& created = mailboxes_[frame.recipient];
      created = std::make_shared<Mailbox>();
      box = created;
    } else {
      box = it->second;
    }
  }
  box->Push(frame);
}

}  // namespace privagg
