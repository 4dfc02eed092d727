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

#include "privagg/protocol.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

#include "privagg/dp.h"
#include "privagg/errors.h"

namespace privagg {

void ProtocolConfig::Validate() const {
  if (n_compute < 2) {
    throw InvalidConfig("need at least two compute nodes");
  }
  if (n_clients <= collusion_tolerance + 1) {
    throw InsufficientClients("need N - T - 1 >= 1 clients");
  }
  if (dimension == 0) throw InvalidConfig("dimension must be positive");
  if (sigma_client < 0) throw InvalidConfig("sigma_client must be >= 0");
  fp_params.Validate();
}

std::pair<ClientMessageSet, std::vector<double>> ClientPrepareWithNoise(
    std::span<const double> z, const ProtocolConfig& config, uint64_t round_id,
    uint32_t client_id, BitGen& gen) {
  if (z.size() != config.dimension) {
    throw DimensionMismatch("client input has wrong dimension");
  }
  std::vector<double> noise =
      SampleGaussianNoise(config.sigma_client, z.size(), gen);
  // Clip noised values into the open representable range; overflow odds are
  // negligible for sane configs and clipping keeps the value bounded.
  const double limit = config.fp_params.RangeBound() -
                       std::ldexp(1.0, -config.fp_params.frac_bits);
  std::vector<double> noised(z.size());
  for (size_t j = 0; j < z.size(); ++j) {
    noised[j] = std::clamp(z[j] + noise[j], -limit, limit);
  }
  FixedPointVector encoded =
      FixedPointVector::Encode(noised, config.fp_params);
  ClientMessageSet out;
  out.round_id = round_id;
  out.client_id = client_id;
  out.messages = encoded.SplitShares(config.n_compute, gen);
  return {std::move(out), std::move(noise)};
}

ClientMessageSet ClientPrepare(std::span<const double> z,
                               const ProtocolConfig& config, uint64_t round_id,
                               uint32_t client_id, BitGen& gen) {
  return ClientPrepareWithNoise(z, config, round_id, client_id, gen).first;
}

ComputePartial ComputeAggregate(
    const std::vector<std::pair<uint32_t, FixedPointVector>>& messages,
    const ProtocolConfig& config, uint32_t compute_id, uint64_t round_id) {
  ComputePartial partial;
  partial.compute_id = compute_id;
  partial.round_id = round_id;
  partial.q = FixedPointVector::Zero(config.dimension, config.fp_params);
  for (const auto& [client_id, share] : messages) {
    if (!partial.contributing_clients.insert(client_id).second) {
      throw DuplicateClient("client sent more than one share");
    }
    partial.q = partial.q.Add(share);
  }
  return partial;
}

std::set<uint32_t> ReconcileParticipants(
    const std::vector<ComputePartial>& partials, const ProtocolConfig& config) {
  if (partials.empty()) throw InconsistentPartials("no partials");
  std::set<uint32_t> agreed = partials[0].contributing_clients;
  for (size_t k = 1; k < partials.size(); ++k) {
    std::set<uint32_t> next;
    std::set_intersection(agreed.begin(), agreed.end(),
                          partials[k].contributing_clients.begin(),
                          partials[k].contributing_clients.end(),
                          std::inserter(next, next.begin()));
    agreed = std::move(next);
  }
  if (config.n_clients - agreed.size() > config.collusion_tolerance) {
    throw TooManyDropouts("dropouts exceed the collusion tolerance");
  }
  return agreed;
}

RoundResult FinalSum(const std::vector<ComputePartial>& partials,
                     const ProtocolConfig& config) {
  if (partials.size() != config.n_compute) {
    throw InconsistentPartials("expected one partial per compute node");
  }
  FixedPointVector total =
      FixedPointVector::Zero(config.dimension, config.fp_params);
  for (const ComputePartial& p : partials) {
    if (p.round_id != partials[0].round_id) {
      throw InconsistentPartials("partials disagree on round");
    }
    if (p.q.dimension() != config.dimension) {
      throw InconsistentPartials("partials disagree on dimension");
    }
    if (p.contributing_clients != partials[0].contributing_clients) {
      throw InconsistentPartials("partials disagree on participants");
    }
    total = total.Add(p.q);
  }
  RoundResult result;
  result.dp_sum = total.Decode();
  result.participating_clients = partials[0].contributing_clients;
  for (uint32_t i = 0; i < config.n_clients; ++i) {
    if (!result.participating_clients.contains(config.ClientId(i))) {
      result.dropped_clients.insert(config.ClientId(i));
    }
  }
  return result;
}

std::vector<uint8_t> EncodeParticipantSet(const std::set<uint32_t>& ids) {
  std::vector<uint8_t> out;
  out.reserve(4 + 4 * ids.size());
  const uint32_t n = static_cast<uint32_t>(ids.size());
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<uint8_t>((n >> (8 * i)) & 0xff));
  }
  for (uint32_t id : ids) {
    for (int i = 0; i < 4; ++i) {
      out.push_back(static_cast<uint8_t>((id >> (8 * i)) & 0xff));
    }
  }
  return out;
}

std::set<uint32_t> DecodeParticipantSet(std::span<const uint8_t> b) {
  if (b.size() < 4) throw Error("participant set frame too short");
  uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<uint32_t>(b[i]) << (8 * i);
  if (b.size() != 4 + static_cast<size_t>(n) * 4) {
    throw Error("participant set length mismatch");
  }
  std::set<uint32_t> ids;
  for (uint32_t j = 0; j < n; ++j) {
    uint32_t id = 0;
    for (int i = 0; i < 4; ++i) {
      id |= static_cast<uint32_t>(b[4 + 4 * j + i]) << (8 * i);
    }
    ids.insert(id);
  }
  return ids;
}

std::vector<uint8_t> EncodePartialPayload(const ComputePartial& partial) {
  std::vector<uint8_t> out = EncodeParticipantSet(partial.contributing_clients);
  std::vector<uint8_t> q = partial.q.Serialize();
  out.insert(out.end(), q.begin(), q.end());
  return out;
}

ComputePartial DecodePartialPayload(std::span<const uint8_t> b,
                                    uint32_t compute_id, uint64_t round_id) {
  if (b.size() < 4) throw Error("partial frame too short");
  uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<uint32_t>(b[i]) << (8 * i);
  const size_t set_len = 4 + static_cast<size_t>(n) * 4;
  if (b.size() < set_len) throw Error("partial frame too short");
  ComputePartial partial;
  partial.compute_id = compute_id;
  partial.round_id = round_id;
  partial.contributing_clients = DecodeParticipantSet(b.subspan(0, set_len));
  partial.q = FixedPointVector::Deserialize(b.subspan(set_len));
  return partial;
}

namespace {

// One compute node's state machine for a round. Frames of later phases can
// arrive early when parties run concurrently; they are stashed and replayed.
class ComputeNode {
 public:
  ComputeNode(const ProtocolConfig& config, uint32_t index,
              Transport& transport, uint64_t round_id)
      : config_(config),
        index_(index),
        transport_(transport),
        round_id_(round_id) {}

  // Phase A: gather client shares until all N arrived or the timeout hit,
  // then broadcast the contributing-client set to the other compute nodes.
  void CollectShares() {
    const auto deadline =
        std::chrono::steady_clock::now() + config_.recv_timeout;
    while (shares_.size() < config_.n_clients) {
      auto frame = NextFrame(deadline, MessageKind::kClientShare);
      if (!frame) break;  // timeout: proceed with whoever arrived
      if (shares_.contains(frame->sender)) {
        throw DuplicateClient("client sent more than one share");
      }
      shares_.emplace(frame->sender,
                      FixedPointVector::Deserialize(frame->payload));
    }
    std::set<uint32_t> seen;
    for (const auto& [id, share] : shares_) seen.insert(id);
    Frame out;
    out.round_id = round_id_;
    out.sender = config_.ComputeId(index_);
    out.kind = MessageKind::kParticipantSet;
    out.payload = EncodeParticipantSet(seen);
    for (uint32_t k = 0; k < config_.n_compute; ++k) {
      if (k == index_) continue;
      out.recipient = config_.ComputeId(k);
      transport_.Send(out);
    }
  }

  // Phase B: intersect participant sets, re-sum over the agreed set, and
  // publish the partial (or an abort when too many clients dropped).
  void ExchangeAndPublish() {
    std::set<uint32_t> agreed;
    for (const auto& [id, share] : shares_) agreed.insert(id);
    uint32_t sets_seen = 0;
    const auto deadline =
        std::chrono::steady_clock::now() + config_.recv_timeout;
    while (sets_seen + 1 < config_.n_compute) {
      auto frame = NextFrame(deadline, MessageKind::kParticipantSet);
      if (!frame) {
        throw ChannelClosed("missing participant set from a compute node");
      }
      std::set<uint32_t> theirs = DecodeParticipantSet(frame->payload);
      std::set<uint32_t> next;
      std::set_intersection(agreed.begin(), agreed.end(), theirs.begin(),
                            theirs.end(), std::inserter(next, next.begin()));
      agreed = std::move(next);
      ++sets_seen;
    }
    Frame out;
    out.round_id = round_id_;
    out.sender = config_.ComputeId(index_);
    out.recipient = config_.AggregatorId();
    if (config_.n_clients - agreed.size() > config_.collusion_tolerance) {
      out.kind = MessageKind::kAbort;
      transport_.Send(out);
      return;
    }
    std::vector<std::pair<uint32_t, FixedPointVector>> kept;
    kept.reserve(agreed.size());
    for (uint32_t id : agreed) kept.emplace_back(id, shares_.at(id));
    const ComputePartial partial = ComputeAggregate(
        kept, config_, config_.ComputeId(index_), round_id_);
    out.kind = MessageKind::kComputePartial;
    out.payload = EncodePartialPayload(partial);
    transport_.Send(out);
  }

 private:
  // Next frame of the wanted kind for this round. Frames of other kinds
  // (later-phase messages arriving early) are stashed for later calls.
  std::optional<Frame> NextFrame(std::chrono::steady_clock::time_point deadline,
                                 MessageKind wanted) {
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
      if (it->kind == wanted) {
        Frame f = std::move(*it);
        pending_.erase(it);
        return f;
      }
    }
    for (;;) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return std::nullopt;
      auto frame = transport_.Recv(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                                now));
      if (!frame) return std::nullopt;
      if (frame->round_id != round_id_) continue;  // stale frame
      if (frame->kind != wanted) {
        pending_.push_back(std::move(*frame));
        continue;
      }
      return frame;
    }
  }

  const ProtocolConfig& config_;
  uint32_t index_;
  Transport& transport_;
  uint64_t round_id_;
  std::map<uint32_t, FixedPointVector> shares_;
  std::vector<Frame> pending_;
};

RoundResult CollectResult(const ProtocolConfig& config, Transport& transport,
                          uint64_t round_id) {
  std::vector<ComputePartial> partials;
  const auto deadline = std::chrono::steady_clock::now() + config.recv_timeout;
  while (partials.size() < config.n_compute) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      throw ChannelClosed("missing compute partials");
    }
    auto frame = transport.Recv(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
    if (!frame) throw ChannelClosed("missing compute partials");
    if (frame->round_id != round_id) continue;
    if (frame->kind == MessageKind::kAbort) {
      throw TooManyDropouts("round aborted: dropouts exceed tolerance");
    }
    if (frame->kind != MessageKind::kComputePartial) continue;
    partials.push_back(DecodePartialPayload(
        frame->payload, frame->sender, frame->round_id));
  }
  return FinalSum(partials, config);
}

}  // namespace

RoundResult RunRound(const std::vector<std::vector<double>>& client_inputs,
                     const ProtocolConfig& config, Network& network,
                     const RngFactory& rng_factory, uint64_t round_id,
                     bool threaded) {
  config.Validate();
  if (client_inputs.size() != config.n_clients) {
    throw DimensionMismatch("expected one input vector per client");
  }

  std::vector<std::unique_ptr<Transport>> compute_transports;
  for (uint32_t k = 0; k < config.n_compute; ++k) {
    compute_transports.push_back(network.Join(config.ComputeId(k)));
  }
  auto aggregator_transport = network.Join(config.AggregatorId());

  std::vector<ComputeNode> nodes;
  nodes.reserve(config.n_compute);
  for (uint32_t k = 0; k < config.n_compute; ++k) {
    nodes.emplace_back(config, k, *compute_transports[k], round_id);
  }

  auto run_clients = [&] {
    for (uint32_t i = 0; i < config.n_clients; ++i) {
      auto client_transport = network.Join(config.ClientId(i));
      auto gen = rng_factory(config.ClientId(i));
      ClientMessageSet msgs = ClientPrepare(client_inputs[i], config, round_id,
                                            config.ClientId(i), *gen);
      Frame frame;
      frame.round_id = round_id;
      frame.sender = config.ClientId(i);
      frame.kind = MessageKind::kClientShare;
      for (uint32_t k = 0; k < config.n_compute; ++k) {
        frame.recipient = config.ComputeId(k);
        frame.payload = msgs.messages[k].Serialize();
        client_transport->Send(frame);
      }
    }
  };

  if (!threaded) {
    run_clients();
    for (ComputeNode& node : nodes) node.CollectShares();
    for (ComputeNode& node : nodes) node.ExchangeAndPublish();
    return CollectResult(config, *aggregator_transport, round_id);
  }

  std::exception_ptr compute_error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  for (ComputeNode& node : nodes) {
    threads.emplace_back([&node, &compute_error, &error_mu] {
      try {
        node.CollectShares();
        node.ExchangeAndPublish();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!compute_error) compute_error = std::current_exception();
      }
    });
  }
  RoundResult result;
  std::exception_ptr agg_error;
  std::thread aggregator([&] {
    try {
      result = CollectResult(config, *aggregator_transport, round_id);
    } catch (...) {
      agg_error = std::current_exception();
    }
  });
  run_clients();
  for (std::thread& t : threads) t.join();
  aggregator.join();
  if (agg_error) std::rethrow_exception(agg_error);
  if (compute_error) std::rethrow_exception(compute_error);
  return result;
}

}  // namespace privagg
