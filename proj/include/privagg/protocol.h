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
// Distributed secure summation: clients add per-client Gaussian noise,
// split the noised contribution into blinding shares across M compute
// nodes, and the published partial sums recombine into the noisy total
// without any party seeing an unmasked contribution.

#ifndef PRIVAGG_PROTOCOL_H_
#define PRIVAGG_PROTOCOL_H_

#include <chrono>
#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "privagg/fixed_point.h"
#include "privagg/rng.h"
#include "privagg/transport.h"

namespace privagg {

struct ProtocolConfig {
  uint32_t n_clients = 0;            // N
  uint32_t n_compute = 2;            // M, at least 2
  uint32_t collusion_tolerance = 0;  // T
  uint32_t dimension = 0;            // d
  FixedPointParams fp_params;
  double sigma_client = 0;  // per-dimension noise std each client adds
  std::chrono::milliseconds recv_timeout{200};

  // Throws InvalidConfig / InsufficientClients on violated invariants.
  // M = 1 is rejected: a single compute node would see blinded-but-unsplit
  // data and the collusion argument is vacuous.
  void Validate() const;

  // Party id layout on the wire.
  uint32_t ClientId(uint32_t index) const { return index; }
  uint32_t ComputeId(uint32_t index) const { return n_clients + index; }
  uint32_t AggregatorId() const { return n_clients + n_compute; }
};

struct ClientMessageSet {
  uint64_t round_id = 0;
  uint32_t client_id = 0;
  // messages[k] goes to compute node k; message 0 carries the noised
  // contribution plus its blinding share, the rest carry blinding only.
  std::vector<FixedPointVector> messages;
};

struct ComputePartial {
  uint32_t compute_id = 0;
  uint64_t round_id = 0;
  std::set<uint32_t> contributing_clients;
  FixedPointVector q;  // modular sum of received shares over the listed clients
};

struct RoundResult {
  std::vector<double> dp_sum;
  std::set<uint32_t> participating_clients;
  std::set<uint32_t> dropped_clients;
};

// Steps 1-2 of a round for one client: sample eta ~ N(0, sigma^2 I),
// encode z + eta, split into M shares summing to the encoded value.
// Noise draws that would overflow the fixed-point range are clipped.
ClientMessageSet ClientPrepare(std::span<const double> z,
                               const ProtocolConfig& config, uint64_t round_id,
                               uint32_t client_id, BitGen& gen);

// Like ClientPrepare but also returns the sampled noise vector, for
// calibration measurements that need to subtract simulated colluders.
std::pair<ClientMessageSet, std::vector<double>> ClientPrepareWithNoise(
    std::span<const double> z, const ProtocolConfig& config, uint64_t round_id,
    uint32_t client_id, BitGen& gen);

// Step 3 at one compute node: modular sum of at most one share per client.
ComputePartial ComputeAggregate(
    const std::vector<std::pair<uint32_t, FixedPointVector>>& messages,
    const ProtocolConfig& config, uint32_t compute_id, uint64_t round_id);

// Intersection of the contributing-client sets; throws TooManyDropouts when
// more than T clients are missing (the privacy guarantee would be void).
std::set<uint32_t> ReconcileParticipants(
    const std::vector<ComputePartial>& partials, const ProtocolConfig& config);

// Decode of the modular sum of partials. Requires reconciliation to have
// succeeded and every partial re-summed over the agreed client set.
RoundResult FinalSum(const std::vector<ComputePartial>& partials,
                     const ProtocolConfig& config);

// Full round over a transport: prepare, send, aggregate, exchange
// participant sets, re-sum over the intersection, publish, final sum.
// When threaded is true each compute node and the aggregator run on their
// own thread (required for socket transports); otherwise the phases run
// sequentially on the calling thread.
RoundResult RunRound(const std::vector<std::vector<double>>& client_inputs,
                     const ProtocolConfig& config, Network& network,
                     const RngFactory& rng_factory, uint64_t round_id = 0,
                     bool threaded = false);

// Serialization helpers for round payloads.
std::vector<uint8_t> EncodeParticipantSet(const std::set<uint32_t>& ids);
std::set<uint32_t> DecodeParticipantSet(std::span<const uint8_t> bytes);
std::vector<uint8_t> EncodePartialPayload(const ComputePartial& partial);
ComputePartial DecodePartialPayload(std::span<const uint8_t> bytes,
                                    uint32_t compute_id, uint64_t round_id);

}  // namespace privagg

#endif  // PRIVAGG_PROTOCOL_H_
