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

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "privagg/errors.h"
#include "privagg/rng.h"
#include "privagg/transport.h"

namespace privagg {
namespace {

ProtocolConfig MakeConfig(uint32_t n, uint32_t m, uint32_t d,
                          double sigma = 0.0, uint32_t t = 0) {
  ProtocolConfig config;
  config.n_clients = n;
  config.n_compute = m;
  config.collusion_tolerance = t;
  config.dimension = d;
  config.sigma_client = sigma;
  return config;
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(MakeConfig(10, 1, 1).Validate(), InvalidConfig);
  CHECK_THROWS_AS(MakeConfig(0, 2, 1).Validate(), InsufficientClients);
  CHECK_THROWS_AS(MakeConfig(3, 2, 1, 0.0, 2).Validate(),
                  InsufficientClients);
  CHECK_NOTHROW(MakeConfig(3, 2, 1, 0.0, 1).Validate());
}

TEST_CASE("client prepare shares recombine to the input without noise") {
  const auto config = MakeConfig(4, 2, 1);
  SeededBitGen gen(5);
  const std::vector<double> z{1.0};
  const ClientMessageSet msgs = ClientPrepare(z, config, 0, 0, gen);
  REQUIRE(msgs.messages.size() == 2);
  const auto sum = msgs.messages[0].Add(msgs.messages[1]);
  CHECK(sum.Decode()[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("with noise the message sum decodes to input plus the draw") {
  const auto config = MakeConfig(4, 3, 2, /*sigma=*/1.5);
  SeededBitGen gen(7);
  const std::vector<double> z{2.0, -3.0};
  const auto [msgs, eta] = ClientPrepareWithNoise(z, config, 0, 1, gen);
  auto sum = msgs.messages[0];
  for (size_t k = 1; k < msgs.messages.size(); ++k) {
    sum = sum.Add(msgs.messages[k]);
  }
  const auto decoded = sum.Decode();
  for (size_t j = 0; j < z.size(); ++j) {
    CHECK(std::abs(decoded[j] - (z[j] + eta[j])) <= 1e-9);
  }
}

TEST_CASE("compute aggregate equals brute-force modular sum") {
  const auto config = MakeConfig(100, 2, 3);
  SeededBitGen gen(11);
  std::vector<std::pair<uint32_t, FixedPointVector>> messages;
  auto oracle = FixedPointVector::Zero(3, config.fp_params);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (uint32_t i = 0; i < 100; ++i) {
    std::vector<double> x{u(rng), u(rng), u(rng)};
    auto v = FixedPointVector::Encode(x, config.fp_params);
    oracle = oracle.Add(v);
    messages.emplace_back(i, std::move(v));
  }
  const ComputePartial partial = ComputeAggregate(messages, config, 100, 0);
  CHECK(partial.q == oracle);
  CHECK(partial.contributing_clients.size() == 100);

  SUBCASE("empty and singleton inputs") {
    const auto empty = ComputeAggregate({}, config, 100, 0);
    CHECK(empty.q == FixedPointVector::Zero(3, config.fp_params));
    CHECK(empty.contributing_clients.empty());
    const auto single =
        ComputeAggregate({messages.front()}, config, 100, 0);
    CHECK(single.q == messages.front().second);
  }

  SUBCASE("duplicate clients rejected") {
    messages.emplace_back(0, messages.front().second);
    CHECK_THROWS_AS(ComputeAggregate(messages, config, 100, 0),
                    DuplicateClient);
  }
}

std::vector<ComputePartial> PartialsWithClients(
    const ProtocolConfig& config,
    const std::vector<std::set<uint32_t>>& sets) {
  std::vector<ComputePartial> partials;
  for (size_t k = 0; k < sets.size(); ++k) {
    ComputePartial p;
    p.compute_id = config.ComputeId(static_cast<uint32_t>(k));
    p.round_id = 0;
    p.contributing_clients = sets[k];
    p.q = FixedPointVector::Zero(config.dimension, config.fp_params);
    partials.push_back(std::move(p));
  }
  return partials;
}

TEST_CASE("participant reconciliation") {
  const auto config = MakeConfig(4, 2, 1, 0.0, /*t=*/1);
  const std::set<uint32_t> all{0, 1, 2, 3};
  CHECK(ReconcileParticipants(PartialsWithClients(config, {all, all}),
                              config) == all);

  const std::set<uint32_t> missing7{0, 1, 3};
  CHECK(ReconcileParticipants(PartialsWithClients(config, {all, missing7}),
                              config) == missing7);

  const std::set<uint32_t> two_missing{0, 3};
  CHECK_THROWS_AS(ReconcileParticipants(
                      PartialsWithClients(config, {all, two_missing}), config),
                  TooManyDropouts);
}

TEST_CASE("final sum rejects inconsistent partials") {
  const auto config = MakeConfig(2, 2, 1);
  auto partials = PartialsWithClients(config, {{0, 1}, {0, 1}});
  partials[1].round_id = 9;
  CHECK_THROWS_AS(FinalSum(partials, config), InconsistentPartials);
}

TEST_CASE("zero-noise round returns the exact sum") {
  const auto config = MakeConfig(10, 3, 2);
  InProcNetwork network;
  std::vector<std::vector<double>> inputs;
  std::vector<double> expected(2, 0.0);
  for (int i = 0; i < 10; ++i) {
    inputs.push_back({i * 0.25, -i * 1.5});
    expected[0] += i * 0.25;
    expected[1] += -i * 1.5;
  }
  const RoundResult result =
      RunRound(inputs, config, network, SeededRngFactory(3));
  CHECK(result.dp_sum[0] == doctest::Approx(expected[0]).epsilon(1e-9));
  CHECK(result.dp_sum[1] == doctest::Approx(expected[1]).epsilon(1e-9));
  CHECK(result.participating_clients.size() == 10);
  CHECK(result.dropped_clients.empty());
}

TEST_CASE("threaded and sequential orchestration agree") {
  const auto config = MakeConfig(6, 2, 3, /*sigma=*/0.5);
  std::vector<std::vector<double>> inputs(6, {1.0, 2.0, 3.0});
  InProcNetwork net_a, net_b;
  const RoundResult a =
      RunRound(inputs, config, net_a, SeededRngFactory(77), 4, false);
  const RoundResult b =
      RunRound(inputs, config, net_b, SeededRngFactory(77), 4, true);
  CHECK(a.dp_sum == b.dp_sum);
}

TEST_CASE("two client round returns the sum of noised values") {
  const auto config = MakeConfig(2, 3, 1, /*sigma=*/1.0);
  InProcNetwork network;
  const RoundResult result =
      RunRound({{0.25}, {-0.5}}, config, network, SeededRngFactory(21), 2);
  // Oracle: replay each client's noise with the same derived generator.
  double expected = 0;
  const std::vector<double> inputs{0.25, -0.5};
  for (uint32_t i = 0; i < 2; ++i) {
    auto gen = SeededRngFactory(21)(config.ClientId(i));
    const auto [msgs, eta] = ClientPrepareWithNoise(
        std::vector<double>{inputs[i]}, config, 2, i, *gen);
    expected += inputs[i] + eta[0];
  }
  CHECK(std::abs(result.dp_sum[0] - expected) <= 1e-8);
}

TEST_CASE("seeded end-to-end oracle for a noisy round") {
  const auto config = MakeConfig(50, 3, 10, /*sigma=*/2.0, /*t=*/5);
  std::vector<std::vector<double>> inputs;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(10);
    for (double& v : x) v = u(rng);
    inputs.push_back(std::move(x));
  }
  InProcNetwork network;
  const RoundResult result =
      RunRound(inputs, config, network, SeededRngFactory(55), 7);

  // Oracle: sum of encode(z_i + eta_i) outside the protocol, same seeds.
  auto oracle = FixedPointVector::Zero(10, config.fp_params);
  for (uint32_t i = 0; i < 50; ++i) {
    auto gen = SeededRngFactory(55)(config.ClientId(i));
    const ClientMessageSet msgs =
        ClientPrepare(inputs[i], config, 7, i, *gen);
    auto client_sum = msgs.messages[0];
    for (size_t k = 1; k < msgs.messages.size(); ++k) {
      client_sum = client_sum.Add(msgs.messages[k]);
    }
    oracle = oracle.Add(client_sum);
  }
  CHECK(result.dp_sum == oracle.Decode());
}

TEST_CASE("aggregate noise variance matches N sigma^2") {
  const auto config = MakeConfig(20, 2, 1, /*sigma=*/1.0);
  const std::vector<std::vector<double>> inputs(20, {0.0});
  constexpr int kRounds = 4000;
  double sum = 0, sum_sq = 0;
  for (int r = 0; r < kRounds; ++r) {
    InProcNetwork network;
    const RoundResult result =
        RunRound(inputs, config, network, SeededRngFactory(1000 + r), r);
    sum += result.dp_sum[0];
    sum_sq += result.dp_sum[0] * result.dp_sum[0];
  }
  const double mean = sum / kRounds;
  const double var = sum_sq / kRounds - mean * mean;
  CHECK(var == doctest::Approx(20.0).epsilon(0.10));
}

TEST_CASE("dropouts within tolerance keep the round alive") {
  const auto config = MakeConfig(10, 3, 1, 0.0, /*t=*/2);
  // Clients 4 and 7 never send anything.
  FaultScript script{{4, 0, FaultAction::kDropBeforeSend, 0},
                     {7, 0, FaultAction::kDropBeforeSend, 0}};
  InProcNetwork network(std::move(script));
  std::vector<std::vector<double>> inputs;
  double expected = 0;
  for (int i = 0; i < 10; ++i) {
    inputs.push_back({double(i)});
    if (i != 4 && i != 7) expected += i;
  }
  const RoundResult result =
      RunRound(inputs, config, network, SeededRngFactory(8));
  CHECK(result.dp_sum[0] == doctest::Approx(expected).epsilon(1e-9));
  CHECK(result.dropped_clients == std::set<uint32_t>{4, 7});
  CHECK(result.participating_clients.size() == 8);
}

TEST_CASE("partial-send crash drops the client consistently") {
  const auto config = MakeConfig(5, 3, 1, 0.0, /*t=*/1);
  // Client 2 delivers only its first share, then crashes.
  FaultScript script{{2, 0, FaultAction::kCrashAfterPartialSend, 0}};
  InProcNetwork network(std::move(script));
  std::vector<std::vector<double>> inputs{{1}, {2}, {4}, {8}, {16}};
  const RoundResult result =
      RunRound(inputs, config, network, SeededRngFactory(9));
  CHECK(result.dp_sum[0] == doctest::Approx(1 + 2 + 8 + 16).epsilon(1e-9));
  CHECK(result.dropped_clients == std::set<uint32_t>{2});
}

TEST_CASE("one dropout too many aborts the round") {
  const auto config = MakeConfig(8, 2, 1, 0.0, /*t=*/2);
  FaultScript script{{1, 0, FaultAction::kDropBeforeSend, 0},
                     {3, 0, FaultAction::kDropBeforeSend, 0},
                     {5, 0, FaultAction::kDropBeforeSend, 0}};
  InProcNetwork network(std::move(script));
  const std::vector<std::vector<double>> inputs(8, {1.0});
  CHECK_THROWS_AS(RunRound(inputs, config, network, SeededRngFactory(10)),
                  TooManyDropouts);
}

// Blinding soundness: the first message (carrying the payload) is uniform
// per byte thanks to the additive mask.
TEST_CASE("payload-carrying message is marginally uniform") {
  const auto config = MakeConfig(4, 2, 1);
  SeededBitGen gen(12);
  constexpr int kDraws = 25600;
  std::vector<int> counts(256, 0);
  for (int r = 0; r < kDraws; ++r) {
    const auto msgs =
        ClientPrepare(std::vector<double>{123.456}, config, r, 0, gen);
    ++counts[msgs.messages[0].values()[0] & 0xff];
  }
  const double expected = kDraws / 256.0;
  double chi2 = 0;
  for (int c : counts) {
    const double dev = c - expected;
    chi2 += dev * dev / expected;
  }
  CHECK(chi2 < 255 + 5 * 22.6);
}

}  // namespace
}  // namespace privagg
