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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "privagg/blr.h"
#include "privagg/dataset.h"
#include "privagg/dp.h"
#include "privagg/errors.h"
#include "privagg/harness.h"
#include "privagg/protocol.h"
#include "privagg/tcp_transport.h"
#include "privagg/transport.h"

namespace {

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw privagg::Error("cannot write " + path);
  out << content;
}

void RunGenData(size_t n, uint32_t d, double lambda0, double lambda,
                uint64_t seed, const std::string& out) {
  const privagg::Dataset data =
      privagg::GenerateSynthetic(n, d, lambda0, lambda, seed);
  privagg::SaveCsv(data, out);
  std::cout << "wrote " << out << " (" << data.n() << " rows, " << data.d() + 1
            << " columns)\n";
}

void RunCompare(const privagg::ExperimentSpec& spec, const std::string& out) {
  std::filesystem::create_directories(out);
  const privagg::ResultTable table = privagg::RunComparison(spec);
  WriteFile(out + "/results.csv", table.ToCsv());
  WriteFile(out + "/metadata.json", privagg::MetadataSidecar(spec, table));
  std::cout << table.ToCsv();
}

void RunSum(const std::string& data_path, double eps, double delta,
            uint32_t n_compute, uint32_t collusion_t,
            const std::string& transport, uint16_t base_port,
            const std::string& key_hex, uint64_t seed, bool seeded,
            const std::string& out) {
  // Each CSV row is one client's input vector.
  std::ifstream in(data_path);
  if (!in) throw privagg::Error("cannot open " + data_path);
  std::vector<std::vector<double>> inputs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    inputs.push_back(std::move(row));
  }
  if (inputs.empty()) throw privagg::Error("no client rows in " + data_path);

  privagg::ProtocolConfig config;
  config.n_clients = static_cast<uint32_t>(inputs.size());
  config.n_compute = n_compute;
  config.collusion_tolerance = collusion_t;
  config.dimension = static_cast<uint32_t>(inputs.front().size());
  config.recv_timeout = std::chrono::milliseconds(5000);
  if (eps > 0) {
    const privagg::PrivacyBudget budget{eps, delta};
    const privagg::QuerySensitivity sensitivity{1.0, config.dimension};
    const double sigma_std = privagg::GaussianSigma(sensitivity, budget);
    config.sigma_client =
        privagg::DistributedSigma(sigma_std, config.n_clients, collusion_t)
            .sigma_client;
  }
  config.Validate();

  const privagg::RngFactory factory =
      seeded ? privagg::SeededRngFactory(seed) : privagg::SecureRngFactory();
  privagg::RoundResult result;
  if (transport == "tcp") {
    std::map<uint32_t, privagg::TcpPeer> peers;
    const uint32_t n_parties = config.n_clients + n_compute + 1;
    for (uint32_t p = 0; p < n_parties; ++p) {
      peers[p] = {"127.0.0.1", static_cast<uint16_t>(base_port + p)};
    }
    privagg::TcpNetwork network(std::move(peers),
                                privagg::ParseKeyHex(key_hex));
    result = RunRound(inputs, config, network, factory, /*round_id=*/0,
                      /*threaded=*/true);
  } else {
    privagg::InProcNetwork network;
    result = RunRound(inputs, config, network, factory);
  }

  std::ostringstream line_out;
  for (size_t j = 0; j < result.dp_sum.size(); ++j) {
    if (j) line_out << ',';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", result.dp_sum[j]);
    line_out << buf;
  }
  line_out << '\n';
  if (!out.empty()) WriteFile(out, line_out.str());
  std::cout << line_out.str();
  std::cout << "participants=" << result.participating_clients.size()
            << " dropped=" << result.dropped_clients.size() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private secure summation and regression"};
  app.set_config("--config");
  app.require_subcommand(1);
  app.fallthrough();

  uint64_t seed = 1;
  app.add_option("--seed", seed, "Master seed for deterministic runs")
      ->capture_default_str();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic CSV dataset");
  size_t gen_n = 5000;
  uint32_t gen_d = 10;
  double gen_lambda0 = 1.0, gen_lambda = 1.0;
  std::string gen_out = "data.csv";
  gen->add_option("--n", gen_n, "Rows")->capture_default_str();
  gen->add_option("--d", gen_d, "Feature columns")->capture_default_str();
  gen->add_option("--lambda0", gen_lambda0, "Prior precision")
      ->capture_default_str();
  gen->add_option("--lambda", gen_lambda, "Noise precision")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV path")->capture_default_str();

  // compare
  auto* cmp = app.add_subcommand(
      "compare", "Method comparison over a privacy-budget grid");
  privagg::ExperimentSpec spec;
  std::vector<std::string> method_names;
  std::string cmp_data;
  std::string cmp_out = "results";
  cmp->add_option("--methods", method_names,
                  "Subset of NP, input_perturbation, TA, TA_proj, DDP, "
                  "DDP_proj (default: all)");
  cmp->add_option("--data", cmp_data, "CSV dataset (default: synthetic)");
  cmp->add_option("--n", spec.synthetic.n, "Synthetic rows")
      ->capture_default_str();
  cmp->add_option("--d", spec.synthetic.d, "Synthetic feature columns")
      ->capture_default_str();
  cmp->add_option("--eps", spec.eps_grid, "Epsilon grid")
      ->capture_default_str();
  cmp->add_option("--delta", spec.delta, "Delta")->capture_default_str();
  cmp->add_option("--cv-runs", spec.cv_runs, "Cross-validation runs")
      ->capture_default_str();
  cmp->add_option("--test-size", spec.test_size, "Held-out rows per run")
      ->capture_default_str();
  cmp->add_option("--n-compute", spec.n_compute, "Compute nodes")
      ->capture_default_str();
  cmp->add_option("--collusion-t", spec.collusion_tolerance,
                  "Collusion tolerance")
      ->capture_default_str();
  cmp->add_option("--assumed-bound", spec.assumed_bound,
                  "Assumed per-column bound")
      ->capture_default_str();
  cmp->add_flag("!--no-rescale", spec.rescale_range10,
                "Skip rescaling columns to range length 10");
  cmp->add_option("--out", cmp_out, "Output directory")->capture_default_str();

  // scaling-factor
  auto* scale = app.add_subcommand("scaling-factor",
                                   "Distributed noise scaling factor table");
  std::vector<uint32_t> n_range{10, 20, 50, 100, 200, 500, 1000};
  std::vector<uint32_t> t_range{0, 1, 5, 10};
  size_t mc_rounds = 2000;
  std::string scale_out;
  scale->add_option("--n-range", n_range, "Client counts")
      ->capture_default_str();
  scale->add_option("--t-range", t_range, "Collusion tolerances")
      ->capture_default_str();
  scale->add_option("--mc-rounds", mc_rounds,
                    "Monte-Carlo rounds per spot cell (0 disables)")
      ->capture_default_str();
  scale->add_option("--out", scale_out, "Output CSV path (default stdout)");

  // bench-protocol
  auto* bench =
      app.add_subcommand("bench-protocol", "Secure-sum round wall times");
  std::vector<uint32_t> bench_n{100, 1000, 10000};
  std::vector<uint32_t> bench_d{10, 100, 1000};
  uint32_t bench_m = 3;
  int bench_repeats = 5;
  std::string bench_out;
  bench->add_option("--n-list", bench_n, "Client counts")
      ->capture_default_str();
  bench->add_option("--d-list", bench_d, "Dimensions")->capture_default_str();
  bench->add_option("--n-compute", bench_m, "Compute nodes")
      ->capture_default_str();
  bench->add_option("--repeats", bench_repeats, "Repeats per cell")
      ->capture_default_str();
  bench->add_option("--out", bench_out, "Output CSV path (default stdout)");

  // sum
  auto* sum = app.add_subcommand(
      "sum", "One-shot secure sum over a CSV of client vectors");
  std::string sum_data;
  double sum_eps = 0, sum_delta = 1e-5;
  uint32_t sum_m = 3, sum_t = 0;
  std::string sum_transport = "inproc";
  uint16_t sum_port = 19000;
  std::string sum_key(64, '0');
  std::string sum_out;
  sum->add_option("--data", sum_data, "CSV with one client vector per row")
      ->required();
  sum->add_option("--eps", sum_eps,
                  "Epsilon for unit-sensitivity noise (0 = no noise)")
      ->capture_default_str();
  sum->add_option("--delta", sum_delta, "Delta")->capture_default_str();
  sum->add_option("--n-compute", sum_m, "Compute nodes")
      ->capture_default_str();
  sum->add_option("--collusion-t", sum_t, "Collusion tolerance")
      ->capture_default_str();
  sum->add_option("--transport", sum_transport, "inproc or tcp")
      ->check(CLI::IsMember({"inproc", "tcp"}))
      ->capture_default_str();
  sum->add_option("--base-port", sum_port, "First TCP port (tcp transport)")
      ->capture_default_str();
  sum->add_option("--key", sum_key, "64-hex-char master key (tcp transport)");
  bool sum_seeded = false;
  sum->add_flag("--seeded", sum_seeded,
                "Derive all randomness from --seed (testing only)");
  sum->add_option("--out", sum_out, "Output CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      RunGenData(gen_n, gen_d, gen_lambda0, gen_lambda, seed, gen_out);
    } else if (*cmp) {
      if (!method_names.empty()) {
        spec.methods.clear();
        for (const std::string& name : method_names) {
          spec.methods.push_back(privagg::ParseMethod(name));
        }
      }
      if (!cmp_data.empty()) spec.csv_path = cmp_data;
      spec.seed = seed;
      RunCompare(spec, cmp_out);
    } else if (*scale) {
      const auto rows =
          privagg::RunScalingFactor(n_range, t_range, mc_rounds, seed);
      const std::string csv = privagg::ScalingTableToCsv(rows);
      if (!scale_out.empty()) WriteFile(scale_out, csv);
      std::cout << csv;
    } else if (*bench) {
      const auto rows = privagg::RunProtocolBench(bench_n, bench_d, bench_m,
                                                  bench_repeats, seed);
      const std::string csv = privagg::BenchTableToCsv(rows);
      if (!bench_out.empty()) WriteFile(bench_out, csv);
      std::cout << csv;
    } else if (*sum) {
      RunSum(sum_data, sum_eps, sum_delta, sum_m, sum_t, sum_transport,
             sum_port, sum_key, seed, sum_seeded, sum_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
