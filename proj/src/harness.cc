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

#include "privagg/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "privagg/errors.h"
#include "privagg/protocol.h"
#include "privagg/transport.h"

namespace privagg {

namespace {

double Quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1 - frac) + v[hi] * frac;
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Rescale every column to range length 10 (bound-overestimation emulation).
void RescaleRange10(Dataset& data) {
  const auto rescale = [](Eigen::Ref<Eigen::VectorXd> col) {
    const double len = col.maxCoeff() - col.minCoeff();
    if (len > 0) col *= 10.0 / len;
  };
  for (Eigen::Index j = 0; j < data.d(); ++j) rescale(data.X.col(j));
  rescale(data.y);
}

double FitAndScore(Method method, const Dataset& train, const Dataset& test,
                   const ExperimentSpec& spec, double epsilon,
                   uint64_t method_seed) {
  const uint32_t d = static_cast<uint32_t>(train.d());
  const ProjectionBounds assumed =
      ProjectionBounds::Uniform(d, spec.assumed_bound, spec.assumed_bound);
  const PrivacyBudget budget{epsilon, spec.delta};
  FitOptions fit;
  fit.lambda0 = spec.synthetic.lambda0;
  fit.lambda = spec.synthetic.lambda;
  fit.budget_split = spec.budget_split;
  SeededBitGen gen(method_seed);

  BlrPosterior posterior;
  switch (method) {
    case Method::kNonPrivate:
      posterior = FitNonPrivate(train.X, train.y, assumed, fit);
      break;
    case Method::kInputPerturbation:
      posterior = FitInputPerturbation(train.X, train.y, assumed, budget, fit,
                                       gen);
      break;
    case Method::kTrustedAggregator:
    case Method::kTrustedAggregatorProjected:
      fit.use_projection = method == Method::kTrustedAggregatorProjected;
      posterior =
          FitTrustedAggregator(train.X, train.y, assumed, budget, fit, gen);
      break;
    case Method::kDistributed:
    case Method::kDistributedProjected: {
      fit.use_projection = method == Method::kDistributedProjected;
      DcaOptions dca;
      dca.n_compute = spec.n_compute;
      dca.collusion_tolerance = spec.collusion_tolerance;
      InProcNetwork network;
      posterior = FitDistributed(train.X, train.y, assumed, budget, fit, dca,
                                 network, SeededRngFactory(method_seed), gen);
      break;
    }
  }
  return MeanAbsoluteError(test.y, test.X * posterior.mean);
}

}  // namespace

std::string MethodName(Method method) {
  switch (method) {
    case Method::kNonPrivate:
      return "NP";
    case Method::kInputPerturbation:
      return "input_perturbation";
    case Method::kTrustedAggregator:
      return "TA";
    case Method::kTrustedAggregatorProjected:
      return "TA_proj";
    case Method::kDistributed:
      return "DDP";
    case Method::kDistributedProjected:
      return "DDP_proj";
  }
  throw InvalidConfig("unknown method");
}

Method ParseMethod(const std::string& name) {
  for (Method m : AllMethods()) {
    if (MethodName(m) == name) return m;
  }
  throw InvalidConfig("unknown method: " + name);
}

std::vector<Method> AllMethods() {
  return {Method::kNonPrivate,         Method::kInputPerturbation,
          Method::kTrustedAggregator,  Method::kTrustedAggregatorProjected,
          Method::kDistributed,        Method::kDistributedProjected};
}

std::string ResultTable::ToCsv() const {
  std::ostringstream out;
  out << "method,epsilon,median_mae,iqr,n,d\n";
  for (const ResultRow& row : rows) {
    out << MethodName(row.method) << ',' << FormatDouble(row.epsilon) << ','
        << FormatDouble(row.median_mae) << ',' << FormatDouble(row.iqr) << ','
        << row.n << ',' << row.d << '\n';
  }
  return out.str();
}

ResultTable RunComparison(const ExperimentSpec& spec) {
  Dataset data =
      spec.csv_path
          ? LoadCsv(*spec.csv_path)
          : GenerateSynthetic(spec.synthetic.n, spec.synthetic.d,
                              spec.synthetic.lambda0, spec.synthetic.lambda,
                              DeriveSeed(spec.seed, "data"));
  if (spec.rescale_range10) RescaleRange10(data);
  if (spec.test_size >= data.n()) {
    throw InvalidConfig("test size must be smaller than the dataset");
  }

  ResultTable table;
  for (Method method : spec.methods) {
    for (double eps : spec.eps_grid) {
      const auto start = std::chrono::steady_clock::now();
      std::vector<double> maes;
      maes.reserve(spec.cv_runs);
      for (int run = 0; run < spec.cv_runs; ++run) {
        // Split seed is method- and epsilon-independent: every cell sees
        // the same cross-validation splits for a given run index.
        std::ostringstream split_tag;
        split_tag << "split|" << run;
        SeededBitGen split_gen(DeriveSeed(spec.seed, split_tag.str()));
        const auto [train, test] =
            TrainTestSplit(data, spec.test_size, split_gen);
        std::ostringstream method_tag;
        method_tag << MethodName(method) << '|' << FormatDouble(eps) << '|'
                   << run;
        maes.push_back(FitAndScore(method, train, test, spec, eps,
                                   DeriveSeed(spec.seed, method_tag.str())));
      }
      ResultRow row;
      row.method = method;
      row.epsilon = eps;
      row.median_mae = Quantile(maes, 0.5);
      row.iqr = Quantile(maes, 0.75) - Quantile(maes, 0.25);
      row.n = static_cast<size_t>(data.n());
      row.d = static_cast<uint32_t>(data.d());
      row.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        start)
              .count();
      table.rows.push_back(row);
    }
  }
  return table;
}

std::vector<ScalingRow> RunScalingFactor(const std::vector<uint32_t>& n_range,
                                         const std::vector<uint32_t>& t_range,
                                         size_t mc_rounds, uint64_t seed) {
  std::vector<ScalingRow> rows;
  for (uint32_t t : t_range) {
    for (uint32_t n : n_range) {
      if (n <= t + 1) throw InsufficientClients("cell with N <= T + 1");
      ScalingRow row;
      row.n_clients = n;
      row.collusion_tolerance = t;
      row.factor = static_cast<double>(n) / (n - t - 1);
      rows.push_back(row);
    }
  }
  // Monte-Carlo spot checks on first, middle, and last cell.
  if (mc_rounds > 0 && !rows.empty()) {
    const size_t spots[3] = {0, rows.size() / 2, rows.size() - 1};
    for (size_t s : spots) {
      ScalingRow& row = rows[s];
      if (row.measured) continue;
      const NoisePlan plan =
          DistributedSigma(1.0, row.n_clients, row.collusion_tolerance);
      ProtocolConfig config;
      config.n_clients = row.n_clients;
      config.n_compute = 2;
      config.collusion_tolerance = row.collusion_tolerance;
      config.dimension = 1;
      config.sigma_client = plan.sigma_client;
      const std::vector<std::vector<double>> inputs(row.n_clients, {0.0});
      double sum = 0, sum_sq = 0;
      for (size_t r = 0; r < mc_rounds; ++r) {
        InProcNetwork network;
        const RoundResult result =
            RunRound(inputs, config, network,
                     SeededRngFactory(DeriveSeed(seed, std::to_string(
                                                           s * mc_rounds + r))),
                     r);
        sum += result.dp_sum[0];
        sum_sq += result.dp_sum[0] * result.dp_sum[0];
      }
      const double mean = sum / static_cast<double>(mc_rounds);
      row.measured =
          sum_sq / static_cast<double>(mc_rounds) - mean * mean;  // sigma_std=1
    }
  }
  return rows;
}

std::string ScalingTableToCsv(const std::vector<ScalingRow>& rows) {
  std::ostringstream out;
  out << "n_clients,collusion_tolerance,factor,measured_ratio\n";
  for (const ScalingRow& row : rows) {
    out << row.n_clients << ',' << row.collusion_tolerance << ','
        << FormatDouble(row.factor) << ','
        << (row.measured ? FormatDouble(*row.measured) : std::string()) << '\n';
  }
  return out.str();
}

std::vector<BenchRow> RunProtocolBench(const std::vector<uint32_t>& n_list,
                                       const std::vector<uint32_t>& d_list,
                                       uint32_t n_compute, int repeats,
                                       uint64_t seed) {
  std::vector<BenchRow> rows;
  for (uint32_t n : n_list) {
    for (uint32_t d : d_list) {
      ProtocolConfig config;
      config.n_clients = n;
      config.n_compute = n_compute;
      config.dimension = d;
      config.sigma_client = 1.0;
      config.recv_timeout = std::chrono::milliseconds(10000);
      const std::vector<std::vector<double>> inputs(
          n, std::vector<double>(d, 0.5));
      double total = 0;
      for (int r = 0; r < repeats; ++r) {
        InProcNetwork network;
        const auto start = std::chrono::steady_clock::now();
        RunRound(inputs, config, network,
                 SeededRngFactory(DeriveSeed(seed, std::to_string(r))), r);
        total += std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
      }
      BenchRow row;
      row.n_clients = n;
      row.dimension = d;
      row.avg_seconds = total / repeats;
      row.messages_per_node = n;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string BenchTableToCsv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "n_clients,dimension,avg_seconds,messages_per_node\n";
  for (const BenchRow& row : rows) {
    out << row.n_clients << ',' << row.dimension << ','
        << FormatDouble(row.avg_seconds) << ',' << row.messages_per_node
        << '\n';
  }
  return out.str();
}

Dataset GenerateSynthetic(size_t n, uint32_t d, double lambda0, double lambda,
                          uint64_t seed) {
  SeededBitGen gen(seed);
  auto [X, y] = GenerateAuxiliary(n, d, lambda0, lambda, gen);
  Dataset data;
  data.X = std::move(X);
  data.y = std::move(y);
  return data;
}

std::string MetadataSidecar(const ExperimentSpec& spec,
                            const ResultTable& table) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  j["delta"] = spec.delta;
  j["eps_grid"] = spec.eps_grid;
  j["cv_runs"] = spec.cv_runs;
  j["test_size"] = spec.test_size;
  j["n_compute"] = spec.n_compute;
  j["collusion_tolerance"] = spec.collusion_tolerance;
  j["assumed_bound"] = spec.assumed_bound;
  j["budget_split"] = spec.budget_split;
  j["version"] = "0.1.0";
  std::vector<std::string> methods;
  for (Method m : spec.methods) methods.push_back(MethodName(m));
  j["methods"] = methods;
  nlohmann::json timings = nlohmann::json::array();
  for (const ResultRow& row : table.rows) {
    timings.push_back({{"method", MethodName(row.method)},
                       {"epsilon", row.epsilon},
                       {"wall_time_s", row.wall_time_s}});
  }
  j["timings"] = timings;
  return j.dump(2);
}

}  // namespace privagg
