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
// Experiment runner: method comparisons over a privacy-budget grid,
// noise scaling-factor tables, and protocol runtime benchmarks, all
// deterministic under an explicit seed.

#ifndef PRIVAGG_HARNESS_H_
#define PRIVAGG_HARNESS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "privagg/blr.h"
#include "privagg/dataset.h"

namespace privagg {

enum class Method {
  kNonPrivate,
  kInputPerturbation,
  kTrustedAggregator,
  kTrustedAggregatorProjected,
  kDistributed,
  kDistributedProjected,
};

std::string MethodName(Method method);
Method ParseMethod(const std::string& name);
std::vector<Method> AllMethods();

struct SyntheticSpec {
  size_t n = 5000;
  uint32_t d = 10;
  double lambda0 = 1.0;
  double lambda = 1.0;
};

struct ExperimentSpec {
  std::vector<Method> methods = AllMethods();
  std::optional<std::string> csv_path;  // overrides synthetic when set
  SyntheticSpec synthetic;
  std::vector<double> eps_grid{0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  double delta = 1e-5;
  int cv_runs = 25;
  Eigen::Index test_size = 500;
  uint32_t n_compute = 3;
  uint32_t collusion_tolerance = 0;
  // Bound-overestimation emulation: every column rescaled to range length
  // 10 with assumed bounds [-7.5, 7.5].
  bool rescale_range10 = true;
  double assumed_bound = 7.5;
  double budget_split = 0.2;
  uint64_t seed = 1;
};

struct ResultRow {
  Method method;
  double epsilon = 0;
  double median_mae = 0;
  double iqr = 0;
  size_t n = 0;
  uint32_t d = 0;
  double wall_time_s = 0;  // reported in the sidecar, not the table
};

struct ResultTable {
  std::vector<ResultRow> rows;
  // Deterministic columns only (timings live in the metadata sidecar).
  std::string ToCsv() const;
};

// For each method x epsilon: fit on a shuffled train split, evaluate MAE
// on the held-out test split, aggregate over cv_runs. Split seeds depend
// on the run index only, so every method x epsilon cell sees the same
// splits.
ResultTable RunComparison(const ExperimentSpec& spec);

struct ScalingRow {
  uint32_t n_clients = 0;
  uint32_t collusion_tolerance = 0;
  double factor = 0;  // N / (N - T - 1)
  std::optional<double> measured;  // Monte-Carlo variance ratio, spot cells
};

// Analytic noise scaling factor per cell, with a Monte-Carlo measured
// aggregate variance ratio for up to three spot cells.
std::vector<ScalingRow> RunScalingFactor(const std::vector<uint32_t>& n_range,
                                         const std::vector<uint32_t>& t_range,
                                         size_t mc_rounds, uint64_t seed);
std::string ScalingTableToCsv(const std::vector<ScalingRow>& rows);

struct BenchRow {
  uint32_t n_clients = 0;
  uint32_t dimension = 0;
  double avg_seconds = 0;
  size_t messages_per_node = 0;
};

// Average secure-sum round wall time over `repeats` repeats per cell.
std::vector<BenchRow> RunProtocolBench(const std::vector<uint32_t>& n_list,
                                       const std::vector<uint32_t>& d_list,
                                       uint32_t n_compute, int repeats,
                                       uint64_t seed);
std::string BenchTableToCsv(const std::vector<BenchRow>& rows);

// Synthetic dataset from the auxiliary generative model.
Dataset GenerateSynthetic(size_t n, uint32_t d, double lambda0, double lambda,
                          uint64_t seed);

// JSON provenance sidecar (seed, config digest, library version, timings).
std::string MetadataSidecar(const ExperimentSpec& spec,
                            const ResultTable& table);

}  // namespace privagg

#endif  // PRIVAGG_HARNESS_H_
