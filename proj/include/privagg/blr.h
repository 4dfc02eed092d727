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
// Bayesian linear regression by sufficient-statistics perturbation, with
// data projection, a private marginal-std round, and auxiliary-data
// threshold search. Fits come in three flavours: distributed (summations
// through the secure-sum protocol), trusted aggregator (central noise),
// and input perturbation (per-record noise baseline).

#ifndef PRIVAGG_BLR_H_
#define PRIVAGG_BLR_H_

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "privagg/dp.h"
#include "privagg/fixed_point.h"
#include "privagg/protocol.h"
#include "privagg/rng.h"
#include "privagg/transport.h"

namespace privagg {

struct SufficientStatistics {
  Eigen::MatrixXd xx;  // sum of x_i x_i^T, symmetric d x d
  Eigen::VectorXd xy;  // sum of x_i y_i
  size_t n = 0;
};

struct BlrPosterior {
  Eigen::MatrixXd precision;  // lambda0 I + lambda * xx (+ ridge)
  Eigen::VectorXd mean;
  double lambda0 = 1.0;
  double lambda = 1.0;
  // Smallest ladder increment (times lambda0) that made the perturbed
  // precision factorizable; 0 for unperturbed statistics.
  double ridge_added = 0.0;
};

struct ProjectionBounds {
  enum class Provenance { kAssumed, kEstimated };
  // Thresholds c_1..c_{d+1}: features first, target last, all positive.
  Eigen::VectorXd thresholds;
  Provenance provenance = Provenance::kAssumed;

  void Validate() const;
  // Uniform bounds helper: c_x on d feature dimensions, c_y on the target.
  static ProjectionBounds Uniform(uint32_t d, double c_x, double c_y);
};

// Componentwise clamp into [-c_j, c_j].
Eigen::VectorXd Project(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& thresholds);
// Row-wise projection of a dataset; bounds cover d features plus target.
void ProjectDataset(Eigen::MatrixXd& X, Eigen::VectorXd& y,
                    const ProjectionBounds& bounds);

SufficientStatistics SuffStats(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y);

// Upper triangle of xx row-major, then xy: d(d+1)/2 + d entries.
Eigen::VectorXd FlattenStats(const SufficientStatistics& s);
SufficientStatistics UnflattenStats(const Eigen::VectorXd& flat, uint32_t d,
                                    size_t n);

// Closed-form posterior. Perturbed statistics can be indefinite: the
// smallest increment from the ladder {0, 1e-3, 1e-2, ...} * lambda0 that
// makes the factorization succeed is added and recorded.
BlrPosterior Posterior(const SufficientStatistics& s, double lambda0,
                       double lambda);

double Predict(const Eigen::VectorXd& x, const BlrPosterior& posterior);

// Synthetic regression data: x ~ N(0, I_d), beta ~ N(0, lambda0 I),
// y | x ~ N(x^T beta, lambda).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> GenerateAuxiliary(
    size_t n, uint32_t d, double lambda0, double lambda, BitGen& gen);

struct ThresholdGrid {
  // Threshold fractions of the marginal std searched for features (p_x)
  // and target (p_y); 20 points on [0.1, 2.1] by default.
  std::vector<double> fractions;
  int repeats = 10;

  static ThresholdGrid Default();
};

// Grid search over (p_x, p_y) minimizing the median simulated prediction
// error on auxiliary data, simulating the full pipeline (projection,
// sensitivity, noise) at the given budget.
std::pair<double, double> GridSearchThresholds(const Eigen::MatrixXd& aux_x,
                                               const Eigen::VectorXd& aux_y,
                                               const PrivacyBudget& budget,
                                               const ThresholdGrid& grid,
                                               BitGen& gen,
                                               double lambda0 = 1.0,
                                               double lambda = 1.0);

struct DcaOptions {
  uint32_t n_compute = 3;
  uint32_t collusion_tolerance = 0;
  FixedPointParams fp_params;
  std::chrono::milliseconds recv_timeout{1000};
  bool threaded = false;
};

// One secure-sum round over per-client squared values, then
// sqrt(max(dp_sum_j / N, floor^2)) per dimension. Data must already be
// projected to the assumed bounds. The variance floor mirrors the 0.5
// constant used for non-positive estimates.
std::vector<double> EstimateMarginalStd(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        const ProjectionBounds& assumed,
                                        const PrivacyBudget& budget_share,
                                        const DcaOptions& dca, Network& network,
                                        const RngFactory& rng_factory);

struct FitOptions {
  double lambda0 = 1.0;
  double lambda = 1.0;
  bool use_projection = true;
  double budget_split = 0.2;  // share spent on the marginal-std round
  ThresholdGrid grid = ThresholdGrid::Default();
};

// Distributed fit: project to assumed bounds, private std round, threshold
// search on auxiliary data, re-project, secure-sum round over flattened
// sufficient statistics, posterior. With use_projection=false a single
// full-budget round over the assumed bounds is run instead.
BlrPosterior FitDistributed(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const ProjectionBounds& assumed,
                            const PrivacyBudget& budget, const FitOptions& fit,
                            const DcaOptions& dca, Network& network,
                            const RngFactory& rng_factory, BitGen& local_gen);

// Same pipeline with all noise added once centrally at sigma_std.
BlrPosterior FitTrustedAggregator(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const ProjectionBounds& assumed,
                                  const PrivacyBudget& budget,
                                  const FitOptions& fit, BitGen& gen);

// Baseline: calibrated Gaussian noise on every record (per-record
// sensitivity), then a non-private fit.
BlrPosterior FitInputPerturbation(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const ProjectionBounds& assumed,
                                  const PrivacyBudget& budget,
                                  const FitOptions& fit, BitGen& gen);

// Non-private posterior on projected data; reference for the DP fits.
BlrPosterior FitNonPrivate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const ProjectionBounds& assumed,
                           const FitOptions& fit);

// Posterior serialization: JSON object with mean, row-major precision,
// n, budget spent, ridge increment.
std::string PosteriorToJson(const BlrPosterior& posterior, size_t n,
                            const PrivacyBudget& spent);

}  // namespace privagg

#endif  // PRIVAGG_BLR_H_
