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

#include "privagg/blr.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "json.hpp"
#include "privagg/errors.h"

namespace privagg {

namespace {

// Variance floor applied to non-positive private estimates (std floor 0.5).
constexpr double kStdFloor = 0.5;

double Median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<double> BoundsVector(const Eigen::VectorXd& thresholds) {
  return {thresholds.data(), thresholds.data() + thresholds.size()};
}

double MeanAbsError(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const BlrPosterior& posterior) {
  return (y - X * posterior.mean).cwiseAbs().mean();
}

}  // namespace

void ProjectionBounds::Validate() const {
  if (thresholds.size() < 2) {
    throw DimensionMismatch("bounds must cover d features plus the target");
  }
  for (Eigen::Index j = 0; j < thresholds.size(); ++j) {
    if (!(thresholds[j] > 0)) {
      throw InvalidThreshold("projection thresholds must be positive");
    }
  }
}

ProjectionBounds ProjectionBounds::Uniform(uint32_t d, double c_x, double c_y) {
  ProjectionBounds b;
  b.thresholds = Eigen::VectorXd::Constant(d + 1, c_x);
  b.thresholds[d] = c_y;
  return b;
}

Eigen::VectorXd Project(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& thresholds) {
  if (x.size() != thresholds.size()) {
    throw DimensionMismatch("thresholds do not match vector dimension");
  }
  return x.cwiseMin(thresholds).cwiseMax(-thresholds);
}

void ProjectDataset(Eigen::MatrixXd& X, Eigen::VectorXd& y,
                    const ProjectionBounds& bounds) {
  bounds.Validate();
  if (bounds.thresholds.size() != X.cols() + 1 || X.rows() != y.size()) {
    throw DimensionMismatch("bounds do not match dataset dimensions");
  }
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double c = bounds.thresholds[j];
    X.col(j) = X.col(j).cwiseMin(c).cwiseMax(-c);
  }
  const double cy = bounds.thresholds[X.cols()];
  y = y.cwiseMin(cy).cwiseMax(-cy);
}

SufficientStatistics SuffStats(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) {
    throw DimensionMismatch("feature and target counts differ");
  }
  SufficientStatistics s;
  s.xx = X.transpose() * X;
  s.xy = X.transpose() * y;
  s.n = static_cast<size_t>(X.rows());
  return s;
}

Eigen::VectorXd FlattenStats(const SufficientStatistics& s) {
  const Eigen::Index d = s.xx.rows();
  Eigen::VectorXd flat(d * (d + 1) / 2 + d);
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j; k < d; ++k) flat[pos++] = s.xx(j, k);
  }
  for (Eigen::Index j = 0; j < d; ++j) flat[pos++] = s.xy[j];
  return flat;
}

SufficientStatistics UnflattenStats(const Eigen::VectorXd& flat, uint32_t d,
                                    size_t n) {
  if (flat.size() != static_cast<Eigen::Index>(d) * (d + 1) / 2 + d) {
    throw DimensionMismatch("flattened statistics have wrong length");
  }
  SufficientStatistics s;
  s.xx.setZero(d, d);
  s.xy.setZero(d);
  s.n = n;
  Eigen::Index pos = 0;
  for (uint32_t j = 0; j < d; ++j) {
    for (uint32_t k = j; k < d; ++k) {
      s.xx(j, k) = flat[pos];
      s.xx(k, j) = flat[pos];
      ++pos;
    }
  }
  for (uint32_t j = 0; j < d; ++j) s.xy[j] = flat[pos++];
  return s;
}

BlrPosterior Posterior(const SufficientStatistics& s, double lambda0,
                       double lambda) {
  if (!(lambda0 > 0) || !(lambda > 0)) {
    throw InvalidConfig("lambda0 and lambda must be positive");
  }
  const Eigen::Index d = s.xx.rows();
  const Eigen::MatrixXd base =
      lambda0 * Eigen::MatrixXd::Identity(d, d) + lambda * s.xx;
  // Ridge ladder for indefinite perturbed statistics.
  for (double factor = 0.0;;
       factor = (factor == 0.0 ? 1e-3 : factor * 10.0)) {
    if (factor > 1e18) break;
    const Eigen::MatrixXd candidate =
        base + factor * lambda0 * Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> llt(candidate);
    if (llt.info() == Eigen::Success) {
      BlrPosterior p;
      p.precision = candidate;
      p.mean = llt.solve(lambda * s.xy);
      p.lambda0 = lambda0;
      p.lambda = lambda;
      p.ridge_added = factor * lambda0;
      return p;
    }
  }
  throw NotPositiveDefinite("could not regularize precision matrix");
}

double Predict(const Eigen::VectorXd& x, const BlrPosterior& posterior) {
  if (x.size() != posterior.mean.size()) {
    throw DimensionMismatch("prediction input has wrong dimension");
  }
  return x.dot(posterior.mean);
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> GenerateAuxiliary(
    size_t n, uint32_t d, double lambda0, double lambda, BitGen& gen) {
  if (n == 0) throw InvalidConfig("need at least one auxiliary sample");
  BitGenRef ref{&gen};
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd beta(d);
  for (uint32_t j = 0; j < d; ++j) beta[j] = unit(ref) * std::sqrt(lambda0);
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n);
  const double noise_std = std::sqrt(lambda);
  for (size_t i = 0; i < n; ++i) {
    for (uint32_t j = 0; j < d; ++j) X(i, j) = unit(ref);
    y[i] = X.row(i).dot(beta) + unit(ref) * noise_std;
  }
  return {std::move(X), std::move(y)};
}

ThresholdGrid ThresholdGrid::Default() {
  ThresholdGrid grid;
  grid.fractions.resize(20);
  for (int i = 0; i < 20; ++i) {
    grid.fractions[i] = 0.1 + (2.1 - 0.1) * i / 19.0;
  }
  grid.repeats = 10;
  return grid;
}

std::pair<double, double> GridSearchThresholds(const Eigen::MatrixXd& aux_x,
                                               const Eigen::VectorXd& aux_y,
                                               const PrivacyBudget& budget,
                                               const ThresholdGrid& grid,
                                               BitGen& gen, double lambda0,
                                               double lambda) {
  if (grid.fractions.empty() || grid.repeats < 1) {
    throw InvalidConfig("threshold grid is empty");
  }
  budget.Validate();
  const Eigen::Index n = aux_x.rows();
  const uint32_t d = static_cast<uint32_t>(aux_x.cols());
  const Eigen::Index n_test = std::max<Eigen::Index>(1, n / 5);
  const Eigen::Index n_train = n - n_test;
  if (n_train < 1) throw InvalidConfig("auxiliary dataset too small");

  const Eigen::MatrixXd train_x = aux_x.topRows(n_train);
  const Eigen::VectorXd train_y = aux_y.head(n_train);
  const Eigen::MatrixXd test_x = aux_x.bottomRows(n_test);
  const Eigen::VectorXd test_y = aux_y.tail(n_test);

  // Marginal stds of the auxiliary data (zero-centred model).
  Eigen::VectorXd stds(d + 1);
  for (uint32_t j = 0; j < d; ++j) {
    stds[j] = std::sqrt(train_x.col(j).squaredNorm() / n_train);
  }
  stds[d] = std::sqrt(train_y.squaredNorm() / n_train);

  double best_err = std::numeric_limits<double>::infinity();
  std::pair<double, double> best{grid.fractions.front(),
                                 grid.fractions.front()};
  for (double p_x : grid.fractions) {
    for (double p_y : grid.fractions) {
      ProjectionBounds bounds;
      bounds.thresholds = stds;
      bounds.thresholds.head(d) *= p_x;
      bounds.thresholds[d] *= p_y;
      Eigen::MatrixXd Xp = train_x;
      Eigen::VectorXd yp = train_y;
      ProjectDataset(Xp, yp, bounds);
      const SufficientStatistics stats = SuffStats(Xp, yp);
      const Eigen::VectorXd flat = FlattenStats(stats);
      const double sigma =
          GaussianSigma(BlrSensitivityPerDim(BoundsVector(bounds.thresholds)),
                        budget);
      std::vector<double> errs;
      errs.reserve(grid.repeats);
      for (int r = 0; r < grid.repeats; ++r) {
        const std::vector<double> noise =
            SampleGaussianNoise(sigma, flat.size(), gen);
        Eigen::VectorXd noisy = flat;
        for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy[i] += noise[i];
        const BlrPosterior posterior =
            Posterior(UnflattenStats(noisy, d, stats.n), lambda0, lambda);
        errs.push_back(MeanAbsError(test_x, test_y, posterior));
      }
      const double median_err = Median(std::move(errs));
      if (median_err < best_err) {
        best_err = median_err;
        best = {p_x, p_y};
      }
    }
  }
  return best;
}

namespace {

ProtocolConfig MakeProtocolConfig(uint32_t n_clients, uint32_t dimension,
                                  double sigma_client, const DcaOptions& dca) {
  ProtocolConfig config;
  config.n_clients = n_clients;
  config.n_compute = dca.n_compute;
  config.collusion_tolerance = dca.collusion_tolerance;
  config.dimension = dimension;
  config.fp_params = dca.fp_params;
  config.sigma_client = sigma_client;
  config.recv_timeout = dca.recv_timeout;
  return config;
}

// Secure-sum of per-client vectors produced by `payload(i)`.
RoundResult SecureSum(size_t n_clients, uint32_t dimension, double sigma_client,
                      const DcaOptions& dca, Network& network,
                      const RngFactory& rng_factory, uint64_t round_id,
                      const std::function<std::vector<double>(size_t)>& payload) {
  std::vector<std::vector<double>> inputs;
  inputs.reserve(n_clients);
  for (size_t i = 0; i < n_clients; ++i) inputs.push_back(payload(i));
  const ProtocolConfig config = MakeProtocolConfig(
      static_cast<uint32_t>(n_clients), dimension, sigma_client, dca);
  return RunRound(inputs, config, network, rng_factory, round_id,
                  dca.threaded);
}

// Central (trusted aggregator) noisy sufficient statistics at sigma_std.
SufficientStatistics NoisySuffStatsCentral(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& thresholds,
                                           const PrivacyBudget& budget,
                                           BitGen& gen) {
  const SufficientStatistics stats = SuffStats(X, y);
  const double sigma = GaussianSigma(
      BlrSensitivityPerDim(BoundsVector(thresholds)), budget);
  Eigen::VectorXd flat = FlattenStats(stats);
  const std::vector<double> noise =
      SampleGaussianNoise(sigma, flat.size(), gen);
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] += noise[i];
  return UnflattenStats(flat, static_cast<uint32_t>(X.cols()), stats.n);
}

// Distributed noisy sufficient statistics through the secure-sum protocol.
SufficientStatistics NoisySuffStatsDistributed(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const Eigen::VectorXd& thresholds, const PrivacyBudget& budget,
    const DcaOptions& dca, Network& network, const RngFactory& rng_factory,
    uint64_t round_id) {
  const uint32_t d = static_cast<uint32_t>(X.cols());
  const uint32_t flat_dim = d * (d + 1) / 2 + d;
  const double sigma_std = GaussianSigma(
      BlrSensitivityPerDim(BoundsVector(thresholds)), budget);
  const NoisePlan plan =
      DistributedSigma(sigma_std, static_cast<uint32_t>(X.rows()),
                       dca.collusion_tolerance);
  const RoundResult result = SecureSum(
      static_cast<size_t>(X.rows()), flat_dim, plan.sigma_client, dca, network,
      rng_factory, round_id, [&](size_t i) {
        SufficientStatistics one;
        one.xx = X.row(i).transpose() * X.row(i);
        one.xy = X.row(i).transpose() * y[i];
        one.n = 1;
        const Eigen::VectorXd flat = FlattenStats(one);
        return std::vector<double>(flat.data(), flat.data() + flat.size());
      });
  Eigen::VectorXd flat(flat_dim);
  for (uint32_t i = 0; i < flat_dim; ++i) flat[i] = result.dp_sum[i];
  return UnflattenStats(flat, d, result.participating_clients.size());
}

Eigen::VectorXd EstimatedThresholds(const std::vector<double>& stds,
                                    const ProjectionBounds& assumed,
                                    double p_x, double p_y) {
  const Eigen::Index dim = assumed.thresholds.size();
  // One common threshold for all feature dimensions (pooled std) and a
  // separate one for the target; pooling averages the estimation noise
  // over d dimensions so no single bad estimate crushes one coordinate.
  double pooled = 0;
  for (Eigen::Index j = 0; j + 1 < dim; ++j) {
    const double s = stds[static_cast<size_t>(j)];
    pooled += s * s;
  }
  pooled = std::sqrt(pooled / static_cast<double>(dim - 1));
  Eigen::VectorXd out(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const bool target = j + 1 == dim;
    const double c =
        target ? p_y * stds[static_cast<size_t>(j)] : p_x * pooled;
    // Projection never widens the assumed range.
    out[j] = std::min(c, assumed.thresholds[j]);
  }
  return out;
}

}  // namespace

std::vector<double> EstimateMarginalStd(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        const ProjectionBounds& assumed,
                                        const PrivacyBudget& budget_share,
                                        const DcaOptions& dca, Network& network,
                                        const RngFactory& rng_factory) {
  assumed.Validate();
  const uint32_t dim = static_cast<uint32_t>(assumed.thresholds.size());
  // Sum-of-squares query: one record moves dimension j by at most c_j^2.
  double sens_sq = 0;
  for (Eigen::Index j = 0; j < assumed.thresholds.size(); ++j) {
    const double cj2 = assumed.thresholds[j] * assumed.thresholds[j];
    sens_sq += cj2 * cj2;
  }
  const double sigma_std = GaussianSigma(
      {std::sqrt(sens_sq), dim}, budget_share);
  const NoisePlan plan =
      DistributedSigma(sigma_std, static_cast<uint32_t>(X.rows()),
                       dca.collusion_tolerance);
  const RoundResult result = SecureSum(
      static_cast<size_t>(X.rows()), dim, plan.sigma_client, dca, network,
      rng_factory, /*round_id=*/1, [&](size_t i) {
        std::vector<double> z(dim);
        for (uint32_t j = 0; j + 1 < dim; ++j) z[j] = X(i, j) * X(i, j);
        z[dim - 1] = y[i] * y[i];
        return z;
      });
  const double n = static_cast<double>(result.participating_clients.size());
  std::vector<double> stds(dim);
  for (uint32_t j = 0; j < dim; ++j) {
    stds[j] = std::sqrt(std::max(result.dp_sum[j] / n, kStdFloor * kStdFloor));
  }
  return stds;
}

BlrPosterior FitDistributed(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const ProjectionBounds& assumed,
                            const PrivacyBudget& budget, const FitOptions& fit,
                            const DcaOptions& dca, Network& network,
                            const RngFactory& rng_factory, BitGen& local_gen) {
  budget.Validate();
  assumed.Validate();
  Eigen::MatrixXd Xp = X;
  Eigen::VectorXd yp = y;
  ProjectDataset(Xp, yp, assumed);
  const uint32_t d = static_cast<uint32_t>(X.cols());

  if (!fit.use_projection) {
    const SufficientStatistics stats = NoisySuffStatsDistributed(
        Xp, yp, assumed.thresholds, budget, dca, network, rng_factory,
        /*round_id=*/2);
    return Posterior(stats, fit.lambda0, fit.lambda);
  }

  // Auxiliary data drawn first so paired-seed runs across settings share it.
  const auto [aux_x, aux_y] = GenerateAuxiliary(
      static_cast<size_t>(X.rows()), d, fit.lambda0, fit.lambda, local_gen);
  const auto [std_budget, main_budget] = budget.Split(fit.budget_split);
  const std::vector<double> stds = EstimateMarginalStd(
      Xp, yp, assumed, std_budget, dca, network, rng_factory);
  const auto [p_x, p_y] = GridSearchThresholds(
      aux_x, aux_y, main_budget, fit.grid, local_gen, fit.lambda0, fit.lambda);
  ProjectionBounds estimated;
  estimated.thresholds = EstimatedThresholds(stds, assumed, p_x, p_y);
  estimated.provenance = ProjectionBounds::Provenance::kEstimated;
  ProjectDataset(Xp, yp, estimated);
  const SufficientStatistics stats = NoisySuffStatsDistributed(
      Xp, yp, estimated.thresholds, main_budget, dca, network, rng_factory,
      /*round_id=*/2);
  return Posterior(stats, fit.lambda0, fit.lambda);
}

BlrPosterior FitTrustedAggregator(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const ProjectionBounds& assumed,
                                  const PrivacyBudget& budget,
                                  const FitOptions& fit, BitGen& gen) {
  budget.Validate();
  assumed.Validate();
  Eigen::MatrixXd Xp = X;
  Eigen::VectorXd yp = y;
  ProjectDataset(Xp, yp, assumed);
  const uint32_t d = static_cast<uint32_t>(X.cols());

  if (!fit.use_projection) {
    return Posterior(
        NoisySuffStatsCentral(Xp, yp, assumed.thresholds, budget, gen),
        fit.lambda0, fit.lambda);
  }

  const auto [aux_x, aux_y] = GenerateAuxiliary(
      static_cast<size_t>(X.rows()), d, fit.lambda0, fit.lambda, gen);
  const auto [std_budget, main_budget] = budget.Split(fit.budget_split);
  // Central marginal-std round.
  double sens_sq = 0;
  for (Eigen::Index j = 0; j < assumed.thresholds.size(); ++j) {
    const double cj2 = assumed.thresholds[j] * assumed.thresholds[j];
    sens_sq += cj2 * cj2;
  }
  const uint32_t dim = d + 1;
  const double sigma_std =
      GaussianSigma({std::sqrt(sens_sq), dim}, std_budget);
  const std::vector<double> noise = SampleGaussianNoise(sigma_std, dim, gen);
  std::vector<double> stds(dim);
  const double n = static_cast<double>(X.rows());
  for (uint32_t j = 0; j < d; ++j) {
    stds[j] = std::sqrt(std::max(
        (Xp.col(j).squaredNorm() + noise[j]) / n, kStdFloor * kStdFloor));
  }
  stds[d] = std::sqrt(
      std::max((yp.squaredNorm() + noise[d]) / n, kStdFloor * kStdFloor));

  const auto [p_x, p_y] = GridSearchThresholds(
      aux_x, aux_y, main_budget, fit.grid, gen, fit.lambda0, fit.lambda);
  ProjectionBounds estimated;
  estimated.thresholds = EstimatedThresholds(stds, assumed, p_x, p_y);
  estimated.provenance = ProjectionBounds::Provenance::kEstimated;
  ProjectDataset(Xp, yp, estimated);
  return Posterior(
      NoisySuffStatsCentral(Xp, yp, estimated.thresholds, main_budget, gen),
      fit.lambda0, fit.lambda);
}

BlrPosterior FitInputPerturbation(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const ProjectionBounds& assumed,
                                  const PrivacyBudget& budget,
                                  const FitOptions& fit, BitGen& gen) {
  budget.Validate();
  assumed.Validate();
  Eigen::MatrixXd Xp = X;
  Eigen::VectorXd yp = y;
  ProjectDataset(Xp, yp, assumed);
  // Replacing one record moves the released table by at most the box
  // diameter in l2.
  const double sigma = GaussianSigma(
      {2.0 * assumed.thresholds.norm(),
       static_cast<uint32_t>(assumed.thresholds.size())},
      budget);
  BitGenRef ref{&gen};
  std::normal_distribution<double> normal(0.0, sigma);
  if (sigma > 0) {
    for (Eigen::Index i = 0; i < Xp.rows(); ++i) {
      for (Eigen::Index j = 0; j < Xp.cols(); ++j) Xp(i, j) += normal(ref);
      yp[i] += normal(ref);
    }
  }
  return Posterior(SuffStats(Xp, yp), fit.lambda0, fit.lambda);
}

BlrPosterior FitNonPrivate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const ProjectionBounds& assumed,
                           const FitOptions& fit) {
  assumed.Validate();
  Eigen::MatrixXd Xp = X;
  Eigen::VectorXd yp = y;
  ProjectDataset(Xp, yp, assumed);
  return Posterior(SuffStats(Xp, yp), fit.lambda0, fit.lambda);
}

std::string PosteriorToJson(const BlrPosterior& posterior, size_t n,
                            const PrivacyBudget& spent) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(
      posterior.mean.data(), posterior.mean.data() + posterior.mean.size());
  std::vector<double> precision;
  precision.reserve(
      static_cast<size_t>(posterior.precision.rows() * posterior.precision.cols()));
  for (Eigen::Index r = 0; r < posterior.precision.rows(); ++r) {
    for (Eigen::Index c = 0; c < posterior.precision.cols(); ++c) {
      precision.push_back(posterior.precision(r, c));
    }
  }
  j["precision"] = precision;
  j["n"] = n;
  j["epsilon_spent"] = spent.epsilon;
  j["delta_spent"] = spent.delta;
  j["ridge_added"] = posterior.ridge_added;
  j["lambda0"] = posterior.lambda0;
  j["lambda"] = posterior.lambda;
  return j.dump(2);
}

}  // namespace privagg
