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

#include "privagg/dp.h"

#include <cmath>
#include <numbers>

#include "privagg/errors.h"

namespace privagg {

namespace {
// Multiplicative variance margin turning the mechanism's strict ">" into a
// checkable ">=".
constexpr double kVarianceMargin = 1e-6;
}  // namespace

void PrivacyBudget::Validate() const {
  if (!(epsilon > 0)) throw InvalidBudget("epsilon must be positive");
  if (!(delta > 0 && delta < 1)) throw InvalidBudget("delta must be in (0,1)");
}

std::pair<PrivacyBudget, PrivacyBudget> PrivacyBudget::Split(
    double first_share) const {
  Validate();
  if (!(first_share > 0 && first_share < 1)) {
    throw InvalidBudget("budget share must be in (0,1)");
  }
  PrivacyBudget a{epsilon * first_share, delta * first_share};
  PrivacyBudget b{epsilon - a.epsilon, delta - a.delta};
  return {a, b};
}

double GaussianSigma(const QuerySensitivity& sensitivity,
                     const PrivacyBudget& budget) {
  budget.Validate();
  if (!(sensitivity.l2 > 0)) {
    throw InvalidBudget("sensitivity must be positive");
  }
  const double ratio = sensitivity.l2 / budget.epsilon;
  const double variance =
      2.0 * std::log(1.25 / budget.delta) * ratio * ratio * (1 + kVarianceMargin);
  return std::sqrt(variance);
}

NoisePlan DistributedSigma(double sigma_std, uint32_t n_clients,
                           uint32_t collusion_tolerance) {
  if (n_clients <= collusion_tolerance + 1) {
    throw InsufficientClients("need N - T - 1 >= 1 clients");
  }
  NoisePlan plan;
  plan.sigma_std = sigma_std;
  plan.n_clients = n_clients;
  plan.collusion_tolerance = collusion_tolerance;
  plan.sigma_client =
      sigma_std / std::sqrt(static_cast<double>(n_clients - collusion_tolerance - 1));
  return plan;
}

QuerySensitivity BlrSensitivity(double c_x, double c_y, uint32_t d) {
  const double cx2 = c_x * c_x;
  const double l2_sq =
      d * (2.0 * d - 1.0) * cx2 * cx2 + 4.0 * d * cx2 * c_y * c_y;
  return {std::sqrt(l2_sq), d * (d + 1) / 2 + d};
}

QuerySensitivity BlrSensitivityPerDim(const std::vector<double>& bounds) {
  if (bounds.size() < 2) throw DimensionMismatch("need d >= 1 plus target bound");
  const uint32_t d = static_cast<uint32_t>(bounds.size()) - 1;
  const double c_y = bounds[d];
  double l2_sq = 0;
  for (uint32_t j = 0; j < d; ++j) {
    const double cj2 = bounds[j] * bounds[j];
    l2_sq += cj2 * cj2;  // |x_j^2 - y_j^2| <= c_j^2
    for (uint32_t k = j + 1; k < d; ++k) {
      const double t = 2.0 * bounds[j] * bounds[k];
      l2_sq += t * t;  // |x_j x_k - y_j y_k| <= 2 c_j c_k
    }
    const double t = 2.0 * bounds[j] * c_y;
    l2_sq += t * t;
  }
  return {std::sqrt(l2_sq), d * (d + 1) / 2 + d};
}

std::vector<double> SampleGaussianNoise(double sigma, size_t dimension,
                                        BitGen& gen) {
  std::vector<double> out(dimension, 0.0);
  if (sigma <= 0) return out;
  BitGenRef ref{&gen};
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out) v = normal(ref);
  return out;
}

double L1TailBound(uint32_t d, double sigma, double t) {
  const double mean_l1 = std::sqrt(2.0 / std::numbers::pi) * d * sigma;
  if (!(t > mean_l1)) {
    throw InvalidThreshold("t must exceed sqrt(2/pi) * d * sigma");
  }
  const double var_l1 = d * sigma * sigma * (1.0 - 2.0 / std::numbers::pi);
  const double a = t - mean_l1;
  return var_l1 / (a * a);
}

}  // namespace privagg
