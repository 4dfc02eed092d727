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
// Gaussian-mechanism noise calibration for the trusted-aggregator and
// distributed settings.

#ifndef PRIVAGG_DP_H_
#define PRIVAGG_DP_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "privagg/rng.h"

namespace privagg {

struct PrivacyBudget {
  double epsilon = 0;
  double delta = 0;

  // Throws InvalidBudget unless epsilon > 0 and delta in (0, 1).
  void Validate() const;

  // Basic additive composition: each returned budget is share * this,
  // shares must sum to at most 1.
  std::pair<PrivacyBudget, PrivacyBudget> Split(double first_share) const;
};

struct QuerySensitivity {
  double l2 = 0;         // l2-sensitivity of the query over adjacent datasets
  uint32_t dimension = 0;  // output dimension of the query
};

// Per-dimension noise levels for one aggregation round.
struct NoisePlan {
  double sigma_std = 0;     // trusted-aggregator std
  double sigma_client = 0;  // std each client adds in the distributed setting
  uint32_t n_clients = 0;
  uint32_t collusion_tolerance = 0;
};

// Gaussian mechanism std for one query at the given budget. A fixed
// multiplicative margin of 1e-6 on the variance enforces the strict
// inequality of the mechanism's condition.
double GaussianSigma(const QuerySensitivity& sensitivity,
                     const PrivacyBudget& budget);

// Distributed noise scaling: each of N clients adds sigma_client with
// sigma_client^2 = sigma_std^2 / (N - T - 1), valid while at most T
// clients collude or drop out. Throws InsufficientClients when N <= T + 1.
NoisePlan DistributedSigma(double sigma_std, uint32_t n_clients,
                           uint32_t collusion_tolerance);

// Joint l2-sensitivity of the d(d+1)/2 + d unique second-moment and
// cross-moment terms of linear regression, with all feature dimensions
// bounded by c_x and the target by c_y:
//   l2^2 = d(2d-1) c_x^4 + 4 d (c_x c_y)^2.
QuerySensitivity BlrSensitivity(double c_x, double c_y, uint32_t d);

// Same query with per-dimension bounds c_1..c_d on the features and
// c_{d+1} on the target (the unsimplified sum of per-term bounds).
QuerySensitivity BlrSensitivityPerDim(const std::vector<double>& bounds);

// i.i.d. N(0, sigma^2) vector.
std::vector<double> SampleGaussianNoise(double sigma, size_t dimension,
                                        BitGen& gen);

// Chebyshev-type bound on P(||x||_1 >= t) for x ~ N(0, sigma^2 I_d):
//   d sigma^2 (1 - 2/pi) / (t - sqrt(2/pi) d sigma)^2.
// Throws InvalidThreshold when t <= sqrt(2/pi) d sigma.
double L1TailBound(uint32_t d, double sigma, double t);

}  // namespace privagg

#endif  // PRIVAGG_DP_H_
