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
#include <vector>

#include "doctest.h"
#include "privagg/errors.h"
#include "privagg/rng.h"

namespace privagg {
namespace {

constexpr double kMargin = 1e-6;

// Independent oracle for the regression sufficient-statistics sensitivity:
// each output coordinate (an entry of xx or xy) is bounded independently,
// so the worst case maximizes every |f(u) - f(v)| coordinate separately
// over grid points with components in {-c_j, 0, c_j}.
double SensitivityOracle(const std::vector<double>& bounds) {
  const size_t d = bounds.size() - 1;
  const double cy = bounds[d];
  // Enumerate value choices per coordinate pair; each output term depends
  // on at most two input coordinates, so per-coordinate maximization over
  // the 3-point grids is exhaustive.
  const auto max_diff = [](double ca, double cb, bool same) {
    // max over a,a',b,b' in {-ca,0,ca} x {-cb,0,cb} of |a*b - a'*b'|,
    // where for the diagonal (same=true) the term is a^2.
    if (same) return ca * ca;        // max x^2 - min x^2 = ca^2 - 0
    return 2.0 * ca * cb;            // ca*cb - (-ca*cb)
  };
  double total = 0;
  for (size_t j = 0; j < d; ++j) {
    for (size_t k = j; k < d; ++k) {
      const double m = max_diff(bounds[j], bounds[k], j == k);
      total += m * m;
    }
  }
  for (size_t j = 0; j < d; ++j) {
    const double m = max_diff(bounds[j], cy, false);
    total += m * m;
  }
  return std::sqrt(total);
}

TEST_CASE("gaussian sigma matches the closed form with its margin") {
  const double sigma = GaussianSigma({1.0, 1}, {1.0, 1e-5});
  const double oracle_var = 2.0 * std::log(1.25 / 1e-5) * (1.0 + kMargin);
  CHECK(sigma * sigma == doctest::Approx(oracle_var).epsilon(1e-12));
  CHECK(sigma * sigma == doctest::Approx(23.47216108).epsilon(1e-6));
}

TEST_CASE("gaussian sigma scales linearly in sensitivity and 1/epsilon") {
  const double base = GaussianSigma({1.0, 1}, {1.0, 1e-5});
  CHECK(GaussianSigma({2.0, 1}, {1.0, 1e-5}) ==
        doctest::Approx(2.0 * base).epsilon(1e-12));
  CHECK(GaussianSigma({1.0, 1}, {2.0, 1e-5}) ==
        doctest::Approx(0.5 * base).epsilon(1e-12));
}

TEST_CASE("gaussian sigma is monotone in budget and sensitivity") {
  const double base = GaussianSigma({1.0, 1}, {1.0, 1e-5});
  CHECK(GaussianSigma({1.0, 1}, {1.5, 1e-5}) < base);
  CHECK(GaussianSigma({1.0, 1}, {1.0, 1e-4}) < base);
  CHECK(GaussianSigma({1.5, 1}, {1.0, 1e-5}) > base);
}

TEST_CASE("budget validation and split") {
  CHECK_THROWS_AS(GaussianSigma({1.0, 1}, {0.0, 1e-5}), InvalidBudget);
  CHECK_THROWS_AS(GaussianSigma({1.0, 1}, {1.0, 0.0}), InvalidBudget);
  CHECK_THROWS_AS(GaussianSigma({1.0, 1}, {1.0, 1.0}), InvalidBudget);

  const PrivacyBudget b{1.0, 1e-5};
  const auto [first, second] = b.Split(0.25);
  CHECK(first.epsilon + second.epsilon == doctest::Approx(b.epsilon));
  CHECK(first.delta + second.delta == doctest::Approx(b.delta));
  CHECK(first.epsilon == doctest::Approx(0.25));
}

TEST_CASE("distributed sigma satisfies the scaling identity") {
  CHECK(DistributedSigma(1.0, 2, 0).sigma_client == doctest::Approx(1.0));
  const NoisePlan plan = DistributedSigma(1.0, 101, 0);
  CHECK(plan.sigma_client * plan.sigma_client == doctest::Approx(0.01));
  // Total added variance N * sigma_client^2 = N/(N-T-1) * sigma_std^2.
  CHECK(101 * plan.sigma_client * plan.sigma_client ==
        doctest::Approx(101.0 / 100.0));
  CHECK_THROWS_AS(DistributedSigma(1.0, 5, 4), InsufficientClients);

  for (uint32_t n : {3u, 10u, 50u}) {
    for (uint32_t t : {0u, 1u}) {
      const NoisePlan p = DistributedSigma(2.5, n, t);
      CHECK((n - t - 1) * p.sigma_client * p.sigma_client >=
            p.sigma_std * p.sigma_std * (1 - 1e-12));
    }
  }
}

TEST_CASE("regression sensitivity matches the per-coordinate oracle") {
  for (uint32_t d : {1u, 2u, 3u}) {
    for (double cx : {0.5, 1.0, 2.0}) {
      for (double cy : {0.5, 1.0, 2.0}) {
        const QuerySensitivity s = BlrSensitivity(cx, cy, d);
        std::vector<double> bounds(d, cx);
        bounds.push_back(cy);
        CHECK(s.l2 ==
              doctest::Approx(SensitivityOracle(bounds)).epsilon(1e-12));
        CHECK(s.dimension == d * (d + 1) / 2 + d);
      }
    }
  }
  CHECK(BlrSensitivity(1, 1, 1).l2 == doctest::Approx(std::sqrt(5.0)));
  CHECK(BlrSensitivity(1, 1, 2).l2 == doctest::Approx(std::sqrt(14.0)));
  CHECK(BlrSensitivity(1e-9, 1.0, 3).l2 < 1e-8);
}

TEST_CASE("per-dimension sensitivity generalizes the uniform formula") {
  CHECK(BlrSensitivityPerDim({1, 1, 1}).l2 ==
        doctest::Approx(BlrSensitivity(1, 1, 2).l2).epsilon(1e-12));
  const std::vector<double> bounds{0.5, 1.5, 2.0, 0.75};
  CHECK(BlrSensitivityPerDim(bounds).l2 ==
        doctest::Approx(SensitivityOracle(bounds)).epsilon(1e-12));
  // Componentwise tighter bounds never increase the sensitivity.
  CHECK(BlrSensitivityPerDim({0.4, 1.0, 1.9, 0.75}).l2 <=
        BlrSensitivityPerDim(bounds).l2);
}

TEST_CASE("gaussian noise sampling moments") {
  SeededBitGen gen(31);
  CHECK(SampleGaussianNoise(0.0, 4, gen) ==
        std::vector<double>{0, 0, 0, 0});

  constexpr size_t kN = 1000000;
  const std::vector<double> draws = SampleGaussianNoise(1.0, kN, gen);
  double sum = 0, sum_sq = 0;
  for (double v : draws) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / kN;
  const double var = sum_sq / kN - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(kN)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("l1 tail bound closed form and edge cases") {
  const double s = std::sqrt(2.0 / std::numbers::pi);
  const double oracle = (1.0 - 2.0 / std::numbers::pi) / ((10.0 - s) * (10.0 - s));
  CHECK(L1TailBound(1, 1.0, 10.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(L1TailBound(1, 1.0, 10.0) ==
        doctest::Approx(0.004291270967024293).epsilon(1e-12));
  CHECK_THROWS_AS(L1TailBound(1, 1.0, s), InvalidThreshold);
  CHECK_THROWS_AS(L1TailBound(4, 2.0, 1.0), InvalidThreshold);
  CHECK(L1TailBound(1, 1.0, 1e9) < 1e-15);
  CHECK(L1TailBound(1, 1.0, 20.0) < L1TailBound(1, 1.0, 10.0));
}

TEST_CASE("l1 tail bound dominates an empirical tail") {
  SeededBitGen gen(37);
  const uint32_t d = 3;
  const double sigma = 1.0, t = 6.0;
  constexpr int kDraws = 20000;
  int exceed = 0;
  for (int r = 0; r < kDraws; ++r) {
    const auto x = SampleGaussianNoise(sigma, d, gen);
    double l1 = 0;
    for (double v : x) l1 += std::abs(v);
    if (l1 >= t) ++exceed;
  }
  const double freq = double(exceed) / kDraws;
  const double mc_std = std::sqrt(freq * (1 - freq) / kDraws + 1e-12);
  CHECK(L1TailBound(d, sigma, t) >= freq - 3 * mc_std);
}

}  // namespace
}  // namespace privagg
