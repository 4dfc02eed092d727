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
// End-to-end acceptance suite. Each check prints one PASS/FAIL line; the
// process exits non-zero if any check fails. Statistical checks use fixed
// seeds and tolerances sized to their Monte-Carlo error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "privagg/blr.h"
#include "privagg/dataset.h"
#include "privagg/dp.h"
#include "privagg/errors.h"
#include "privagg/fixed_point.h"
#include "privagg/harness.h"
#include "privagg/protocol.h"
#include "privagg/rng.h"
#include "privagg/transport.h"

namespace privagg {
namespace {

struct Reporter {
  int failures = 0;
  int index = 0;

  void Run(const std::string& name, const std::function<bool()>& check) {
    ++index;
    bool ok = false;
    std::string note;
    try {
      ok = check();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    std::printf("criterion %2d %-28s %s%s\n", index, name.c_str(),
                ok ? "PASS" : "FAIL", note.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Least-squares slope of y on x.
double Slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --- 1. Share-cancellation exactness ---------------------------------------

bool ShareCancellation() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<uint32_t> nd(2, 200), md(2, 10), dd(1, 100);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int rep = 0; rep < 1000; ++rep) {
    ProtocolConfig config;
    config.n_clients = nd(rng);
    config.n_compute = md(rng);
    config.dimension = dd(rng);
    config.sigma_client = 0.0;
    std::vector<std::vector<double>> inputs(config.n_clients);
    auto oracle = FixedPointVector::Zero(config.dimension, config.fp_params);
    for (auto& z : inputs) {
      z.resize(config.dimension);
      for (double& v : z) v = u(rng);
      oracle = oracle.Add(FixedPointVector::Encode(z, config.fp_params));
    }
    InProcNetwork network;
    const RoundResult result =
        RunRound(inputs, config, network, SeededRngFactory(2000 + rep));
    if (result.dp_sum != oracle.Decode()) return false;
    if (result.participating_clients.size() != config.n_clients) return false;
  }
  return true;
}

// --- 2. Distributed noise calibration ---------------------------------------

bool NoiseCalibration() {
  const NoisePlan plan = DistributedSigma(1.0, 50, 5);
  ProtocolConfig config;
  config.n_clients = 50;
  config.n_compute = 2;
  config.collusion_tolerance = 5;
  config.dimension = 1;
  config.sigma_client = plan.sigma_client;
  const std::vector<std::vector<double>> inputs(50, {0.0});

  constexpr int kRounds = 20000;
  double sum = 0, sum_sq = 0, res_sum = 0, res_sq = 0;
  for (int r = 0; r < kRounds; ++r) {
    const uint64_t seed = 3000 + r;
    InProcNetwork network;
    const RoundResult result =
        RunRound(inputs, config, network, SeededRngFactory(seed), r);
    const double total = result.dp_sum[0];
    sum += total;
    sum_sq += total * total;
    // Simulated colluders: clients 0..4 replay their own noise and
    // subtract it from the published sum.
    double residual = total;
    for (uint32_t i = 0; i < 5; ++i) {
      auto gen = SeededRngFactory(seed)(config.ClientId(i));
      const auto [msgs, eta] = ClientPrepareWithNoise(
          std::vector<double>{0.0}, config, r, i, *gen);
      residual -= eta[0];
    }
    res_sum += residual;
    res_sq += residual * residual;
  }
  const double mean = sum / kRounds;
  const double var = sum_sq / kRounds - mean * mean;
  const double res_mean = res_sum / kRounds;
  const double res_var = res_sq / kRounds - res_mean * res_mean;

  const double expected = 50.0 / 44.0;
  if (std::abs(var - expected) > 0.05 * expected) return false;
  // After removing 5 colluders' noise the residual variance is 45/44,
  // still at least sigma_std^2 = 1 up to Monte-Carlo error.
  const double mc_std = res_var * std::sqrt(2.0 / kRounds);
  return res_var >= 1.0 - 3 * mc_std;
}

// --- 3. Scaling-factor curve -------------------------------------------------

bool ScalingCurve() {
  // Analytic shape: decreasing in N, increasing in T, limit 1.
  double prev = 1e100;
  for (uint32_t n : {5u, 10u, 100u, 1000u, 100000u}) {
    const double f = RunScalingFactor({n}, {0}, 0, 1)[0].factor;
    if (f >= prev) return false;
    prev = f;
  }
  if (std::abs(prev - 1.0) > 1e-4) return false;
  const auto by_t = RunScalingFactor({100}, {0, 5, 20}, 0, 1);
  if (!(by_t[0].factor < by_t[1].factor && by_t[1].factor < by_t[2].factor)) {
    return false;
  }
  // Monte-Carlo spot cells (first, middle, last) within 5%.
  const auto rows = RunScalingFactor({20, 100, 400}, {0, 10}, 12000, 4242);
  int measured = 0;
  for (const auto& row : rows) {
    if (!row.measured) continue;
    ++measured;
    if (std::abs(*row.measured - row.factor) > 0.05 * row.factor) return false;
  }
  return measured == 3;
}

// --- 4. Sensitivity corner oracle -------------------------------------------

// Exhaustive corner search: every output coordinate of the sufficient-
// statistics map is maximized independently over pairs of points with
// components in {-c_j, 0, c_j}.
double CornerSearch(uint32_t d, double cx, double cy) {
  std::vector<double> bounds(d, cx);
  bounds.push_back(cy);
  std::vector<std::vector<double>> points;
  std::vector<double> point(d + 1, 0.0);
  const std::function<void(size_t)> enumerate = [&](size_t j) {
    if (j == d + 1) {
      points.push_back(point);
      return;
    }
    for (double v : {-bounds[j], 0.0, bounds[j]}) {
      point[j] = v;
      enumerate(j + 1);
    }
  };
  enumerate(0);

  const auto stats = [&](const std::vector<double>& p) {
    std::vector<double> out;
    for (uint32_t j = 0; j < d; ++j) {
      for (uint32_t k = j; k < d; ++k) out.push_back(p[j] * p[k]);
    }
    for (uint32_t j = 0; j < d; ++j) out.push_back(p[j] * p[d]);
    return out;
  };

  std::vector<double> max_diff(d * (d + 1) / 2 + d, 0.0);
  for (const auto& u : points) {
    const auto fu = stats(u);
    for (const auto& v : points) {
      const auto fv = stats(v);
      for (size_t i = 0; i < fu.size(); ++i) {
        max_diff[i] = std::max(max_diff[i], std::abs(fu[i] - fv[i]));
      }
    }
  }
  double total = 0;
  for (double m : max_diff) total += m * m;
  return std::sqrt(total);
}

bool SensitivityOracle() {
  for (uint32_t d : {1u, 2u, 3u}) {
    for (double cx : {0.5, 1.0, 2.0}) {
      for (double cy : {0.5, 1.0, 2.0}) {
        const double lib = BlrSensitivity(cx, cy, d).l2;
        const double oracle = CornerSearch(d, cx, cy);
        if (std::abs(lib - oracle) > 1e-12 * oracle) return false;
      }
    }
  }
  return true;
}

// --- 5. Posterior vs independent ridge solver --------------------------------

Eigen::VectorXd RidgeOracle(const SufficientStatistics& s, double l0,
                            double l) {
  const int d = static_cast<int>(s.xx.rows());
  std::vector<std::vector<long double>> a(d,
                                          std::vector<long double>(d + 1));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      a[i][j] = static_cast<long double>(l) * s.xx(i, j) +
                (i == j ? static_cast<long double>(l0) : 0.0L);
    }
    a[i][d] = static_cast<long double>(l) * s.xy[i];
  }
  for (int col = 0; col < d; ++col) {
    int pivot = col;
    for (int r = col + 1; r < d; ++r) {
      if (std::abs(static_cast<double>(a[r][col])) >
          std::abs(static_cast<double>(a[pivot][col]))) {
        pivot = r;
      }
    }
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (int j = col; j <= d; ++j) a[r][j] -= f * a[col][j];
    }
  }
  Eigen::VectorXd m(d);
  for (int i = 0; i < d; ++i) m[i] = static_cast<double>(a[i][d] / a[i][i]);
  return m;
}

bool PosteriorOracle() {
  std::mt19937_64 rng(5005);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> nd(5, 1000), dd(1, 20);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = nd(rng), d = dd(rng);
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = n01(rng);
      y[i] = n01(rng);
    }
    const SufficientStatistics s = SuffStats(X, y);
    const BlrPosterior p = Posterior(s, 1.0, 1.0);
    const Eigen::VectorXd oracle = RidgeOracle(s, 1.0, 1.0);
    if ((p.mean - oracle).norm() > 1e-10 * (oracle.norm() + 1e-300)) {
      return false;
    }
  }
  return true;
}

// --- 6. Asymptotic efficiency ------------------------------------------------

bool AsymptoticEfficiency() {
  // Both fits see the same projected data, so the gap isolates the DP
  // noise. Bounds and n range keep every cell in the linear-perturbation
  // regime where the 1/n decay is visible.
  const std::vector<size_t> sizes{3000, 10000, 30000, 100000};
  const uint32_t d = 5;
  const PrivacyBudget budget{2.0, 1e-5};
  const ProjectionBounds bounds = ProjectionBounds::Uniform(d, 3.0, 10.0);
  FitOptions fit;
  fit.use_projection = false;

  std::vector<double> log_n, log_err;
  for (size_t n : sizes) {
    std::vector<double> gaps;
    for (int seed = 0; seed < 20; ++seed) {
      SeededBitGen data_gen(DeriveSeed(6006, std::to_string(n) + "|" +
                                                 std::to_string(seed)));
      const auto [X, y] = GenerateAuxiliary(n, d, 1.0, 1.0, data_gen);
      const BlrPosterior np = FitNonPrivate(X, y, bounds, fit);
      SeededBitGen noise_gen(DeriveSeed(6007, std::to_string(n) + "|" +
                                                  std::to_string(seed)));
      const BlrPosterior dp =
          FitTrustedAggregator(X, y, bounds, budget, fit, noise_gen);
      gaps.push_back((dp.mean - np.mean).cwiseAbs().sum());
    }
    log_n.push_back(std::log(static_cast<double>(n)));
    log_err.push_back(std::log(Median(gaps)));
  }
  const double slope = Slope(log_n, log_err);
  return slope > -1.3 && slope < -0.7;
}

// --- 7. L1 tail bound dominance ----------------------------------------------

bool TailBoundDominance() {
  SeededBitGen gen(7007);
  constexpr int kDraws = 100000;
  for (uint32_t d : {1u, 3u, 10u}) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      const double t = std::sqrt(2.0 / std::numbers::pi) * d * sigma +
                       3.0 * sigma * std::sqrt(static_cast<double>(d));
      int exceed = 0;
      for (int r = 0; r < kDraws; ++r) {
        const auto x = SampleGaussianNoise(sigma, d, gen);
        double l1 = 0;
        for (double v : x) l1 += std::abs(v);
        if (l1 >= t) ++exceed;
      }
      const double freq = static_cast<double>(exceed) / kDraws;
      const double mc = std::sqrt(freq * (1 - freq) / kDraws + 1e-12);
      if (L1TailBound(d, sigma, t) < freq - 3 * mc) return false;
    }
  }
  return true;
}

// --- 8. Method ordering ------------------------------------------------------

bool MethodOrdering() {
  ExperimentSpec spec;
  spec.methods = {Method::kInputPerturbation, Method::kTrustedAggregator,
                  Method::kDistributed, Method::kDistributedProjected};
  spec.synthetic.n = 5000;
  spec.synthetic.d = 10;
  spec.eps_grid = {0.5};
  spec.cv_runs = 25;
  spec.seed = 4;
  const ResultTable table = RunComparison(spec);
  double ip = 0, ta = 0, ddp = 0, ddp_proj = 0;
  for (const ResultRow& row : table.rows) {
    switch (row.method) {
      case Method::kInputPerturbation: ip = row.median_mae; break;
      case Method::kTrustedAggregator: ta = row.median_mae; break;
      case Method::kDistributed: ddp = row.median_mae; break;
      case Method::kDistributedProjected: ddp_proj = row.median_mae; break;
      default: break;
    }
  }
  std::printf("    [ordering] IP=%.4f TA=%.4f DDP=%.4f DDP_proj=%.4f\n", ip,
              ta, ddp, ddp_proj);
  return ip >= ddp && ddp >= ddp_proj && std::abs(ddp - ta) / ta < 0.05;
}

// --- 9. Fault tolerance ------------------------------------------------------

bool FaultTolerance() {
  // (a) Two scripted dropouts with T=2: round completes over survivors.
  {
    ProtocolConfig config;
    config.n_clients = 10;
    config.n_compute = 3;
    config.collusion_tolerance = 2;
    config.dimension = 1;
    FaultScript script{{4, 0, FaultAction::kDropBeforeSend, 0},
                       {7, 0, FaultAction::kDropBeforeSend, 0}};
    InProcNetwork network(std::move(script));
    std::vector<std::vector<double>> inputs;
    double expected = 0;
    for (int i = 0; i < 10; ++i) {
      inputs.push_back({static_cast<double>(i)});
      if (i != 4 && i != 7) expected += i;
    }
    const RoundResult result =
        RunRound(inputs, config, network, SeededRngFactory(9009));
    if (std::abs(result.dp_sum[0] - expected) > 1e-9) return false;
    if (result.dropped_clients != std::set<uint32_t>{4, 7}) return false;
  }
  // (b) Partial-send crash counts as a dropout too.
  {
    ProtocolConfig config;
    config.n_clients = 5;
    config.n_compute = 3;
    config.collusion_tolerance = 1;
    config.dimension = 1;
    FaultScript script{{2, 0, FaultAction::kCrashAfterPartialSend, 0}};
    InProcNetwork network(std::move(script));
    const std::vector<std::vector<double>> inputs{{1}, {2}, {4}, {8}, {16}};
    const RoundResult result =
        RunRound(inputs, config, network, SeededRngFactory(9010));
    if (std::abs(result.dp_sum[0] - 27.0) > 1e-9) return false;
    if (result.dropped_clients != std::set<uint32_t>{2}) return false;
  }
  // (c) Surviving noise still satisfies the calibration inequality:
  // 8 survivors at sigma_client^2 = 1/7 give variance 8/7 >= 1.
  {
    const NoisePlan plan = DistributedSigma(1.0, 10, 2);
    ProtocolConfig config;
    config.n_clients = 10;
    config.n_compute = 2;
    config.collusion_tolerance = 2;
    config.dimension = 1;
    config.sigma_client = plan.sigma_client;
    // In-process delivery is synchronous, so a short dropout-detection
    // timeout keeps the Monte-Carlo loop fast without losing frames.
    config.recv_timeout = std::chrono::milliseconds(2);
    const std::vector<std::vector<double>> inputs(10, {0.0});
    constexpr int kRounds = 4000;
    double sum = 0, sum_sq = 0;
    for (int r = 0; r < kRounds; ++r) {
      FaultScript script{{3, 0, FaultAction::kDropBeforeSend, 0},
                         {6, 0, FaultAction::kDropBeforeSend, 0}};
      InProcNetwork network(std::move(script));
      const RoundResult result =
          RunRound(inputs, config, network, SeededRngFactory(10000 + r));
      sum += result.dp_sum[0];
      sum_sq += result.dp_sum[0] * result.dp_sum[0];
    }
    const double mean = sum / kRounds;
    const double var = sum_sq / kRounds - mean * mean;
    const double expected = 8.0 / 7.0;
    if (std::abs(var - expected) > 0.10 * expected) return false;
    if (var < 1.0 - 3 * var * std::sqrt(2.0 / kRounds)) return false;
  }
  // (d) One dropout beyond tolerance aborts.
  {
    ProtocolConfig config;
    config.n_clients = 8;
    config.n_compute = 2;
    config.collusion_tolerance = 2;
    config.dimension = 1;
    FaultScript script{{1, 0, FaultAction::kDropBeforeSend, 0},
                       {3, 0, FaultAction::kDropBeforeSend, 0},
                       {5, 0, FaultAction::kDropBeforeSend, 0}};
    InProcNetwork network(std::move(script));
    const std::vector<std::vector<double>> inputs(8, {1.0});
    try {
      RunRound(inputs, config, network, SeededRngFactory(9011));
      return false;
    } catch (const TooManyDropouts&) {
    }
  }
  return true;
}

// --- 10. Runtime scaling ------------------------------------------------------

bool RuntimeScaling() {
  const auto rows =
      RunProtocolBench({100, 1000, 10000}, {10, 100, 1000}, 3, 5, 1234);
  std::vector<double> log_work, log_time;
  for (const auto& row : rows) {
    log_work.push_back(std::log(static_cast<double>(row.n_clients) *
                                row.dimension));
    log_time.push_back(std::log(row.avg_seconds));
  }
  const double slope = Slope(log_work, log_time);
  std::printf("    [bench] growth exponent %.3f\n", slope);
  return slope > 0.7 && slope < 1.4;
}

}  // namespace
}  // namespace privagg

int main() {
  privagg::Reporter reporter;
  reporter.Run("share-cancellation", privagg::ShareCancellation);
  reporter.Run("noise-calibration", privagg::NoiseCalibration);
  reporter.Run("scaling-curve", privagg::ScalingCurve);
  reporter.Run("sensitivity-oracle", privagg::SensitivityOracle);
  reporter.Run("posterior-oracle", privagg::PosteriorOracle);
  reporter.Run("asymptotic-efficiency", privagg::AsymptoticEfficiency);
  reporter.Run("tail-bound-dominance", privagg::TailBoundDominance);
  reporter.Run("method-ordering", privagg::MethodOrdering);
  reporter.Run("fault-tolerance", privagg::FaultTolerance);
  reporter.Run("runtime-scaling", privagg::RuntimeScaling);
  return reporter.failures == 0 ? 0 : 1;
}
