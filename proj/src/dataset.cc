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

#include "privagg/dataset.h"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "privagg/errors.h"

namespace privagg {

Dataset LoadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error("ragged CSV row in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2) {
    throw Error("CSV needs at least one feature column and a target");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows.front().size()) - 1;
  Dataset data;
  data.X.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.X(i, j) = rows[i][j];
    data.y[i] = rows[i][d];
  }
  return data;
}

void SaveCsv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.X(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", data.y[i]);
    out << buf << '\n';
  }
}

std::pair<Dataset, Dataset> TrainTestSplit(const Dataset& data,
                                           Eigen::Index test_size,
                                           BitGen& gen) {
  if (test_size <= 0 || test_size >= data.n()) {
    throw InvalidConfig("test size must be in (0, n)");
  }
  std::vector<Eigen::Index> order(data.n());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with the injected generator for cross-platform determinism.
  for (Eigen::Index i = data.n() - 1; i > 0; --i) {
    const Eigen::Index j = static_cast<Eigen::Index>(
        gen.NextUint64() % static_cast<uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  Dataset train, test;
  const Eigen::Index n_train = data.n() - test_size;
  train.X.resize(n_train, data.d());
  train.y.resize(n_train);
  test.X.resize(test_size, data.d());
  test.y.resize(test_size);
  for (Eigen::Index i = 0; i < n_train; ++i) {
    train.X.row(i) = data.X.row(order[i]);
    train.y[i] = data.y[order[i]];
  }
  for (Eigen::Index i = 0; i < test_size; ++i) {
    test.X.row(i) = data.X.row(order[n_train + i]);
    test.y[i] = data.y[order[n_train + i]];
  }
  return {std::move(train), std::move(test)};
}

double MeanAbsoluteError(const Eigen::VectorXd& truth,
                         const Eigen::VectorXd& predicted) {
  if (truth.size() != predicted.size() || truth.size() == 0) {
    throw DimensionMismatch("prediction vector length mismatch");
  }
  return (truth - predicted).cwiseAbs().mean();
}

}  // namespace privagg
