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

#ifndef PRIVAGG_DATASET_H_
#define PRIVAGG_DATASET_H_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

#include "privagg/rng.h"

namespace privagg {

struct Dataset {
  Eigen::MatrixXd X;  // n x d features
  Eigen::VectorXd y;  // n targets

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }
};

// Headerless CSV: d feature columns then one target column per row.
Dataset LoadCsv(const std::string& path);
void SaveCsv(const Dataset& data, const std::string& path);

// Uniformly shuffled split into (train, test) with test_size rows held out.
std::pair<Dataset, Dataset> TrainTestSplit(const Dataset& data,
                                           Eigen::Index test_size,
                                           BitGen& gen);

double MeanAbsoluteError(const Eigen::VectorXd& truth,
                         const Eigen::VectorXd& predicted);

}  // namespace privagg

#endif  // PRIVAGG_DATASET_H_
