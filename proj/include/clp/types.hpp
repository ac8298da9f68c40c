// Copyright 2026 The CLP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLP_TYPES_HPP_
#define CLP_TYPES_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace clp {

using NodeId = std::int32_t;
using ClassId = std::int32_t;
inline constexpr ClassId kUnknownLabel = -1;

// Dense n x |Y| score matrix. Column-major, so per-class slices are
// contiguous.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class BeliefKind { kBasePrediction, kPrior, kPropagated };

// Row-per-node, column-per-class nonnegative scores. Base predictions and
// priors are row-stochastic; propagated beliefs are only finite and
// nonnegative.
struct Beliefs {
  Matrix values;
  BeliefKind kind = BeliefKind::kPropagated;

  Eigen::Index num_nodes() const { return values.rows(); }
  Eigen::Index num_classes() const { return values.cols(); }
};

enum class Normalization { kRowStochastic, kDoublyStochastic };

// |Y| x |Y| class compatibility. The true matrix is row-stochastic, the
// estimated one doubly stochastic.
struct CompatibilityMatrix {
  Matrix values;
  Normalization normalization = Normalization::kRowStochastic;
  // Max |row/col sum - 1| reached by Sinkhorn; 0 for the true matrix.
  double deviation = 0.0;
  std::vector<std::string> warnings;
};

// Argmax per row, ties broken towards the lowest class id.
std::vector<ClassId> ArgmaxRows(const Matrix& m);

// Divides each row by its sum; all-zero rows are left untouched.
Matrix RowNormalized(const Matrix& m);

const char* ToString(BeliefKind kind);
const char* ToString(Normalization normalization);

}  // namespace clp

#endif  // CLP_TYPES_HPP_
