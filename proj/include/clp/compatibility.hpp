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

#ifndef CLP_COMPATIBILITY_HPP_
#define CLP_COMPATIBILITY_HPP_

#include <filesystem>
#include <span>

#include "clp/graph.hpp"
#include "clp/types.hpp"

namespace clp {

// B0 = M o Y + (1 - M) o D: train rows clamped to their one-hot labels,
// every other row (validation included) keeps the base prediction.
Beliefs PriorBeliefs(const Beliefs& base, const Matrix& y_onehot,
                     std::span<const NodeId> train);

struct SinkhornOptions {
  double tol = 1e-9;
  int max_iters = 10000;
};

struct SinkhornResult {
  Matrix values;
  // Max |row or column sum - 1| after the last sweep.
  double deviation = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Alternating row-then-column normalization of a nonnegative square matrix.
// Throws Error(kInvalidArgument) on non-square input, negative entries or a
// zero row/column. Not reaching tol is reported through `converged`.
SinkhornResult SinkhornKnopp(const Matrix& m, const SinkhornOptions& options = {});

// Relative floor added to every raw score entry before balancing.
inline constexpr double kCompatibilityFloor = 1e-8;

// Raw class-pair scores (M o Y)^T A B0: for each train node u of class i,
// the sum of B0 over u's out-neighbors is added to row i.
Matrix CompatibilityScores(const Graph& graph, const Beliefs& prior,
                           std::span<const NodeId> train);

// H_hat = Sinkhorn(scores + eps), eps = floor * max(scores) (or floor if all
// zero). Classes absent from the train set produce a warning.
CompatibilityMatrix EstimateCompatibility(const Graph& graph, const Beliefs& prior,
                                          std::span<const NodeId> train,
                                          const SinkhornOptions& options = {});

// |Y| lines of |Y| comma-separated reals.
std::string CompatibilityCsv(const Matrix& h);

// Writes <stem>.csv and <stem>.json (normalization tag, Sinkhorn deviation,
// warnings).
void SaveCompatibility(const CompatibilityMatrix& h, const std::filesystem::path& stem);

}  // namespace clp

#endif  // CLP_COMPATIBILITY_HPP_
