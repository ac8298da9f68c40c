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

#ifndef CLP_SPARSE_HPP_
#define CLP_SPARSE_HPP_

#include <cstdint>
#include <vector>

#include "clp/types.hpp"

namespace clp {

// Compressed sparse row matrix. Products accumulate each row left to right
// over ascending column indices, so results are bitwise reproducible.
struct SparseMatrix {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  bool square() const { return rows == cols; }

  // y = A x
  void Multiply(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) const;
  Vector operator*(const Vector& x) const;

  Matrix ToDense() const;
  static SparseMatrix FromDense(const Matrix& dense);

  bool nonnegative() const;

  // sum |a_ij|
  double EntrywiseOneNorm() const;
  // sqrt(sum a_ij^2)
  double FrobeniusNorm() const;
  // max column abs sum (induced 1-norm)
  double InducedOneNorm() const;
  // max row abs sum (induced infinity-norm)
  double InducedInfNorm() const;
};

}  // namespace clp

#endif  // CLP_SPARSE_HPP_
