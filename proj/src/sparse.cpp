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

#include "clp/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "clp/error.hpp"

namespace clp {

void SparseMatrix::Multiply(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) const {
  Require(x.size() == cols && y.size() == rows, "sparse multiply: dimension mismatch");
  for (Eigen::Index i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (auto p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      acc += values[static_cast<std::size_t>(p)] * x(col_idx[static_cast<std::size_t>(p)]);
    }
    y(i) = acc;
  }
}

Vector SparseMatrix::operator*(const Vector& x) const {
  Vector y(rows);
  Multiply(x, y);
  return y;
}

Matrix SparseMatrix::ToDense() const {
  Matrix dense = Matrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (auto p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      dense(i, col_idx[static_cast<std::size_t>(p)]) += values[static_cast<std::size_t>(p)];
    }
  }
  return dense;
}

SparseMatrix SparseMatrix::FromDense(const Matrix& dense) {
  SparseMatrix m;
  m.rows = dense.rows();
  m.cols = dense.cols();
  m.row_ptr.assign(1, 0);
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        m.col_idx.push_back(static_cast<std::int32_t>(j));
        m.values.push_back(dense(i, j));
      }
    }
    m.row_ptr.push_back(static_cast<std::int64_t>(m.values.size()));
  }
  return m;
}

bool SparseMatrix::nonnegative() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v >= 0.0; });
}

double SparseMatrix::EntrywiseOneNorm() const {
  double s = 0.0;
  for (double v : values) s += std::abs(v);
  return s;
}

double SparseMatrix::FrobeniusNorm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double SparseMatrix::InducedOneNorm() const {
  std::vector<double> col_sums(static_cast<std::size_t>(cols), 0.0);
  for (std::size_t p = 0; p < values.size(); ++p) {
    col_sums[static_cast<std::size_t>(col_idx[p])] += std::abs(values[p]);
  }
  return col_sums.empty() ? 0.0 : *std::max_element(col_sums.begin(), col_sums.end());
}

double SparseMatrix::InducedInfNorm() const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    double s = 0.0;
    for (auto p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      s += std::abs(values[static_cast<std::size_t>(p)]);
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace clp
