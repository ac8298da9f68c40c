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

#ifndef CLP_PROPAGATION_HPP_
#define CLP_PROPAGATION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clp/graph.hpp"
#include "clp/sparse.hpp"
#include "clp/types.hpp"

namespace clp {

// Class-conditioned arc weights. For an arc s -> r the weight vector is
//   F[s->r] = (B0[s] H) o B0[r]
// and slice k is the n x n matrix whose entry (r, s) is F[s->r][k]: rows are
// receivers, so one propagation step for class k is a plain product
// A^F_k B[:, k]. Every slice shares the graph's in-arc pattern.
class EdgeWeightTensor {
 public:
  EdgeWeightTensor() = default;

  NodeId node_count() const { return node_count_; }
  int num_classes() const { return static_cast<int>(per_class_.size()); }
  std::size_t arc_count() const { return senders_.size(); }

  // Receiver-major pattern shared by every slice.
  std::span<const std::int64_t> row_ptr() const { return row_ptr_; }
  std::span<const NodeId> senders() const { return senders_; }
  std::span<const double> class_weights(int k) const {
    return per_class_[static_cast<std::size_t>(k)];
  }

  SparseMatrix Slice(int k) const;

  // F[sender -> receiver]; nullopt when the arc does not exist.
  std::optional<Vector> Weight(NodeId sender, NodeId receiver) const;

 private:
  friend EdgeWeightTensor EdgeWeights(const Graph&, const Beliefs&, const Matrix&);
  friend EdgeWeightTensor EdgeWeightsFromSlices(const std::vector<SparseMatrix>&);

  NodeId node_count_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<NodeId> senders_;
  std::vector<std::vector<double>> per_class_;
};

// Computed once from the prior beliefs and never updated.
EdgeWeightTensor EdgeWeights(const Graph& graph, const Beliefs& prior, const Matrix& h_hat);

// Wraps externally built slices (all with one sparsity pattern) as a tensor.
// Used for analytic instances whose spectrum is known.
EdgeWeightTensor EdgeWeightsFromSlices(const std::vector<SparseMatrix>& slices);

// One message per arc: m[s->r] = F[s->r] o B[s], optionally divided by its
// sum (zero-sum messages stay zero). Row i of `values` belongs to arcs[i].
struct ArcMessages {
  std::vector<Arc> arcs;
  Matrix values;
};
ArcMessages ComputeMessages(const EdgeWeightTensor& weights, const Matrix& beliefs,
                            bool normalize);

enum class TeleportSource { kBasePrediction, kPrior };
enum class AdjacencyWeighting { kRaw, kSymmetric };

struct PropagationConfig {
  double alpha = 0.9;
  int max_iters = 50;
  double tol = 1e-9;
  bool message_normalization = false;
  TeleportSource teleport = TeleportSource::kBasePrediction;
  // Operator for the sender-only variants (CLP* and plain LP).
  AdjacencyWeighting adjacency = AdjacencyWeighting::kRaw;
  // Consecutive residual increases that count as divergence.
  int divergence_window = 10;

  // alpha in [0, 1), max_iters >= 1, tol > 0.
  void Validate() const;
};

const char* ToString(TeleportSource source);
const char* ToString(AdjacencyWeighting weighting);

enum class PropagationStatus { kConverged, kMaxIterations, kDiverged };
const char* ToString(PropagationStatus status);

struct IterationRecord {
  int iter = 0;
  double residual = 0.0;        // max entrywise change
  std::vector<double> per_class;
};

struct PropagationResult {
  Beliefs beliefs;  // raw fixed-point iterate, not renormalized
  std::vector<ClassId> predicted;
  std::vector<IterationRecord> log;
  PropagationStatus status = PropagationStatus::kMaxIterations;
  std::string diagnostic;
  std::vector<std::string> warnings;

  int iterations() const { return static_cast<int>(log.size()); }
  // Columns (iter, residual, residual_class_0, ...).
  std::string LogCsv() const;
};

// B(r+1) = (1 - alpha) T + alpha A^F (+) B(r) from B(0) = T, where column k
// of A^F (+) B is A^F_k B[:, k]. With message_normalization the neighbor
// term is instead the sum of normalized messages.
PropagationResult PropagateClp(const EdgeWeightTensor& weights, const Beliefs& teleport,
                               const PropagationConfig& config);

// Weighted sender-only adjacency: raw 0/1 in-arcs or D^-1/2 A D^-1/2.
// Row r lists the senders of r.
SparseMatrix PropagationOperator(const Graph& graph, AdjacencyWeighting weighting);

// One CLP* step without teleport: A B H, every receiver getting the same
// message from a given sender.
Matrix AggregateClpStar(const SparseMatrix& op, const Matrix& beliefs, const Matrix& h_hat);

// B(r+1) = (1 - alpha) T + alpha A B(r) H
PropagationResult PropagateClpStar(const Graph& graph, const Beliefs& teleport,
                                   const Matrix& h_hat, const PropagationConfig& config);

// Plain label propagation: identity compatibility, teleport = one-hot train
// labels, symmetric normalized adjacency. Rows left all-zero (no labeled
// node reachable) become uniform with a warning.
PropagationResult PropagateLp(const Graph& graph, const Matrix& y_onehot,
                              std::span<const NodeId> train, const PropagationConfig& config);

// Largest n accepted by the dense closed-form solver.
inline constexpr Eigen::Index kClosedFormMaxNodes = 5000;

// Solves (I - alpha A^F_k) x = (1 - alpha) t_k by dense LU. `class_index`
// only labels errors. Throws Error(kNumerical) when the system is singular
// and Error(kInvalidArgument) above kClosedFormMaxNodes.
Vector ClosedFormClp(const SparseMatrix& slice, const Vector& teleport_k, double alpha,
                     int class_index = 0);

// Every class at once.
Matrix ClosedFormClpAll(const EdgeWeightTensor& weights, const Matrix& teleport, double alpha);

struct SpectralEstimate {
  double rho = 0.0;
  // Relative change of the windowed estimate at exit.
  double residual = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  // Collatz-Wielandt bracket, only for nonnegative matrices.
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
};

// Power iteration with a random positive start. The estimate is the
// geometric mean of ||A x|| over the last six steps, which also settles for
// dominant eigenvalue pairs such as +-rho. Restarts up to three times when
// the estimate stagnates.
SpectralEstimate SpectralRadius(const SparseMatrix& m, int iters = 2000, double tol = 1e-10,
                                std::uint64_t seed = 0);

enum class ConvergenceVerdict { kCertified, kConvergent, kDivergent, kInconclusive };
const char* ToString(ConvergenceVerdict verdict);

struct ClassConvergence {
  int class_index = 0;
  double entrywise_one_norm = 0.0;
  double frobenius_norm = 0.0;
  double induced_one_norm = 0.0;
  double induced_inf_norm = 0.0;
  std::optional<SpectralEstimate> spectral;  // only when no bound certified
  ConvergenceVerdict verdict = ConvergenceVerdict::kInconclusive;
};

// Per class: certified when some cheap norm bound already lies below
// 1/alpha, otherwise decided from a spectral radius estimate.
std::vector<ClassConvergence> ConvergenceCheck(const EdgeWeightTensor& weights, double alpha);

// Outer index follows `alphas`; each spectrum is estimated at most once.
std::vector<std::vector<ClassConvergence>> ConvergenceCheckGrid(const EdgeWeightTensor& weights,
                                                                std::span<const double> alphas);

// Verdict for a single operator against 1/alpha.
ClassConvergence CheckOperator(const SparseMatrix& op, double alpha, int class_index = 0);

// CheckOperator for several alphas with a single spectral estimate.
std::vector<ClassConvergence> CheckOperatorGrid(const SparseMatrix& op,
                                                std::span<const double> alphas,
                                                int class_index = 0);

}  // namespace clp

#endif  // CLP_PROPAGATION_HPP_
