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

#include "clp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "clp/error.hpp"
#include "clp/util.hpp"

namespace clp {

SparseMatrix EdgeWeightTensor::Slice(int k) const {
  Require(k >= 0 && k < num_classes(), "edge weight slice: class out of range");
  SparseMatrix m;
  m.rows = node_count_;
  m.cols = node_count_;
  m.row_ptr = row_ptr_;
  m.col_idx.assign(senders_.begin(), senders_.end());
  m.values = per_class_[static_cast<std::size_t>(k)];
  return m;
}

std::optional<Vector> EdgeWeightTensor::Weight(NodeId sender, NodeId receiver) const {
  if (receiver < 0 || receiver >= node_count_) return std::nullopt;
  const auto begin = senders_.begin() + row_ptr_[static_cast<std::size_t>(receiver)];
  const auto end = senders_.begin() + row_ptr_[static_cast<std::size_t>(receiver) + 1];
  const auto it = std::lower_bound(begin, end, sender);
  if (it == end || *it != sender) return std::nullopt;
  const auto p = static_cast<std::size_t>(it - senders_.begin());
  Vector w(num_classes());
  for (int k = 0; k < num_classes(); ++k) w(k) = per_class_[static_cast<std::size_t>(k)][p];
  return w;
}

EdgeWeightTensor EdgeWeights(const Graph& graph, const Beliefs& prior, const Matrix& h_hat) {
  const Eigen::Index k = prior.values.cols();
  if (prior.values.rows() != graph.node_count()) {
    Fail(ErrorCode::kInvalidArgument, "edge_weights: prior beliefs do not match node count");
  }
  if (h_hat.rows() != k || h_hat.cols() != k) {
    Fail(ErrorCode::kInvalidArgument, "edge_weights: compatibility matrix is not |Y| x |Y|");
  }
  // Row s of B0 H: what sender s expects its neighbors' classes to be.
  const Matrix expected = prior.values * h_hat;

  EdgeWeightTensor t;
  t.node_count_ = graph.node_count();
  t.row_ptr_.assign(graph.in_offsets().begin(), graph.in_offsets().end());
  t.senders_.assign(graph.in_sources().begin(), graph.in_sources().end());
  t.per_class_.assign(static_cast<std::size_t>(k), std::vector<double>(t.senders_.size()));
  for (NodeId r = 0; r < graph.node_count(); ++r) {
    for (auto p = t.row_ptr_[static_cast<std::size_t>(r)];
         p < t.row_ptr_[static_cast<std::size_t>(r) + 1]; ++p) {
      const NodeId s = t.senders_[static_cast<std::size_t>(p)];
      for (Eigen::Index c = 0; c < k; ++c) {
        t.per_class_[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)] =
            expected(s, c) * prior.values(r, c);
      }
    }
  }
  return t;
}

EdgeWeightTensor EdgeWeightsFromSlices(const std::vector<SparseMatrix>& slices) {
  Require(!slices.empty(), "edge weights: no slices");
  const SparseMatrix& first = slices.front();
  Require(first.square(), "edge weights: slices must be square");
  EdgeWeightTensor t;
  t.node_count_ = static_cast<NodeId>(first.rows);
  t.row_ptr_ = first.row_ptr;
  t.senders_.assign(first.col_idx.begin(), first.col_idx.end());
  for (const SparseMatrix& s : slices) {
    if (s.rows != first.rows || s.row_ptr != first.row_ptr || s.col_idx != first.col_idx) {
      Fail(ErrorCode::kInvalidArgument, "edge weights: slices must share one sparsity pattern");
    }
    t.per_class_.push_back(s.values);
  }
  return t;
}

ArcMessages ComputeMessages(const EdgeWeightTensor& weights, const Matrix& beliefs,
                            bool normalize) {
  const int k = weights.num_classes();
  if (beliefs.rows() != weights.node_count() || beliefs.cols() != k) {
    Fail(ErrorCode::kInvalidArgument, "compute_messages: beliefs shape mismatch");
  }
  struct Entry {
    Arc arc;
    std::size_t index;
  };
  std::vector<Entry> entries;
  entries.reserve(weights.arc_count());
  const auto row_ptr = weights.row_ptr();
  const auto senders = weights.senders();
  for (NodeId r = 0; r < weights.node_count(); ++r) {
    for (auto p = row_ptr[static_cast<std::size_t>(r)]; p < row_ptr[static_cast<std::size_t>(r) + 1]; ++p) {
      entries.push_back({{senders[static_cast<std::size_t>(p)], r}, static_cast<std::size_t>(p)});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.arc < b.arc; });

  ArcMessages out;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(entries.size()), k);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const NodeId s = entries[i].arc.source;
    for (int c = 0; c < k; ++c) {
      out.values(row, c) = weights.class_weights(c)[entries[i].index] * beliefs(s, c);
    }
    if (normalize) {
      const double sum = out.values.row(row).sum();
      if (sum > 0.0) out.values.row(row) /= sum;
    }
    out.arcs.push_back(entries[i].arc);
  }
  return out;
}

void PropagationConfig::Validate() const {
  Require(alpha >= 0.0 && alpha < 1.0, "propagation: alpha must lie in [0, 1)");
  Require(max_iters >= 1, "propagation: max_iters must be >= 1");
  Require(tol > 0.0, "propagation: tol must be > 0");
  Require(divergence_window >= 1, "propagation: divergence_window must be >= 1");
}

const char* ToString(TeleportSource source) {
  return source == TeleportSource::kPrior ? "prior" : "base";
}

const char* ToString(AdjacencyWeighting weighting) {
  return weighting == AdjacencyWeighting::kSymmetric ? "symmetric" : "raw";
}

const char* ToString(PropagationStatus status) {
  switch (status) {
    case PropagationStatus::kConverged: return "converged";
    case PropagationStatus::kMaxIterations: return "max_iterations";
    case PropagationStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

std::string PropagationResult::LogCsv() const {
  std::string out = "iter,residual";
  const std::size_t k = log.empty() ? 0 : log.front().per_class.size();
  for (std::size_t c = 0; c < k; ++c) out += ",residual_class_" + std::to_string(c);
  out += '\n';
  for (const IterationRecord& r : log) {
    out += std::to_string(r.iter) + "," + FormatDouble(r.residual);
    for (double v : r.per_class) out += "," + FormatDouble(v);
    out += '\n';
  }
  return out;
}

namespace {

// Shared fixed-point driver: next = (1 - alpha) T + alpha * neighbor(B),
// starting from B = T. `neighbor` writes its result into the second argument.
template <typename NeighborFn>
PropagationResult Iterate(const Matrix& teleport, const PropagationConfig& config,
                          NeighborFn&& neighbor) {
  config.Validate();
  PropagationResult result;
  Matrix current = teleport;
  Matrix next(teleport.rows(), teleport.cols());
  Matrix agg(teleport.rows(), teleport.cols());
  double previous = std::numeric_limits<double>::infinity();
  int increases = 0;
  result.status = PropagationStatus::kMaxIterations;
  for (int it = 1; it <= config.max_iters; ++it) {
    neighbor(current, agg);
    next = (1.0 - config.alpha) * teleport + config.alpha * agg;

    IterationRecord rec;
    rec.iter = it;
    rec.per_class.resize(static_cast<std::size_t>(teleport.cols()));
    for (Eigen::Index k = 0; k < teleport.cols(); ++k) {
      const double d = teleport.rows() == 0 ? 0.0 : (next.col(k) - current.col(k)).cwiseAbs().maxCoeff();
      rec.per_class[static_cast<std::size_t>(k)] = d;
      rec.residual = std::max(rec.residual, d);
    }
    if (!std::isfinite(rec.residual) || !next.allFinite()) rec.residual = std::numeric_limits<double>::infinity();
    result.log.push_back(rec);
    current.swap(next);

    if (!std::isfinite(rec.residual)) {
      result.status = PropagationStatus::kDiverged;
      result.diagnostic = "non-finite beliefs at iteration " + std::to_string(it);
      break;
    }
    if (rec.residual < config.tol) {
      result.status = PropagationStatus::kConverged;
      break;
    }
    increases = rec.residual > previous ? increases + 1 : 0;
    previous = rec.residual;
    if (increases >= config.divergence_window) {
      result.status = PropagationStatus::kDiverged;
      result.diagnostic = "residual grew for " + std::to_string(increases) +
                          " consecutive iterations (last " + FormatDouble(rec.residual) +
                          " at iteration " + std::to_string(it) + ")";
      break;
    }
  }
  result.beliefs = {std::move(current), BeliefKind::kPropagated};
  result.predicted = ArgmaxRows(result.beliefs.values);
  return result;
}

void CheckTeleport(const Matrix& teleport, Eigen::Index n, Eigen::Index k, const char* what) {
  if (teleport.rows() != n || teleport.cols() != k) {
    Fail(ErrorCode::kInvalidArgument, std::string(what) + ": teleport shape mismatch");
  }
}

}  // namespace

PropagationResult PropagateClp(const EdgeWeightTensor& weights, const Beliefs& teleport,
                               const PropagationConfig& config) {
  const int k = weights.num_classes();
  CheckTeleport(teleport.values, weights.node_count(), k, "propagate_clp");
  const auto row_ptr = weights.row_ptr();
  const auto senders = weights.senders();
  const NodeId n = weights.node_count();

  if (!config.message_normalization) {
    return Iterate(teleport.values, config, [&](const Matrix& b, Matrix& out) {
      for (int c = 0; c < k; ++c) {
        const auto w = weights.class_weights(c);
        for (NodeId r = 0; r < n; ++r) {
          double acc = 0.0;
          for (auto p = row_ptr[static_cast<std::size_t>(r)]; p < row_ptr[static_cast<std::size_t>(r) + 1]; ++p) {
            acc += w[static_cast<std::size_t>(p)] * b(senders[static_cast<std::size_t>(p)], c);
          }
          out(r, c) = acc;
        }
      }
    });
  }
  return Iterate(teleport.values, config, [&](const Matrix& b, Matrix& out) {
    Eigen::RowVectorXd msg(k);
    out.setZero();
    for (NodeId r = 0; r < n; ++r) {
      for (auto p = row_ptr[static_cast<std::size_t>(r)]; p < row_ptr[static_cast<std::size_t>(r) + 1]; ++p) {
        const NodeId s = senders[static_cast<std::size_t>(p)];
        for (int c = 0; c < k; ++c) msg(c) = weights.class_weights(c)[static_cast<std::size_t>(p)] * b(s, c);
        const double sum = msg.sum();
        if (sum > 0.0) out.row(r) += msg / sum;
      }
    }
  });
}

SparseMatrix PropagationOperator(const Graph& graph, AdjacencyWeighting weighting) {
  SparseMatrix op;
  op.rows = graph.node_count();
  op.cols = graph.node_count();
  op.row_ptr.assign(graph.in_offsets().begin(), graph.in_offsets().end());
  op.col_idx.assign(graph.in_sources().begin(), graph.in_sources().end());
  op.values.assign(op.col_idx.size(), 1.0);
  if (weighting == AdjacencyWeighting::kSymmetric) {
    for (NodeId r = 0; r < graph.node_count(); ++r) {
      for (auto p = op.row_ptr[static_cast<std::size_t>(r)]; p < op.row_ptr[static_cast<std::size_t>(r) + 1]; ++p) {
        const NodeId s = op.col_idx[static_cast<std::size_t>(p)];
        op.values[static_cast<std::size_t>(p)] =
            1.0 / std::sqrt(static_cast<double>(graph.in_degree(r)) *
                            static_cast<double>(graph.out_degree(s)));
      }
    }
  }
  return op;
}

namespace {

void MultiplyColumns(const SparseMatrix& op, const Matrix& b, Matrix& out) {
  for (Eigen::Index c = 0; c < b.cols(); ++c) op.Multiply(b.col(c), out.col(c));
}

}  // namespace

Matrix AggregateClpStar(const SparseMatrix& op, const Matrix& beliefs, const Matrix& h_hat) {
  Require(op.rows == beliefs.rows() && op.cols == beliefs.rows(),
          "clp_star: operator does not match beliefs");
  Require(h_hat.rows() == beliefs.cols() && h_hat.cols() == beliefs.cols(),
          "clp_star: compatibility matrix is not |Y| x |Y|");
  Matrix agg(beliefs.rows(), beliefs.cols());
  MultiplyColumns(op, beliefs, agg);
  return agg * h_hat;
}

PropagationResult PropagateClpStar(const Graph& graph, const Beliefs& teleport,
                                   const Matrix& h_hat, const PropagationConfig& config) {
  const Eigen::Index k = teleport.values.cols();
  CheckTeleport(teleport.values, graph.node_count(), k, "propagate_clp_star");
  Require(h_hat.rows() == k && h_hat.cols() == k,
          "propagate_clp_star: compatibility matrix is not |Y| x |Y|");
  const SparseMatrix op = PropagationOperator(graph, config.adjacency);
  Matrix tmp(teleport.values.rows(), k);
  return Iterate(teleport.values, config, [&](const Matrix& b, Matrix& out) {
    MultiplyColumns(op, b, tmp);
    out.noalias() = tmp * h_hat;
  });
}

PropagationResult PropagateLp(const Graph& graph, const Matrix& y_onehot,
                              std::span<const NodeId> train, const PropagationConfig& config) {
  const Eigen::Index k = y_onehot.cols();
  Require(y_onehot.rows() == graph.node_count(), "propagate_lp: label matrix shape mismatch");
  Matrix teleport = Matrix::Zero(graph.node_count(), k);
  for (NodeId v : train) {
    Require(v >= 0 && v < graph.node_count(), "propagate_lp: train node out of range");
    teleport.row(v) = y_onehot.row(v);
  }
  const SparseMatrix op = PropagationOperator(graph, AdjacencyWeighting::kSymmetric);
  PropagationResult result = Iterate(teleport, config, [&](const Matrix& b, Matrix& out) {
    MultiplyColumns(op, b, out);
  });
  std::size_t unreached = 0;
  for (Eigen::Index v = 0; v < result.beliefs.values.rows(); ++v) {
    if (result.beliefs.values.row(v).sum() == 0.0) {
      result.beliefs.values.row(v).setConstant(1.0 / static_cast<double>(k));
      ++unreached;
    }
  }
  if (unreached > 0) {
    result.warnings.push_back(std::to_string(unreached) +
                              " nodes received no label mass; predicted uniform");
    result.predicted = ArgmaxRows(result.beliefs.values);
  }
  return result;
}

Vector ClosedFormClp(const SparseMatrix& slice, const Vector& teleport_k, double alpha,
                     int class_index) {
  Require(slice.square(), "closed_form_clp: slice must be square");
  Require(teleport_k.size() == slice.rows, "closed_form_clp: teleport length mismatch");
  Require(alpha >= 0.0 && alpha < 1.0, "closed_form_clp: alpha must lie in [0, 1)");
  if (slice.rows > kClosedFormMaxNodes) {
    Fail(ErrorCode::kInvalidArgument, "closed_form_clp: " + std::to_string(slice.rows) +
                                          " nodes exceed the dense solver limit of " +
                                          std::to_string(kClosedFormMaxNodes));
  }
  const Eigen::Index n = slice.rows;
  if (n == 0) return Vector();
  const Matrix system = Matrix::Identity(n, n) - alpha * slice.ToDense();
  const Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  Vector x = lu.solve((1.0 - alpha) * teleport_k);
  if (!(rcond > 1e-14) || !x.allFinite()) {
    Fail(ErrorCode::kNumerical, "closed_form_clp: system for class " + std::to_string(class_index) +
                                    " is singular (rcond " + FormatDouble(rcond) + ")");
  }
  return x;
}

Matrix ClosedFormClpAll(const EdgeWeightTensor& weights, const Matrix& teleport, double alpha) {
  CheckTeleport(teleport, weights.node_count(), weights.num_classes(), "closed_form_clp");
  Matrix out(teleport.rows(), teleport.cols());
  for (int k = 0; k < weights.num_classes(); ++k) {
    out.col(k) = ClosedFormClp(weights.Slice(k), teleport.col(k), alpha, k);
  }
  return out;
}

SpectralEstimate SpectralRadius(const SparseMatrix& m, int iters, double tol, std::uint64_t seed) {
  if (!m.square()) Fail(ErrorCode::kInvalidArgument, "spectral_radius: matrix must be square");
  Require(iters >= 1 && tol > 0.0, "spectral_radius: iters >= 1 and tol > 0 required");
  SpectralEstimate est;
  const Eigen::Index n = m.rows;
  if (n == 0 || std::all_of(m.values.begin(), m.values.end(), [](double v) { return v == 0.0; })) {
    est.converged = true;
    if (m.nonnegative()) est.lower_bound = est.upper_bound = 0.0;
    return est;
  }
  constexpr int kWindow = 6;
  constexpr int kMaxRestarts = 3;
  const bool nonneg = m.nonnegative();
  Vector x(n), y(n);

  for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
    est.restarts = attempt;
    Rng rng = MakeStream(seed, 0x737065 + static_cast<std::uint64_t>(attempt));
    for (Eigen::Index i = 0; i < n; ++i) x(i) = 0.5 + Uniform01(rng);
    x.normalize();

    std::vector<double> logs;
    double previous = -1.0;
    bool nilpotent = false;
    for (int it = 1; it <= iters; ++it) {
      m.Multiply(x, y);
      const double g = y.norm();
      est.iterations = it;
      if (g == 0.0) {
        nilpotent = true;
        break;
      }
      logs.push_back(std::log(g));
      if (nonneg && it == iters) break;  // keep x paired with y for the bracket
      if (static_cast<int>(logs.size()) >= kWindow) {
        const double mean =
            std::accumulate(logs.end() - kWindow, logs.end(), 0.0) / kWindow;
        est.rho = std::exp(mean);
        if (previous > 0.0) {
          est.residual = std::abs(est.rho - previous) / est.rho;
          if (est.residual <= tol) {
            est.converged = true;
            break;
          }
        }
        previous = est.rho;
      }
      x = y / g;
    }
    if (nilpotent) {
      est.rho = 0.0;
      est.residual = 0.0;
      est.converged = true;
      if (nonneg) est.lower_bound = est.upper_bound = 0.0;
      return est;
    }
    if (nonneg) {
      // Collatz-Wielandt bracket from the final (x, y = A x) pair.
      m.Multiply(x, y);
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      bool positive = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (x(i) > 0.0) {
          lo = std::min(lo, y(i) / x(i));
          hi = std::max(hi, y(i) / x(i));
        } else {
          positive = false;
        }
      }
      est.lower_bound = lo;
      if (positive) est.upper_bound = hi;
    }
    if (est.converged) return est;
  }
  return est;
}

const char* ToString(ConvergenceVerdict verdict) {
  switch (verdict) {
    case ConvergenceVerdict::kCertified: return "certified_convergent";
    case ConvergenceVerdict::kConvergent: return "convergent";
    case ConvergenceVerdict::kDivergent: return "divergent";
    case ConvergenceVerdict::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

namespace {

struct OperatorNorms {
  double entrywise_one = 0.0;
  double frobenius = 0.0;
  double induced_one = 0.0;
  double induced_inf = 0.0;
  double min() const { return std::min({entrywise_one, frobenius, induced_one, induced_inf}); }
};

OperatorNorms NormsOf(const SparseMatrix& op) {
  return {op.EntrywiseOneNorm(), op.FrobeniusNorm(), op.InducedOneNorm(), op.InducedInfNorm()};
}

ConvergenceVerdict Judge(const SpectralEstimate& s, double limit) {
  if (s.upper_bound && *s.upper_bound < limit) return ConvergenceVerdict::kConvergent;
  if (s.lower_bound && *s.lower_bound >= limit) return ConvergenceVerdict::kDivergent;
  if (s.converged) {
    const double margin = std::max(10.0 * s.residual, 1e-9) * s.rho;
    if (s.rho + margin < limit) return ConvergenceVerdict::kConvergent;
    if (s.rho - margin >= limit) return ConvergenceVerdict::kDivergent;
  }
  return ConvergenceVerdict::kInconclusive;
}

// Verdicts for several alphas, estimating the spectrum at most once.
std::vector<ClassConvergence> CheckAll(const SparseMatrix& op, std::span<const double> alphas,
                                       int class_index) {
  const OperatorNorms norms = NormsOf(op);
  std::optional<SpectralEstimate> spectral;
  std::vector<ClassConvergence> out;
  for (double alpha : alphas) {
    Require(alpha > 0.0 && alpha < 1.0, "convergence_check: alpha must lie in (0, 1)");
    ClassConvergence c;
    c.class_index = class_index;
    c.entrywise_one_norm = norms.entrywise_one;
    c.frobenius_norm = norms.frobenius;
    c.induced_one_norm = norms.induced_one;
    c.induced_inf_norm = norms.induced_inf;
    const double limit = 1.0 / alpha;
    if (norms.min() < limit) {
      c.verdict = ConvergenceVerdict::kCertified;
    } else {
      if (!spectral) {
        spectral = SpectralRadius(op, 2000, 1e-10, static_cast<std::uint64_t>(class_index));
      }
      c.spectral = spectral;
      c.verdict = Judge(*spectral, limit);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

ClassConvergence CheckOperator(const SparseMatrix& op, double alpha, int class_index) {
  const double alphas[] = {alpha};
  return CheckAll(op, alphas, class_index).front();
}

std::vector<ClassConvergence> CheckOperatorGrid(const SparseMatrix& op,
                                                std::span<const double> alphas,
                                                int class_index) {
  return CheckAll(op, alphas, class_index);
}

std::vector<ClassConvergence> ConvergenceCheck(const EdgeWeightTensor& weights, double alpha) {
  std::vector<ClassConvergence> out;
  for (int k = 0; k < weights.num_classes(); ++k) {
    out.push_back(CheckOperator(weights.Slice(k), alpha, k));
  }
  return out;
}

std::vector<std::vector<ClassConvergence>> ConvergenceCheckGrid(const EdgeWeightTensor& weights,
                                                                std::span<const double> alphas) {
  std::vector<std::vector<ClassConvergence>> out(alphas.size());
  for (int k = 0; k < weights.num_classes(); ++k) {
    auto per_alpha = CheckAll(weights.Slice(k), alphas, k);
    for (std::size_t a = 0; a < alphas.size(); ++a) out[a].push_back(std::move(per_alpha[a]));
  }
  return out;
}

}  // namespace clp
