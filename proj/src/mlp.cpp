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

#include "clp/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "clp/error.hpp"
#include "clp/metrics.hpp"
#include "clp/util.hpp"

namespace clp {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void TrainConfig::Validate() const {
  Require(learning_rate >= 0.0 && std::isfinite(learning_rate),
          "train: learning_rate must be finite and >= 0");
  Require(epochs >= 1, "train: epochs must be >= 1");
  Require(early_stop_patience >= 1 && early_stop_patience <= epochs,
          "train: early_stop_patience must lie in [1, epochs]");
  Require(weight_decay >= 0.0, "train: weight_decay must be >= 0");
  Require(dropout >= 0.0 && dropout < 1.0, "train: dropout must lie in [0, 1)");
  Require(hidden_dim >= 1, "train: hidden_dim must be >= 1");
  Require(num_hidden_layers >= 1 && num_hidden_layers <= 3,
          "train: num_hidden_layers must be 1, 2 or 3");
}

const char* ToString(Optimizer optimizer) {
  return optimizer == Optimizer::kAdam ? "adam" : "gd";
}

Optimizer ParseOptimizer(const std::string& name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "gd" || name == "sgd") return Optimizer::kGradientDescent;
  Fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "'");
}

MlpParams InitMlp(int feature_dim, int hidden_dim, int num_hidden_layers, int num_classes,
                  std::uint64_t seed, double dropout_rate) {
  Require(feature_dim >= 1 && hidden_dim >= 1 && num_classes >= 1 && num_hidden_layers >= 0,
          "init_mlp: dimensions must be >= 1");
  MlpParams params;
  params.dropout_rate = dropout_rate;
  Rng rng = MakeStream(seed, 0x6d6c70);
  int in = feature_dim;
  for (int layer = 0; layer <= num_hidden_layers; ++layer) {
    const int out = layer == num_hidden_layers ? num_classes : hidden_dim;
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer dense{Matrix(in, out), Vector::Zero(out)};
    // Row-major fill order keeps the draw sequence independent of storage.
    for (int i = 0; i < in; ++i) {
      for (int j = 0; j < out; ++j) dense.weight(i, j) = (2.0 * Uniform01(rng) - 1.0) * s;
    }
    params.layers.push_back(std::move(dense));
    in = out;
  }
  return params;
}

namespace {

struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> pre_relu;     // hidden layers only
  std::vector<Matrix> dropout;      // hidden layers only; empty when off
  Matrix logits;
};

ForwardCache RunForward(const MlpParams& params, const Matrix& x, bool train_mode,
                        std::uint64_t seed) {
  Require(!params.layers.empty(), "forward: empty network");
  if (x.cols() != params.input_dim()) {
    Fail(ErrorCode::kInvalidArgument,
         "forward: feature dim " + std::to_string(x.cols()) + " != input dim " +
             std::to_string(params.input_dim()));
  }
  ForwardCache cache;
  const bool drop = train_mode && params.dropout_rate > 0.0;
  const double keep = 1.0 - params.dropout_rate;
  Rng rng = MakeStream(seed, 0x64726f70);
  Matrix current = x;
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    Matrix z = current * layer.weight;
    z.rowwise() += layer.bias.transpose();
    cache.inputs.push_back(std::move(current));
    if (l == last) {
      cache.logits = std::move(z);
      break;
    }
    Matrix a = z.cwiseMax(0.0);
    cache.pre_relu.push_back(std::move(z));
    if (drop) {
      Matrix scale(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
          scale(i, j) = Uniform01(rng) < keep ? 1.0 / keep : 0.0;
        }
      }
      a = a.cwiseProduct(scale);
      cache.dropout.push_back(std::move(scale));
    }
    current = std::move(a);
  }
  return cache;
}

Matrix SelectRows(const Matrix& x, std::span<const NodeId> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  }
  return out;
}

double LogSumExp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double m = row.maxCoeff();
  return m + std::log((row.array() - m).exp().sum());
}

}  // namespace

Matrix Forward(const MlpParams& params, const Matrix& x, bool train_mode, std::uint64_t seed) {
  return RunForward(params, x, train_mode, seed).logits;
}

Matrix Softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Beliefs Predict(const MlpParams& params, const Matrix& x) {
  return {Softmax(Forward(params, x)), BeliefKind::kBasePrediction};
}

LossGradient CrossEntropyGradient(const MlpParams& params, const Matrix& x,
                                  std::span<const NodeId> rows,
                                  std::span<const ClassId> labels, bool train_mode,
                                  std::uint64_t dropout_seed) {
  if (rows.empty()) Fail(ErrorCode::kData, "cross-entropy over an empty row set");
  const ForwardCache cache = RunForward(params, SelectRows(x, rows), train_mode, dropout_seed);
  const auto m = static_cast<double>(rows.size());

  LossGradient out;
  Matrix delta = Softmax(cache.logits);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const ClassId y = labels[static_cast<std::size_t>(rows[i])];
    if (y < 0 || y >= cache.logits.cols()) {
      Fail(ErrorCode::kData, "node " + std::to_string(rows[i]) + " has no usable label");
    }
    out.loss += LogSumExp(cache.logits.row(r)) - cache.logits(r, y);
    delta(r, y) -= 1.0;
  }
  out.loss /= m;
  delta /= m;

  out.gradient.resize(params.layers.size());
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    out.gradient[l].weight = cache.inputs[l].transpose() * delta;
    out.gradient[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    delta = delta * params.layers[l].weight.transpose();
    if (!cache.dropout.empty()) delta = delta.cwiseProduct(cache.dropout[l - 1]);
    delta = delta.cwiseProduct((cache.pre_relu[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

double CrossEntropyLoss(const MlpParams& params, const Matrix& x,
                        std::span<const NodeId> rows, std::span<const ClassId> labels) {
  if (rows.empty()) Fail(ErrorCode::kData, "cross-entropy over an empty row set");
  const Matrix logits = Forward(params, SelectRows(x, rows));
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    loss += LogSumExp(logits.row(r)) - logits(r, labels[static_cast<std::size_t>(rows[i])]);
  }
  return loss / static_cast<double>(rows.size());
}

std::string TrainResult::LogCsv() const {
  std::string out = "epoch,train_loss,val_acc\n";
  for (const EpochRecord& r : log) {
    out += std::to_string(r.epoch) + "," + FormatDouble(r.train_loss) + "," +
           FormatDouble(r.val_acc) + "\n";
  }
  return out;
}

namespace {

// First and second moments for Adam, one per parameter tensor.
struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  int step = 0;
};

DenseLayer ZerosLike(const DenseLayer& layer) {
  return {Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
          Vector::Zero(layer.bias.size())};
}

void ApplyUpdate(MlpParams& params, const std::vector<DenseLayer>& grad,
                 const TrainConfig& config, AdamState& adam) {
  const double lr = config.learning_rate;
  if (config.optimizer == Optimizer::kGradientDescent) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      DenseLayer& p = params.layers[l];
      p.weight -= lr * (grad[l].weight + config.weight_decay * p.weight);
      p.bias -= lr * grad[l].bias;
    }
    return;
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  if (adam.m.empty()) {
    for (const DenseLayer& p : params.layers) {
      adam.m.push_back(ZerosLike(p));
      adam.v.push_back(ZerosLike(p));
    }
  }
  ++adam.step;
  const double c1 = 1.0 - std::pow(kBeta1, adam.step);
  const double c2 = 1.0 - std::pow(kBeta2, adam.step);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    DenseLayer& p = params.layers[l];
    DenseLayer& m = adam.m[l];
    DenseLayer& v = adam.v[l];
    m.weight = kBeta1 * m.weight + (1.0 - kBeta1) * grad[l].weight;
    v.weight = kBeta2 * v.weight + (1.0 - kBeta2) * grad[l].weight.cwiseAbs2();
    m.bias = kBeta1 * m.bias + (1.0 - kBeta1) * grad[l].bias;
    v.bias = kBeta2 * v.bias + (1.0 - kBeta2) * grad[l].bias.cwiseAbs2();
    // Decoupled decay on weights only.
    p.weight -= lr * ((m.weight / c1).array() / ((v.weight / c2).array().sqrt() + kEps))
                         .matrix() +
                lr * config.weight_decay * p.weight;
    p.bias -= lr * ((m.bias / c1).array() / ((v.bias / c2).array().sqrt() + kEps)).matrix();
  }
}

}  // namespace

TrainResult Train(MlpParams params, const Graph& graph, const SplitMask& mask,
                  const TrainConfig& config) {
  config.Validate();
  if (mask.train.empty()) Fail(ErrorCode::kData, "train: empty train mask");
  if (!graph.has_labels()) Fail(ErrorCode::kData, "train: graph has no labels");
  params.dropout_rate = config.dropout;
  const Matrix& x = graph.features();
  const auto labels = graph.labels();

  TrainResult result;
  result.params = params;
  result.best_val_acc = -1.0;
  // Validation rows are re-indexed 0..k-1 against a compact copy.
  const Matrix x_val = SelectRows(x, mask.validation);
  std::vector<ClassId> y_val;
  std::vector<NodeId> val_rows;
  for (NodeId v : mask.validation) {
    val_rows.push_back(static_cast<NodeId>(y_val.size()));
    y_val.push_back(graph.label(v));
  }
  AdamState adam;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    LossGradient lg = CrossEntropyGradient(params, x, mask.train, labels, /*train_mode=*/true,
                                           MixSeed(config.seed, static_cast<std::uint64_t>(epoch)));
    if (!std::isfinite(lg.loss)) {
      Fail(ErrorCode::kNumerical, "train: loss became non-finite at epoch " +
                                      std::to_string(epoch) + " (learning rate too large?)");
    }
    ApplyUpdate(params, lg.gradient, config, adam);

    double val_acc = 0.0;
    if (!mask.validation.empty()) {
      val_acc = Accuracy(Forward(params, x_val), y_val, val_rows);
    }
    result.log.push_back({epoch, lg.loss, val_acc});
    if (val_acc > result.best_val_acc) {
      result.best_val_acc = val_acc;
      result.best_epoch = epoch;
      result.params = params;
    } else if (epoch - result.best_epoch >= config.early_stop_patience) {
      break;
    }
  }
  return result;
}

namespace {

template <typename T>
void Append(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T Take(std::string_view bytes, std::size_t& offset) {
  if (offset + sizeof(T) > bytes.size()) Fail(ErrorCode::kData, "checkpoint truncated");
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}

constexpr std::string_view kMagic("CLPMLP01", 8);

}  // namespace

std::string SerializeCheckpoint(const MlpParams& params) {
  std::string out(kMagic);
  Append<std::uint32_t>(out, static_cast<std::uint32_t>(params.layers.size()));
  for (const DenseLayer& l : params.layers) {
    Append<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.rows()));
    Append<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.cols()));
  }
  Append<double>(out, params.dropout_rate);
  for (const DenseLayer& l : params.layers) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) Append<double>(out, l.weight(i, j));
    }
    for (Eigen::Index j = 0; j < l.bias.size(); ++j) Append<double>(out, l.bias(j));
  }
  return out;
}

MlpParams DeserializeCheckpoint(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) Fail(ErrorCode::kData, "not a CLP checkpoint");
  std::size_t offset = kMagic.size();
  const auto count = Take<std::uint32_t>(bytes, offset);
  if (count == 0 || count > 64) Fail(ErrorCode::kData, "checkpoint: bad layer count");
  MlpParams params;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims;
  for (std::uint32_t l = 0; l < count; ++l) {
    const auto in = Take<std::uint32_t>(bytes, offset);
    const auto out = Take<std::uint32_t>(bytes, offset);
    if (!dims.empty() && dims.back().second != in) {
      Fail(ErrorCode::kData, "checkpoint: layer dimensions do not chain");
    }
    dims.emplace_back(in, out);
  }
  params.dropout_rate = Take<double>(bytes, offset);
  for (const auto& [in, out] : dims) {
    DenseLayer layer{Matrix(in, out), Vector(out)};
    for (std::uint32_t i = 0; i < in; ++i) {
      for (std::uint32_t j = 0; j < out; ++j) layer.weight(i, j) = Take<double>(bytes, offset);
    }
    for (std::uint32_t j = 0; j < out; ++j) layer.bias(j) = Take<double>(bytes, offset);
    params.layers.push_back(std::move(layer));
  }
  if (offset != bytes.size()) Fail(ErrorCode::kData, "checkpoint: trailing bytes");
  return params;
}

void SaveCheckpoint(const MlpParams& params, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeCheckpoint(params));
}

MlpParams LoadCheckpoint(const std::filesystem::path& path) {
  return DeserializeCheckpoint(ReadFile(path));
}

}  // namespace clp
