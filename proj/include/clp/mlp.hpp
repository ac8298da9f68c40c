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

#ifndef CLP_MLP_HPP_
#define CLP_MLP_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clp/graph.hpp"
#include "clp/types.hpp"

namespace clp {

// Affine layer computing x W + b, with W stored in_dim x out_dim.
struct DenseLayer {
  Matrix weight;
  Vector bias;
};

// Feature-only base predictor: rectifier hidden layers and a linear output
// layer producing class logits.
struct MlpParams {
  std::vector<DenseLayer> layers;
  double dropout_rate = 0.0;

  Eigen::Index input_dim() const { return layers.front().weight.rows(); }
  Eigen::Index num_classes() const { return layers.back().weight.cols(); }
};

enum class Optimizer { kGradientDescent, kAdam };

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 500;
  int early_stop_patience = 50;
  double weight_decay = 5e-5;
  double dropout = 0.5;
  int hidden_dim = 64;
  int num_hidden_layers = 1;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::kAdam;

  // Throws Error(kInvalidArgument) for a negative rate, a non-positive epoch count,
  // patience above epochs, dropout outside [0, 1) or depth outside {1, 2, 3}.
  void Validate() const;
};

const char* ToString(Optimizer optimizer);
Optimizer ParseOptimizer(const std::string& name);

// Uniform Glorot initialization, s = sqrt(6 / (in + out)), zero biases.
// num_hidden_layers == 0 yields a single linear layer.
MlpParams InitMlp(int feature_dim, int hidden_dim, int num_hidden_layers, int num_classes,
                  std::uint64_t seed, double dropout_rate = 0.0);

// Logits for every row of x. In train mode hidden activations go through
// inverted dropout with masks drawn from `seed`.
Matrix Forward(const MlpParams& params, const Matrix& x, bool train_mode = false,
               std::uint64_t seed = 0);

// Row-wise softmax with max subtraction.
Matrix Softmax(const Matrix& logits);

// Softmax of the eval-mode logits.
Beliefs Predict(const MlpParams& params, const Matrix& x);

struct LossGradient {
  double loss = 0.0;
  std::vector<DenseLayer> gradient;  // same shapes as params.layers
};

// Mean cross-entropy over `rows` (log-sum-exp form) and its exact gradient.
// Weight decay is applied by the optimizer and is not part of this loss.
LossGradient CrossEntropyGradient(const MlpParams& params, const Matrix& x,
                                  std::span<const NodeId> rows,
                                  std::span<const ClassId> labels, bool train_mode = false,
                                  std::uint64_t dropout_seed = 0);

double CrossEntropyLoss(const MlpParams& params, const Matrix& x,
                        std::span<const NodeId> rows, std::span<const ClassId> labels);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  MlpParams params;  // snapshot with the best validation accuracy
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  double best_val_acc = 0.0;

  // Columns (epoch, train_loss, val_acc).
  std::string LogCsv() const;
};

// Full-batch training on mask.train with early stopping on mask.validation
// accuracy. Throws Error(kNumerical) on a non-finite loss and
// Error(kData) on an empty train set.
TrainResult Train(MlpParams params, const Graph& graph, const SplitMask& mask,
                  const TrainConfig& config);

// Flat binary checkpoint: "CLPMLP01", u32 layer count, (u32 in, u32 out) per
// layer, f64 dropout, then per layer the row-major f64 weights followed by the
// bias. Little-endian.
std::string SerializeCheckpoint(const MlpParams& params);
MlpParams DeserializeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const MlpParams& params, const std::filesystem::path& path);
MlpParams LoadCheckpoint(const std::filesystem::path& path);

}  // namespace clp

#endif  // CLP_MLP_HPP_
