// Copyright 2026 The NormBridge Authors
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace nb::ensemble {

/// Concatenated base-model outputs: a one-hot block from the discrete model
/// followed by a distribution from the probabilistic one, each of length K.
struct FeatureVector {
  std::vector<double> values;

  std::size_t classes() const noexcept { return values.size() / 2; }
};

/// Multinomial logistic regression over stacked features.
struct StackingModel {
  std::size_t classes = 0;
  std::vector<double> weights;  // classes x (2 * classes), row-major
  std::vector<double> bias;     // classes
  /// Training data covered fewer than all classes.
  bool degenerate = false;

  std::size_t feature_dim() const noexcept { return 2 * classes; }
  double& weight(std::size_t cls, std::size_t feat) {
    return weights[cls * feature_dim() + feat];
  }
  double weight(std::size_t cls, std::size_t feat) const {
    return weights[cls * feature_dim() + feat];
  }

  /// All-zero model with the given class count.
  static StackingModel zeros(std::size_t classes);
};

struct TrainConfig {
  double learning_rate = 0.1;
  double l2 = 1e-3;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
};

struct Prediction {
  std::size_t label = 0;
  std::vector<double> distribution;
};

/// Throws PreconditionError unless 0 <= index < classes.
std::vector<double> one_hot(std::size_t index, std::size_t classes);

/// Throws DimensionError on length mismatch and PreconditionError when
/// `discrete` is not one-hot or `probs` is not a distribution.
FeatureVector stack_features(std::span<const double> discrete,
                             std::span<const double> probs);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

std::vector<double> logits(const StackingModel& model, const FeatureVector& f);
Prediction predict(const StackingModel& model, const FeatureVector& f);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> weights;  // same layout as StackingModel::weights
  std::vector<double> bias;
};

/// Mean cross-entropy plus (l2 / 2) * ||W||^2; the bias is not penalised.
LossGradient loss_and_gradient(const StackingModel& model,
                               std::span<const FeatureVector> features,
                               std::span<const std::size_t> labels, double l2);

/// Full-batch gradient descent from a seeded uniform(-0.01, 0.01) start.
/// `loss_trace`, when given, receives the objective before each epoch and
/// once after the last.
StackingModel train_stacker(std::span<const FeatureVector> features,
                            std::span<const std::size_t> labels,
                            const TrainConfig& config,
                            std::vector<double>* loss_trace = nullptr);

/// Text format: `K`, then K rows of 2K weights, then the K biases.
void save_model(const StackingModel& model, std::ostream& out);
StackingModel load_model(std::istream& in);
void save_model(const StackingModel& model, const std::filesystem::path& path);
StackingModel load_model(const std::filesystem::path& path);

}  // namespace nb::ensemble
