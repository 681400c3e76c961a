/*
 * Copyright 2026 The xids Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Fully connected rectifier network with a softmax head.
//
// Parameters are always float32-representable: they are rounded after
// initialization and after training so that a model survives a save/load
// round trip bit-exactly. All arithmetic is carried out in double precision.

#ifndef XIDS_CORE_NN_HPP_
#define XIDS_CORE_NN_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace xids::dataset {
struct EncodedMatrix;
}

namespace xids::nn {

inline const std::vector<int>& DefaultLayerSizes() {
  static const std::vector<int> kSizes = {122, 1024, 768, 512, 2};
  return kSizes;
}

struct Layer {
  Matrix weights;  // fan_in x fan_out
  Vector bias;     // fan_out
};

struct MlpModel {
  std::vector<int> layer_sizes;
  std::vector<Layer> layers;
  double dropout_rate = 0.0;
  std::uint64_t seed = 0;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
  std::string fingerprint() const;
};

MlpModel InitModel(const std::vector<int>& layer_sizes, double dropout_rate, std::uint64_t seed);

// Pre-softmax outputs, n x classes. Inference mode (no dropout).
Matrix Logits(const MlpModel& model, const Matrix& batch);
// Softmax probabilities, n x classes.
Matrix Forward(const MlpModel& model, const Matrix& batch);
Matrix ForwardRows(const MlpModel& model, const RowMatrixF& rows);
Vector PredictProba(const MlpModel& model, const Vector& x);
Vector LogitsOf(const MlpModel& model, const Vector& x);
int PredictClass(const MlpModel& model, const Vector& x);
std::vector<int> PredictClasses(const MlpModel& model, const RowMatrixF& rows);

// d logit[target_class] / d x by backpropagation.
Vector InputGradient(const MlpModel& model, const Vector& x, int target_class);
// Highest-scoring class other than target_class (lowest index on ties).
int RunnerUp(const Vector& logits, int target_class);
// d (logit[t] - logit[runner-up]) / d x; `logits` receives the outputs.
Vector MarginGradient(const MlpModel& model, const Vector& x, int target_class, Vector* logits);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Mean softmax cross-entropy of `batch` against `labels` (inference mode);
// fills parameter gradients when `grads` is non-null.
double LossAndGradients(const MlpModel& model, const Matrix& batch, const std::vector<int>& labels,
                        Gradients* grads);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 100;
  int batch_size = 512;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double dropout_rate = 0.1;
  std::uint64_t rng_seed = 42;
  // Called after each epoch with (epoch, loss, accuracy).
  std::function<void(int, double, double)> on_epoch;

  void Validate() const;
};

struct TrainHistory {
  std::vector<double> loss;
  std::vector<double> accuracy;
  std::size_t epochs() const { return loss.size(); }
};

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

TrainResult Train(MlpModel model, const RowMatrixF& inputs, const std::vector<int>& labels,
                  const TrainConfig& config);
TrainResult Train(MlpModel model, const dataset::EncodedMatrix& data, const TrainConfig& config);

struct Metrics {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool precision_defined = true;
  bool recall_defined = true;
  std::size_t total() const { return tp + fp + tn + fn; }
};

// Attack (1) is the positive class.
Metrics MetricsFromCounts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
Metrics MetricsFromPredictions(const std::vector<int>& predicted, const std::vector<int>& labels);
Metrics Evaluate(const MlpModel& model, const dataset::EncodedMatrix& data);

void SaveModel(const MlpModel& model, const std::string& path);
MlpModel LoadModel(const std::string& path);

}  // namespace xids::nn

#endif  // XIDS_CORE_NN_HPP_
