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

#include "core/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/dataset.hpp"

namespace xids::nn {

namespace {

constexpr Eigen::Index kChunkRows = 2048;

void RoundToFloat(MlpModel* model) {
  for (auto& layer : model->layers) {
    layer.weights = layer.weights.cast<float>().cast<double>();
    layer.bias = layer.bias.cast<float>().cast<double>();
  }
}

void CheckInput(const MlpModel& model, Eigen::Index cols) {
  if (cols != model.input_size()) {
    throw UsageError("input has " + std::to_string(cols) + " columns, model expects " +
                     std::to_string(model.input_size()));
  }
}

Matrix SoftmaxRows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Matrix Gather(const RowMatrixF& rows, const std::vector<std::size_t>& order, std::size_t begin,
              std::size_t end) {
  Matrix out(static_cast<Eigen::Index>(end - begin), rows.cols());
  for (std::size_t i = begin; i < end; ++i) {
    out.row(static_cast<Eigen::Index>(i - begin)) =
        rows.row(static_cast<Eigen::Index>(order[i])).cast<double>();
  }
  return out;
}

// Cross-entropy of softmax(logits) and its logit gradient (already divided by
// the batch size). Returns the summed (not mean) loss.
double CrossEntropy(const Matrix& logits, const std::vector<int>& labels, Matrix* dlogits,
                    std::size_t* correct) {
  double total = 0;
  const Eigen::Index n = logits.rows();
  if (dlogits) dlogits->resize(n, logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    const double z = e.sum();
    const int y = labels[static_cast<std::size_t>(i)];
    total += std::log(z) + m - logits(i, y);
    if (dlogits) {
      dlogits->row(i) = e / z;
      (*dlogits)(i, y) -= 1.0;
    }
    if (correct) {
      Eigen::Index arg = 0;
      logits.row(i).maxCoeff(&arg);
      if (arg == y) ++*correct;
    }
  }
  if (dlogits) *dlogits /= static_cast<double>(n);
  return total;
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

std::string MlpModel::fingerprint() const {
  Fnv1a h;
  for (int s : layer_sizes) h.Update(&s, sizeof(s));
  for (const auto& l : layers) {
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) {
      const float v = static_cast<float>(l.weights.data()[i]);
      h.Update(&v, sizeof(v));
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) {
      const float v = static_cast<float>(l.bias[i]);
      h.Update(&v, sizeof(v));
    }
  }
  return h.HexDigest();
}

MlpModel InitModel(const std::vector<int>& layer_sizes, double dropout_rate, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw UsageError("a model needs at least an input and an output layer");
  for (int s : layer_sizes) {
    if (s < 1) throw UsageError("layer sizes must be >= 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw UsageError("dropout rate must be in [0,1)");
  MlpModel model;
  model.layer_sizes = layer_sizes;
  model.dropout_rate = dropout_rate;
  model.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    Layer layer;
    layer.weights.resize(fan_in, fan_out);
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = normal(rng);
    layer.bias = Vector::Zero(fan_out);
    model.layers.push_back(std::move(layer));
  }
  RoundToFloat(&model);
  return model;
}

Matrix Logits(const MlpModel& model, const Matrix& batch) {
  CheckInput(model, batch.cols());
  Matrix a = batch;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Matrix z = a * layer.weights;
    z.rowwise() += layer.bias.transpose();
    if (l + 1 < model.layers.size()) {
      a = z.cwiseMax(0.0);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Matrix Forward(const MlpModel& model, const Matrix& batch) {
  CheckInput(model, batch.cols());
  Matrix out(batch.rows(), model.output_size());
  for (Eigen::Index start = 0; start < batch.rows(); start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, batch.rows() - start);
    out.middleRows(start, len) = SoftmaxRows(Logits(model, batch.middleRows(start, len)));
  }
  return out;
}

Matrix ForwardRows(const MlpModel& model, const RowMatrixF& rows) {
  CheckInput(model, rows.cols());
  Matrix out(rows.rows(), model.output_size());
  for (Eigen::Index start = 0; start < rows.rows(); start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, rows.rows() - start);
    const Matrix chunk = rows.middleRows(start, len).cast<double>();
    out.middleRows(start, len) = SoftmaxRows(Logits(model, chunk));
  }
  return out;
}

Vector LogitsOf(const MlpModel& model, const Vector& x) {
  return Logits(model, x.transpose()).row(0).transpose();
}

Vector PredictProba(const MlpModel& model, const Vector& x) {
  return SoftmaxRows(Logits(model, x.transpose())).row(0).transpose();
}

int PredictClass(const MlpModel& model, const Vector& x) {
  Eigen::Index arg = 0;
  LogitsOf(model, x).maxCoeff(&arg);
  return static_cast<int>(arg);
}

std::vector<int> PredictClasses(const MlpModel& model, const RowMatrixF& rows) {
  const Matrix p = ForwardRows(model, rows);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index arg = 0;
    p.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

namespace {

// Backpropagates `cotangent` (one entry per logit) to the input. `logits`
// receives the forward outputs.
Vector BackpropToInput(const MlpModel& model, const Vector& x,
                       const std::function<Vector(const Vector&)>& cotangent, Vector* logits) {
  CheckInput(model, x.size());
  std::vector<Vector> acts;
  acts.push_back(x);
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    acts.push_back((layer.weights.transpose() * acts.back() + layer.bias).cwiseMax(0.0));
  }
  const auto& head = model.layers.back();
  const Vector out = head.weights.transpose() * acts.back() + head.bias;
  if (logits) *logits = out;
  Vector g = head.weights * cotangent(out);
  for (std::size_t l = model.layers.size() - 1; l-- > 0;) {
    const Vector& a = acts[l + 1];
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (a[i] <= 0.0) g[i] = 0.0;
    }
    g = model.layers[l].weights * g;
  }
  return g;
}

}  // namespace

Vector InputGradient(const MlpModel& model, const Vector& x, int target_class) {
  if (target_class < 0 || target_class >= model.output_size()) {
    throw UsageError("target class " + std::to_string(target_class) + " out of range");
  }
  return BackpropToInput(
      model, x,
      [&](const Vector& out) {
        Vector e = Vector::Zero(out.size());
        e[target_class] = 1.0;
        return e;
      },
      nullptr);
}

Vector MarginGradient(const MlpModel& model, const Vector& x, int target_class, Vector* logits) {
  if (target_class < 0 || target_class >= model.output_size() || model.output_size() < 2) {
    throw UsageError("target class " + std::to_string(target_class) + " out of range");
  }
  return BackpropToInput(
      model, x,
      [&](const Vector& out) {
        Vector e = Vector::Zero(out.size());
        e[target_class] = 1.0;
        e[RunnerUp(out, target_class)] -= 1.0;
        return e;
      },
      logits);
}

int RunnerUp(const Vector& logits, int target_class) {
  int best = -1;
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    if (j == target_class) continue;
    if (best < 0 || logits[j] > logits[best]) best = static_cast<int>(j);
  }
  return best;
}

double LossAndGradients(const MlpModel& model, const Matrix& batch, const std::vector<int>& labels,
                        Gradients* grads) {
  CheckInput(model, batch.cols());
  const std::size_t depth = model.layers.size();
  std::vector<Matrix> acts;
  acts.push_back(batch);
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix z = acts.back() * model.layers[l].weights;
    z.rowwise() += model.layers[l].bias.transpose();
    acts.push_back(l + 1 < depth ? Matrix(z.cwiseMax(0.0)) : z);
  }
  Matrix dz;
  const double loss =
      CrossEntropy(acts.back(), labels, grads ? &dz : nullptr, nullptr) / static_cast<double>(batch.rows());
  if (!grads) return loss;
  grads->weights.assign(depth, Matrix());
  grads->biases.assign(depth, Vector());
  for (std::size_t l = depth; l-- > 0;) {
    grads->weights[l] = acts[l].transpose() * dz;
    grads->biases[l] = dz.colwise().sum().transpose();
    if (l == 0) break;
    Matrix da = dz * model.layers[l].weights.transpose();
    dz = (acts[l].array() > 0.0).select(da.array(), 0.0).matrix();
  }
  return loss;
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0)) throw UsageError("learning rate must be > 0");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw UsageError("dropout rate must be in [0,1)");
}

TrainResult Train(MlpModel model, const RowMatrixF& inputs, const std::vector<int>& labels,
                  const TrainConfig& config) {
  config.Validate();
  CheckInput(model, inputs.cols());
  const std::size_t n = static_cast<std::size_t>(inputs.rows());
  if (n == 0) throw DataError("training data is empty");
  if (labels.size() != n) throw DataError("label count does not match row count");
  for (int y : labels) {
    if (y < 0 || y >= model.output_size()) throw DataError("label out of range for the output layer");
  }
  TrainResult result;
  model.dropout_rate = config.dropout_rate;
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }

  const std::size_t depth = model.layers.size();
  std::vector<Matrix> m_w(depth), v_w(depth);
  std::vector<Vector> m_b(depth), v_b(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    m_w[l] = v_w[l] = Matrix::Zero(model.layers[l].weights.rows(), model.layers[l].weights.cols());
    m_b[l] = v_b[l] = Vector::Zero(model.layers[l].bias.size());
  }
  std::mt19937_64 rng(config.rng_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double keep = 1.0 - config.dropout_rate;
  const double scale = 1.0 / keep;
  std::uint64_t step = 0;
  std::vector<Matrix> acts(depth + 1);
  std::vector<int> batch_labels;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(n, begin + static_cast<std::size_t>(config.batch_size));
      acts[0] = Gather(inputs, order, begin, end);
      batch_labels.clear();
      for (std::size_t i = begin; i < end; ++i) batch_labels.push_back(labels[order[i]]);

      for (std::size_t l = 0; l < depth; ++l) {
        Matrix z = acts[l] * model.layers[l].weights;
        z.rowwise() += model.layers[l].bias.transpose();
        if (l + 1 == depth) {
          acts[l + 1] = std::move(z);
          break;
        }
        z = z.cwiseMax(0.0);
        if (config.dropout_rate > 0) {
          for (Eigen::Index i = 0; i < z.size(); ++i) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            z.data()[i] = u < keep ? z.data()[i] * scale : 0.0;
          }
        }
        acts[l + 1] = std::move(z);
      }
      Matrix dz;
      const double batch_loss = CrossEntropy(acts[depth], batch_labels, &dz, &correct);
      if (!std::isfinite(batch_loss)) {
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += batch_loss;

      ++step;
      const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
      const double lr = config.learning_rate;
      auto adam = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * g;
        v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + config.adam_epsilon);
      };
      for (std::size_t l = depth; l-- > 0;) {
        const Matrix gw = acts[l].transpose() * dz;
        const Vector gb = dz.colwise().sum().transpose();
        if (l > 0) {
          Matrix da = dz * model.layers[l].weights.transpose();
          // Dropped units and inactive rectifiers both hold exactly zero.
          dz = (acts[l].array() > 0.0)
                   .select(da.array() * (config.dropout_rate > 0 ? scale : 1.0), 0.0)
                   .matrix();
        }
        adam(model.layers[l].weights, m_w[l], v_w[l], gw);
        adam(model.layers[l].bias, m_b[l], v_b[l], gb);
      }
    }
    const double mean_loss = epoch_loss / static_cast<double>(n);
    if (!std::isfinite(mean_loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1));
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(n);
    result.history.loss.push_back(mean_loss);
    result.history.accuracy.push_back(accuracy);
    if (config.on_epoch) config.on_epoch(epoch + 1, mean_loss, accuracy);
  }
  RoundToFloat(&model);
  result.model = std::move(model);
  return result;
}

TrainResult Train(MlpModel model, const dataset::EncodedMatrix& data, const TrainConfig& config) {
  return Train(std::move(model), data.values, data.labels, config);
}

Metrics MetricsFromCounts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  const double total = static_cast<double>(m.total());
  m.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
  m.precision_defined = tp + fp > 0;
  m.recall_defined = tp + fn > 0;
  m.precision = m.precision_defined ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = m.recall_defined ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

Metrics MetricsFromPredictions(const std::vector<int>& predicted, const std::vector<int>& labels) {
  if (predicted.size() != labels.size()) throw UsageError("prediction/label length mismatch");
  if (labels.empty()) throw DataError("cannot evaluate on empty data");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predicted[i] == 1, y = labels[i] == 1;
    if (p && y) ++tp;
    else if (p && !y) ++fp;
    else if (!p && y) ++fn;
    else ++tn;
  }
  return MetricsFromCounts(tp, fp, tn, fn);
}

Metrics Evaluate(const MlpModel& model, const dataset::EncodedMatrix& data) {
  if (data.rows() == 0) throw DataError("cannot evaluate on empty data");
  return MetricsFromPredictions(PredictClasses(model, data.values), data.labels);
}

}  // namespace xids::nn
