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


// Prototype selection with nonnegative importance weights. Greedy forward
// selection on l(w) = w.mu - w'Kw / 2 under a Gaussian RBF kernel, where mu_j
// is candidate j's mean similarity to the target rows; the weights of the
// selected set are re-optimized exactly after every step.

#ifndef XIDS_CORE_PROTODASH_HPP_
#define XIDS_CORE_PROTODASH_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/dataset.hpp"

namespace xids::protodash {

struct KernelConfig {
  double gamma = 0.0;  // 0 selects 1 / d
  double Resolve(int d) const;
};

double RbfKernel(const Vector& a, const Vector& b, double gamma);

// mu_j = mean_r exp(-gamma ||candidate_j - target_r||^2).
Vector MeanSimilarity(const Matrix& candidates, const Matrix& target, double gamma);

struct PrototypeSet {
  std::vector<std::size_t> indices;  // into the candidate pool, selection order
  Vector weights;
  std::vector<double> objective_trace;  // l(w) after each greedy step
  std::string pool_fingerprint;
  double gamma = 0.0;
  bool jittered = false;  // singular kernel block regularized
};

PrototypeSet SelectPrototypes(const Matrix& candidates, const Matrix& target, int m,
                              const KernelConfig& kernel = {}, const std::function<void()>& budget = {});

// l(w) on the selected set (kernel recomputed from the pool).
double PrototypeObjective(const Matrix& candidates, const Matrix& target, const PrototypeSet& set);

// Per-feature similarity exp(-(x_i - p_i)^2 / (2 sigma_i^2)), sigma floored
// at 1e-6.
Vector SimilarityProfile(const Vector& prototype, const Vector& x, const Vector& stddev);

struct Neighbor {
  std::size_t train_index = 0;
  double weight = 0.0;
  int predicted_class = 0;
  int label = 0;
  std::string raw_label;
  Vector values;
  Vector similarity;
};

struct NeighborTable {
  Vector query;
  int query_class = 0;
  std::size_t pool_size = 0;
  std::vector<Neighbor> neighbors;  // descending weight
  PrototypeSet prototypes;
};

// Candidates are the training rows whose predicted class equals
// `query_class`; `train_predictions` holds the model's class per train row.
NeighborTable ExplainByPrototypes(const dataset::EncodedMatrix& train, const std::vector<int>& train_predictions,
                                  const dataset::TrainStats& stats, const Vector& x, int query_class, int m,
                                  const KernelConfig& kernel = {}, const std::function<void()>& budget = {});

}  // namespace xids::protodash

#endif  // XIDS_CORE_PROTODASH_HPP_
