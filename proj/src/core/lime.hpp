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


// Local surrogate explanations. Samples are drawn around the instance in
// the normalized input space, weighted by an exponential proximity kernel and
// fit with a weighted ridge model; the largest coefficients are reported.

#ifndef XIDS_CORE_LIME_HPP_
#define XIDS_CORE_LIME_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/dataset.hpp"
#include "core/shap.hpp"

namespace xids::lime {

struct LimeConfig {
  int n_samples = 5000;
  double kernel_width = 0.0;  // 0 selects 0.75 * sqrt(d)
  int top_k = 10;
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;
  shap::BudgetCheck budget;
  void Validate(int features) const;
};

struct PerturbationSet {
  Matrix samples;  // n x d, row 0 is the instance
  Matrix mask;     // 1 where the sample keeps the instance value
};

// Columns outside one-hot groups and binary columns get Gaussian noise with
// the column's training stddev, clipped to [0, 1]. One-hot groups and binary
// columns are, with probability 0.5, redrawn from the training marginals.
PerturbationSet Perturb(const Vector& x, const dataset::TrainStats& stats, int n, std::uint64_t seed);

shap::Attribution ExplainLime(const shap::ModelFn& model, const Vector& x, const dataset::TrainStats& stats,
                              const LimeConfig& config, std::vector<std::string> feature_names = {});

// Weighted coefficient of determination of predictions against y.
double WeightedR2(const Vector& y, const Vector& predicted, const Vector& weights);

}  // namespace xids::lime

#endif  // XIDS_CORE_LIME_HPP_
