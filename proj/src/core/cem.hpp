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


// Contrastive explanations. A pertinent negative is a minimal nonnegative
// addition delta that moves x + delta to another class; a pertinent positive
// is a minimal part delta of x (0 <= delta <= x) that keeps the class. Both
// minimize an elastic-net penalized logit hinge with FISTA inside an outer
// search over the hinge weight c.

#ifndef XIDS_CORE_CEM_HPP_
#define XIDS_CORE_CEM_HPP_

#include <functional>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace xids::nn {
struct MlpModel;
}

namespace xids::cem {

enum class Mode { kPertinentNegative, kPertinentPositive };

const char* ModeName(Mode mode);  // "pn" | "pp"
Mode ParseMode(const std::string& name);

// Anything that exposes logits and the gradient of the logit margin.
struct DifferentiableModel {
  std::function<Vector(const Vector& x)> logits;
  // d (logit[t] - max_{j != t} logit[j]) / dx; fills `logits` when non-null.
  std::function<Vector(const Vector& x, int target, Vector* logits)> margin_gradient;
};

// The returned object borrows `model`.
DifferentiableModel FromMlp(const nn::MlpModel& model);

struct CemConfig {
  Mode mode = Mode::kPertinentNegative;
  double kappa = 0.0;
  double beta = 0.1;
  double c_init = 10.0;
  int c_search_steps = 9;
  int max_iterations = 1000;
  double step_size = 0.01;
  // Relative objective change below which an inner run counts as stalled;
  // 0 runs every iteration.
  double tolerance = 1e-7;
  int patience = 25;
  std::function<void()> budget;
  void Validate() const;
};

struct ChangedFeature {
  int index = 0;
  std::string name;
  double original = 0.0;
  double updated = 0.0;
};

struct Prediction {
  int predicted_class = 0;
  Vector probabilities;
};

struct ContrastiveResult {
  Mode mode = Mode::kPertinentNegative;
  Vector instance;
  // PN: the additive perturbation; PP: the retained instance.
  Vector delta;
  std::vector<ChangedFeature> changed_features;
  Prediction before;
  Prediction after;  // of x + delta (PN) or delta (PP)
  bool converged = false;
  double objective = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  // Diagnostics.
  double c_final = 0.0;
  int iterations = 0;
};

inline constexpr double kChangeThreshold = 1e-6;

ContrastiveResult Explain(const DifferentiableModel& model, const Vector& x, const CemConfig& config,
                          const std::vector<std::string>& feature_names = {});
ContrastiveResult PertinentNegative(const DifferentiableModel& model, const Vector& x, CemConfig config,
                                    const std::vector<std::string>& feature_names = {});
ContrastiveResult PertinentPositive(const DifferentiableModel& model, const Vector& x, CemConfig config,
                                    const std::vector<std::string>& feature_names = {});

struct BatchStats {
  Mode mode = Mode::kPertinentNegative;
  std::vector<std::string> feature_names;
  Vector frequency;   // share of results listing the feature as changed
  Vector mean_delta;  // mean of delta per feature
  std::vector<int> ranking;  // by frequency, then mean |delta|, then index
  double success_rate = 0.0;
  double mean_changed = 0.0;  // over converged results
  std::size_t count = 0;
};

BatchStats CemBatchStats(const std::vector<ContrastiveResult>& results,
                         const std::vector<std::string>& feature_names = {});

}  // namespace xids::cem

#endif  // XIDS_CORE_CEM_HPP_
