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

// Model-agnostic KernelSHAP and the data products built on attributions
// (global summary, single-instance force data, stacked force data).
//
// The value of a coalition S is the model output averaged over the background
// rows with the features in S replaced by the explained instance's values.
// Shapley values are the solution of a Shapley-kernel weighted least squares
// problem over coalition masks, constrained so that they sum to
// f(x) - E[f(background)].

#ifndef XIDS_CORE_SHAP_HPP_
#define XIDS_CORE_SHAP_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace xids::shap {

// Maps a batch (one instance per row) to the explained scalar output per row.
using ModelFn = std::function<Vector(const Matrix& batch)>;
// Invoked between evaluation batches; may throw BudgetExceeded.
using BudgetCheck = std::function<void()>;

struct Attribution {
  std::string method = "shap";  // "shap" | "lime"
  std::vector<std::string> feature_names;
  Vector instance;
  Vector phi;
  double base_value = 0.0;
  double model_output = 0.0;
  int target_class = 1;
  // Diagnostics.
  int coalitions = 0;
  bool exhaustive = false;
  int background_size = 0;
  double surrogate_r2 = 0.0;  // lime only
};

struct BackgroundSet {
  Matrix rows;
  std::vector<std::size_t> indices;  // rows of the source matrix
  std::uint64_t seed = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
};

// Uniform sample without replacement (all rows when size >= source rows).
BackgroundSet SampleBackground(const RowMatrixF& source, std::size_t size, std::uint64_t seed);

inline constexpr int kMaxExhaustiveFeatures = 15;

struct KernelShapOptions {
  // 0 selects 2d + 2048 (exhaustive enumeration when d <= 15).
  int n_coalitions = 0;
  bool force_exhaustive = false;
  double ridge_lambda = 1e-6;  // sampled coalitions only
  std::uint64_t seed = 0;
  std::size_t max_batch_rows = 16384;
  BudgetCheck budget;
};

int DefaultCoalitions(int features);

Attribution KernelShap(const ModelFn& model, const Vector& x, const BackgroundSet& background,
                       const KernelShapOptions& options, std::vector<std::string> feature_names = {});

struct SummaryData {
  std::vector<std::string> feature_names;
  std::vector<int> ranking;       // feature indices, most important first
  Vector mean_abs_phi;
  // Per feature: (instance value, phi) across all explained instances.
  std::vector<std::vector<std::pair<double, double>>> points;
  std::size_t instances = 0;
};

SummaryData GlobalSummary(const std::vector<Attribution>& attributions);

struct ForceSegment {
  int feature = 0;
  std::string name;
  double value = 0.0;
  double phi = 0.0;
};

struct ForcePlotData {
  double base_value = 0.0;
  double model_output = 0.0;
  std::vector<ForceSegment> positive;  // descending phi
  std::vector<ForceSegment> negative;  // ascending phi
};

ForcePlotData ForceData(const Attribution& attribution);

struct StackedColumn {
  std::size_t attribution = 0;  // index into the input list
  std::string group;
  double model_output = 0.0;
  double base_value = 0.0;
  Vector phi;
};

struct StackedGroup {
  std::string label;
  std::size_t start = 0;
  std::size_t count = 0;
};

struct StackedForceData {
  std::vector<std::string> feature_names;
  std::vector<StackedColumn> columns;
  std::vector<StackedGroup> groups;
};

// Groups keep the order of first appearance; within a group columns are
// ordered by model output, descending.
StackedForceData StackedForce(const std::vector<Attribution>& attributions,
                              const std::vector<std::string>& group_labels);

}  // namespace xids::shap

#endif  // XIDS_CORE_SHAP_HPP_
