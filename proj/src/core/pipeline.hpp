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


// One function per CLI stage, each returning a report bundle, plus the
// explanation engine shared with the HTTP service.

#ifndef XIDS_CORE_PIPELINE_HPP_
#define XIDS_CORE_PIPELINE_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "core/brcg.hpp"
#include "core/cem.hpp"
#include "core/dataset.hpp"
#include "core/nn.hpp"
#include "core/report.hpp"

namespace xids::pipeline {

using report::Json;

struct RunContext {
  std::uint64_t seed = 42;
  int threads = 1;
};

// Wall-clock budget; Check() throws BudgetExceeded once the deadline passes.
class Deadline {
 public:
  Deadline() = default;  // unlimited
  explicit Deadline(double seconds);
  void Check() const;
  double remaining() const;  // seconds, +inf when unlimited
  bool limited() const { return limited_; }
  std::function<void()> AsCheck() const;

 private:
  bool limited_ = false;
  double seconds_ = 0.0;
  std::chrono::steady_clock::time_point end_;
};

// Options objects read from JSON; unknown keys are usage errors.
struct TrainOptions {
  int epochs = 100;
  double learning_rate = 0.01;
  int batch_size = 512;
  double dropout = 0.1;
  std::optional<std::uint64_t> seed;
  std::size_t subsample = 0;  // seeded subset of the training split, 0 = all
  std::vector<int> layers;    // empty = default architecture
  static TrainOptions FromJson(const Json& j);
  Json ToJson(const RunContext& ctx) const;
};

struct ShapOptions {
  std::size_t background = 100;
  int coalitions = 0;  // 0 = default for the width
  std::optional<std::uint64_t> seed;
  static ShapOptions FromJson(const Json& j);
  Json ToJson() const;
};

struct LimeOptions {
  int samples = 5000;
  int top_k = 10;
  double kernel_width = 0.0;
  double ridge_lambda = 1.0;
  std::optional<std::uint64_t> seed;
  static LimeOptions FromJson(const Json& j);
  Json ToJson() const;
};

struct CemOptions {
  cem::CemConfig config;
  static CemOptions FromJson(const Json& j);
  Json ToJson() const;
};

struct RulesOptions {
  brcg::BrcgConfig config;
  std::size_t subsample = 0;
  static RulesOptions FromJson(const Json& j);
  Json ToJson() const;
};

// Read-only model and dataset with derived state. Safe for concurrent use.
class Engine {
 public:
  Engine(std::shared_ptr<const nn::MlpModel> model, std::shared_ptr<const dataset::DatasetArtifact> data);

  const nn::MlpModel& model() const { return *model_; }
  const dataset::DatasetArtifact& data() const { return *data_; }
  const dataset::TrainStats& train_stats() const { return stats_; }
  const std::vector<std::string>& column_names() const { return columns_; }
  int width() const { return static_cast<int>(columns_.size()); }

  // Throws UsageError for unknown splits and out-of-range rows.
  Vector Instance(const std::string& split, std::size_t index) const;
  Json PredictJson(const Vector& x) const;
  // Attack-class probability per row.
  Vector AttackProbability(const Matrix& batch) const;

  // SHAP payload: attribution, force data, probabilities. When `deadline`
  // is limited the coalition count is lowered to fit the remaining time.
  Json ExplainShap(const Vector& x, const ShapOptions& options, std::uint64_t seed,
                   const Deadline& deadline = {}) const;
  shap::Attribution ShapAttribution(const Vector& x, const ShapOptions& options, std::uint64_t seed,
                                    const Deadline& deadline, int* coalitions_used, bool* reduced) const;
  Json ExplainLime(const Vector& x, const LimeOptions& options, std::uint64_t seed,
                   const Deadline& deadline = {}) const;
  cem::ContrastiveResult Contrast(const Vector& x, cem::Mode mode, const CemOptions& options,
                                  const Deadline& deadline = {}) const;
  Json Prototypes(const Vector& x, int m, double gamma, const Deadline& deadline = {}) const;

  // Model class per training row, computed once.
  const std::vector<int>& TrainPredictions() const;

 private:
  std::shared_ptr<const nn::MlpModel> model_;
  std::shared_ptr<const dataset::DatasetArtifact> data_;
  dataset::TrainStats stats_;
  std::vector<std::string> columns_;
  mutable std::once_flag predictions_once_;
  mutable std::vector<int> train_predictions_;
};

// Stages. Each returns a report bundle.
Json IngestReport(const dataset::DatasetArtifact& data, const RunContext& ctx);
Json DatasetSummaryReport(const dataset::DatasetArtifact& data, const RunContext& ctx);

struct TrainOutcome {
  nn::MlpModel model;
  Json report;
};
TrainOutcome TrainModel(const dataset::DatasetArtifact& data, const TrainOptions& options, const RunContext& ctx);
Json EvalReport(const nn::MlpModel& model, const dataset::DatasetArtifact& data, const std::string& split,
                const RunContext& ctx);

Json ExplainInstanceReport(const Engine& engine, const std::string& method, const std::string& split,
                           std::size_t index, const Json& options, const RunContext& ctx);
Json ExplainSummaryReport(const Engine& engine, const std::string& split, std::size_t count, const Json& options,
                          const RunContext& ctx);
Json ContrastReport(const Engine& engine, cem::Mode mode, const std::string& split, std::size_t index,
                    const Json& options, const RunContext& ctx);
// Runs contrast on `count` seeded rows of a split and aggregates them.
Json ContrastBatchReport(const Engine& engine, cem::Mode mode, const std::string& split, std::size_t count,
                         const Json& options, const RunContext& ctx);
Json PrototypesReport(const Engine& engine, const std::string& split, std::size_t index, int m,
                      const Json& options, const RunContext& ctx);

struct RulesOutcome {
  brcg::RuleSet rules;
  Json report;
};
RulesOutcome TrainRules(const dataset::DatasetArtifact& data, const RulesOptions& options, const RunContext& ctx);
Json RulesEvalReport(const brcg::RuleSet& rules, const dataset::DatasetArtifact& data, const std::string& split,
                     const RunContext& ctx);

// Seeded sample of `count` distinct row indices in [0, n), ascending.
std::vector<std::size_t> SampleRows(std::size_t n, std::size_t count, std::uint64_t seed);

}  // namespace xids::pipeline

#endif  // XIDS_CORE_PIPELINE_HPP_
