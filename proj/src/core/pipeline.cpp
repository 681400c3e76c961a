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


#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "core/lime.hpp"
#include "core/protodash.hpp"
#include "core/shap.hpp"

namespace xids::pipeline {

// ---------------------------------------------------------------------------
// Deadline

Deadline::Deadline(double seconds) : limited_(true), seconds_(seconds) {
  if (!(seconds > 0)) throw UsageError("budget must be > 0 seconds");
  end_ = std::chrono::steady_clock::now() +
         std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
}

void Deadline::Check() const {
  if (limited_ && std::chrono::steady_clock::now() > end_) {
    std::ostringstream msg;
    msg << "compute budget of " << seconds_ << " s exceeded";
    throw BudgetExceeded(msg.str());
  }
}

double Deadline::remaining() const {
  if (!limited_) return std::numeric_limits<double>::infinity();
  return std::chrono::duration<double>(end_ - std::chrono::steady_clock::now()).count();
}

std::function<void()> Deadline::AsCheck() const {
  if (!limited_) return {};
  const Deadline copy = *this;
  return [copy] { copy.Check(); };
}

// ---------------------------------------------------------------------------
// Options

namespace {

class OptionReader {
 public:
  explicit OptionReader(const Json& j, const char* what) : j_(j), what_(what) {
    if (!j.is_null() && !j.is_object()) throw UsageError(std::string(what) + " options must be a JSON object");
  }

  template <typename T>
  void Read(const char* key, T* out) {
    used_.insert(key);
    if (j_.is_null()) return;
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) Bad(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) Bad(key, "an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned() && it->template get<std::int64_t>() < 0) {
          Bad(key, "a nonnegative integer");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) Bad(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) Bad(key, "a string");
    }
    *out = it->template get<T>();
  }

  void ReadSeed(const char* key, std::optional<std::uint64_t>* out) {
    std::uint64_t v = 0;
    used_.insert(key);
    if (j_.is_null() || !j_.contains(key) || j_[key].is_null()) return;
    Read(key, &v);
    *out = v;
  }

  void ReadInts(const char* key, std::vector<int>* out) {
    used_.insert(key);
    if (j_.is_null() || !j_.contains(key) || j_[key].is_null()) return;
    const Json& a = j_[key];
    if (!a.is_array()) Bad(key, "an array of integers");
    out->clear();
    for (const auto& v : a) {
      if (!v.is_number_integer()) Bad(key, "an array of integers");
      out->push_back(v.get<int>());
    }
  }

  void Finish() const {
    if (j_.is_null()) return;
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw UsageError(std::string("unknown ") + what_ + " option '" + key + "'");
    }
  }

 private:
  [[noreturn]] void Bad(const char* key, const char* type) const {
    throw UsageError(std::string(what_) + " option '" + key + "' must be " + type);
  }

  const Json& j_;
  const char* what_;
  std::set<std::string> used_;
};

Json SeedJson(const std::optional<std::uint64_t>& seed) { return seed ? Json(*seed) : Json(); }

}  // namespace

TrainOptions TrainOptions::FromJson(const Json& j) {
  TrainOptions o;
  OptionReader r(j, "train");
  r.Read("epochs", &o.epochs);
  r.Read("learning_rate", &o.learning_rate);
  r.Read("batch_size", &o.batch_size);
  r.Read("dropout", &o.dropout);
  r.ReadSeed("seed", &o.seed);
  r.Read("subsample", &o.subsample);
  r.ReadInts("layers", &o.layers);
  r.Finish();
  return o;
}

Json TrainOptions::ToJson(const RunContext& ctx) const {
  return {{"epochs", epochs},       {"learning_rate", learning_rate},
          {"batch_size", batch_size}, {"dropout", dropout},
          {"seed", seed.value_or(ctx.seed)}, {"subsample", subsample},
          {"layers", layers.empty() ? nn::DefaultLayerSizes() : layers}};
}

ShapOptions ShapOptions::FromJson(const Json& j) {
  ShapOptions o;
  OptionReader r(j, "shap");
  r.Read("background", &o.background);
  r.Read("coalitions", &o.coalitions);
  r.ReadSeed("seed", &o.seed);
  r.Finish();
  if (o.background < 1) throw UsageError("shap option 'background' must be >= 1");
  if (o.coalitions < 0) throw UsageError("shap option 'coalitions' must be >= 0");
  return o;
}

Json ShapOptions::ToJson() const {
  return {{"background", background}, {"coalitions", coalitions}, {"seed", SeedJson(seed)}};
}

LimeOptions LimeOptions::FromJson(const Json& j) {
  LimeOptions o;
  OptionReader r(j, "lime");
  r.Read("samples", &o.samples);
  r.Read("top_k", &o.top_k);
  r.Read("kernel_width", &o.kernel_width);
  r.Read("ridge_lambda", &o.ridge_lambda);
  r.ReadSeed("seed", &o.seed);
  r.Finish();
  return o;
}

Json LimeOptions::ToJson() const {
  return {{"samples", samples},
          {"top_k", top_k},
          {"kernel_width", kernel_width},
          {"ridge_lambda", ridge_lambda},
          {"seed", SeedJson(seed)}};
}

CemOptions CemOptions::FromJson(const Json& j) {
  CemOptions o;
  OptionReader r(j, "contrast");
  r.Read("kappa", &o.config.kappa);
  r.Read("beta", &o.config.beta);
  r.Read("c_init", &o.config.c_init);
  r.Read("c_search_steps", &o.config.c_search_steps);
  r.Read("max_iterations", &o.config.max_iterations);
  r.Read("step_size", &o.config.step_size);
  r.Read("tolerance", &o.config.tolerance);
  r.Read("patience", &o.config.patience);
  r.Finish();
  o.config.Validate();
  return o;
}

Json CemOptions::ToJson() const {
  return {{"kappa", config.kappa},
          {"beta", config.beta},
          {"c_init", config.c_init},
          {"c_search_steps", config.c_search_steps},
          {"max_iterations", config.max_iterations},
          {"step_size", config.step_size},
          {"tolerance", config.tolerance},
          {"patience", config.patience}};
}

RulesOptions RulesOptions::FromJson(const Json& j) {
  RulesOptions o;
  OptionReader r(j, "rules");
  r.Read("degree", &o.config.max_degree);
  r.Read("beam_width", &o.config.beam_width);
  r.Read("max_iterations", &o.config.max_iterations);
  r.Read("lambda0", &o.config.lambda0);
  r.Read("lambda1", &o.config.lambda1);
  r.Read("quantiles", &o.config.quantiles);
  r.Read("columns_per_iteration", &o.config.columns_per_iteration);
  r.Read("subsample", &o.subsample);
  r.Finish();
  o.config.Validate();
  return o;
}

Json RulesOptions::ToJson() const {
  return {{"degree", config.max_degree},
          {"beam_width", config.beam_width},
          {"max_iterations", config.max_iterations},
          {"lambda0", config.lambda0},
          {"lambda1", config.lambda1},
          {"quantiles", config.quantiles},
          {"columns_per_iteration", config.columns_per_iteration},
          {"subsample", subsample}};
}

std::vector<std::size_t> SampleRows(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (count >= n) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// ---------------------------------------------------------------------------
// Engine

namespace {

constexpr std::uint64_t kCoalitionSeedMix = 0x9e3779b97f4a7c15ULL;

Json ProbabilityJson(const Vector& p) { return report::VectorJson(p); }

}  // namespace

Engine::Engine(std::shared_ptr<const nn::MlpModel> model, std::shared_ptr<const dataset::DatasetArtifact> data)
    : model_(std::move(model)), data_(std::move(data)) {
  if (!model_ || !data_) throw UsageError("engine needs a model and a dataset");
  if (!data_->has_split("train")) throw DataError("dataset artifact has no train split");
  columns_ = data_->schema.column_names();
  if (model_->input_size() != static_cast<int>(columns_.size())) {
    throw DataError("model expects " + std::to_string(model_->input_size()) + " inputs, dataset has " +
                    std::to_string(columns_.size()) + " columns");
  }
  stats_ = dataset::ComputeTrainStats(data_->split("train"), data_->schema);
}

Vector Engine::Instance(const std::string& split, std::size_t index) const {
  if (!data_->has_split(split)) throw UsageError("unknown split '" + split + "'");
  const auto& m = data_->split(split);
  if (index >= m.rows()) {
    throw UsageError("index " + std::to_string(index) + " out of range for split '" + split + "' (" +
                     std::to_string(m.rows()) + " rows)");
  }
  return m.row(index);
}

Vector Engine::AttackProbability(const Matrix& batch) const {
  return nn::Forward(*model_, batch).col(model_->output_size() - 1);
}

Json Engine::PredictJson(const Vector& x) const {
  const Vector p = nn::PredictProba(*model_, x);
  Eigen::Index cls = 0;
  p.maxCoeff(&cls);
  return {{"probabilities", ProbabilityJson(p)}, {"class", static_cast<int>(cls)}};
}

shap::Attribution Engine::ShapAttribution(const Vector& x, const ShapOptions& options, std::uint64_t seed,
                                          const Deadline& deadline, int* coalitions_used, bool* reduced) const {
  const auto& train = data_->split("train");
  const shap::BackgroundSet bg = shap::SampleBackground(train.values, options.background, seed);
  const int d = width();
  int requested = options.coalitions;
  if (requested == 0) {
    requested = d <= shap::kMaxExhaustiveFeatures ? (1 << d) : shap::DefaultCoalitions(d);
  }
  *reduced = false;
  if (deadline.limited()) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)AttackProbability(bg.rows);
    const double elapsed = std::max(1e-6, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    const double rows_per_second = static_cast<double>(bg.size()) / elapsed;
    const double affordable = 0.6 * deadline.remaining() * rows_per_second / static_cast<double>(bg.size());
    if (affordable < requested) {
      requested = std::max(d + 2, static_cast<int>(affordable));
      *reduced = true;
    }
  }
  shap::KernelShapOptions so;
  so.seed = seed ^ kCoalitionSeedMix;
  so.budget = deadline.AsCheck();
  so.max_batch_rows = 8192;
  if (d <= shap::kMaxExhaustiveFeatures && requested >= (1 << d)) {
    so.n_coalitions = 0;
  } else {
    so.n_coalitions = requested;
  }
  auto fn = [this](const Matrix& b) { return AttackProbability(b); };
  shap::Attribution attr = shap::KernelShap(fn, x, bg, so, columns_);
  *coalitions_used = attr.coalitions;
  return attr;
}

Json Engine::ExplainShap(const Vector& x, const ShapOptions& options, std::uint64_t seed,
                         const Deadline& deadline) const {
  int used = 0;
  bool reduced = false;
  const shap::Attribution attr = ShapAttribution(x, options, seed, deadline, &used, &reduced);
  Json j;
  j["attribution"] = report::AttributionJson(attr);
  j["force"] = report::ForceJson(shap::ForceData(attr));
  const Json pred = PredictJson(x);
  j["probabilities"] = pred["probabilities"];
  j["predicted_class"] = pred["class"];
  j["budget"] = {{"coalitions", used}, {"reduced", reduced}};
  return j;
}

Json Engine::ExplainLime(const Vector& x, const LimeOptions& options, std::uint64_t seed,
                         const Deadline& deadline) const {
  lime::LimeConfig cfg;
  cfg.n_samples = options.samples;
  cfg.top_k = options.top_k;
  cfg.kernel_width = options.kernel_width;
  cfg.ridge_lambda = options.ridge_lambda;
  cfg.seed = seed;
  cfg.budget = deadline.AsCheck();
  auto fn = [this](const Matrix& b) { return AttackProbability(b); };
  const shap::Attribution attr = lime::ExplainLime(fn, x, stats_, cfg, columns_);
  Json j;
  j["attribution"] = report::AttributionJson(attr);
  const Json pred = PredictJson(x);
  j["probabilities"] = pred["probabilities"];
  j["predicted_class"] = pred["class"];
  std::vector<int> order;
  for (Eigen::Index k = 0; k < attr.phi.size(); ++k) {
    if (attr.phi[k] != 0.0) order.push_back(static_cast<int>(k));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(attr.phi[a]) > std::abs(attr.phi[b]); });
  Json attack = Json::array(), normal = Json::array();
  for (int k : order) {
    Json e{{"index", k}, {"name", columns_[static_cast<std::size_t>(k)]}, {"value", x[k]}, {"weight", attr.phi[k]}};
    (attr.phi[k] > 0 ? attack : normal).push_back(e);
  }
  j["contributions"] = {{"attack", attack}, {"normal", normal}};
  return j;
}

cem::ContrastiveResult Engine::Contrast(const Vector& x, cem::Mode mode, const CemOptions& options,
                                        const Deadline& deadline) const {
  cem::CemConfig cfg = options.config;
  cfg.mode = mode;
  cfg.budget = deadline.AsCheck();
  return cem::Explain(cem::FromMlp(*model_), x, cfg, columns_);
}

const std::vector<int>& Engine::TrainPredictions() const {
  std::call_once(predictions_once_, [this] { train_predictions_ = nn::PredictClasses(*model_, data_->split("train").values); });
  return train_predictions_;
}

Json Engine::Prototypes(const Vector& x, int m, double gamma, const Deadline& deadline) const {
  if (m < 1) throw UsageError("prototype count m must be >= 1");
  protodash::KernelConfig kernel;
  kernel.gamma = gamma;
  const int cls = nn::PredictClass(*model_, x);
  const auto& preds = TrainPredictions();
  deadline.Check();
  const auto table = protodash::ExplainByPrototypes(data_->split("train"), preds, stats_, x, cls, m, kernel,
                                                    deadline.AsCheck());
  return report::NeighborTableJson(table, columns_, &data_->raw("train"));
}

// ---------------------------------------------------------------------------
// Stages

namespace {

Json SplitCounts(const dataset::EncodedMatrix& m, const std::string& name) {
  std::size_t attack = 0;
  for (int v : m.labels) attack += v == 1 ? 1 : 0;
  return {{"name", name}, {"rows", m.rows()}, {"attack", attack}, {"normal", m.rows() - attack}};
}

dataset::RecordTable TableFromLines(const std::vector<std::string>& lines, const std::string& name) {
  dataset::RecordTable t;
  t.source_name = name;
  for (std::size_t i = 0; i < lines.size(); ++i) t.rows.push_back(dataset::ParseRecordLine(lines[i], i + 1));
  return t;
}

Json InstanceJson(const dataset::DatasetArtifact& data, const std::string& split, std::size_t index) {
  const auto& m = data.split(split);
  Json j{{"split", split}, {"index", index}, {"label", m.labels[index]}};
  if (index < m.raw_labels.size()) j["raw_label"] = m.raw_labels[index];
  const auto& raw = data.raw(split);
  if (index < raw.size()) j["raw"] = raw[index];
  return j;
}

Json BaseConfig(const std::string& stage, const Engine* engine, const dataset::DatasetArtifact& data) {
  Json c{{"stage", stage}, {"schema_id", data.schema.fingerprint()}};
  if (engine) c["model_fingerprint"] = engine->model().fingerprint();
  return c;
}

std::string TopFeature(const Json& attribution) {
  const Json& phi = attribution["phi"];
  std::size_t best = 0;
  double best_abs = -1;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double a = std::abs(phi[k].get<double>());
    if (a > best_abs) {
      best_abs = a;
      best = k;
    }
  }
  return attribution["feature_names"].empty() ? std::to_string(best) : attribution["feature_names"][best].get<std::string>();
}

dataset::EncodedMatrix MaybeSubsample(const dataset::EncodedMatrix& m, std::size_t subsample, std::uint64_t seed) {
  if (subsample == 0 || subsample >= m.rows()) return m;
  return m.Subset(SampleRows(m.rows(), subsample, seed));
}

}  // namespace

Json IngestReport(const dataset::DatasetArtifact& data, const RunContext& ctx) {
  Json payload;
  payload["schema"] = report::SchemaJson(data.schema);
  Json splits = Json::array();
  for (std::size_t s = 0; s < data.split_names.size(); ++s) splits.push_back(SplitCounts(data.splits[s], data.split_names[s]));
  payload["splits"] = splits;
  // Categories seen outside the training vocabulary encode as all-zero groups.
  Json unseen = Json::object();
  const auto& features = data.schema.features;
  for (std::size_t s = 0; s < data.split_names.size(); ++s) {
    if (data.split_names[s] == "train") continue;
    for (std::size_t i = 0; i < data.raw_lines[s].size(); ++i) {
      const dataset::Record rec = dataset::ParseRecordLine(data.raw_lines[s][i], i + 1);
      for (std::size_t f = 0; f < features.size(); ++f) {
        if (features[f].kind != dataset::FeatureKind::kCategorical) continue;
        const auto& vocab = data.schema.vocab.at(features[f].name);
        if (std::find(vocab.begin(), vocab.end(), rec.text[f]) != vocab.end()) continue;
        Json& list = unseen[data.split_names[s]][features[f].name];
        if (std::find(list.begin(), list.end(), rec.text[f]) == list.end()) list.push_back(rec.text[f]);
      }
    }
  }
  payload["unseen_categories"] = unseen;
  Json summary{{"columns", data.schema.encoded_width()}, {"schema_id", data.schema.fingerprint()}};
  for (std::size_t s = 0; s < data.split_names.size(); ++s) summary[data.split_names[s] + "_rows"] = data.splits[s].rows();
  return report::Bundle("ingest", payload, summary, ctx.seed, BaseConfig("ingest", nullptr, data));
}

Json DatasetSummaryReport(const dataset::DatasetArtifact& data, const RunContext& ctx) {
  if (!data.has_split("train") || !data.has_split("test")) throw DataError("summary needs train and test splits");
  const auto train = TableFromLines(data.raw("train"), "train");
  const auto test = TableFromLines(data.raw("test"), "test");
  const dataset::DatasetSummary s = dataset::SummarizeCompare(train, test);
  Json summary{{"train_rows", s.train.rows},
               {"test_rows", s.test.rows},
               {"train_attack_fraction", s.train.attack_fraction()},
               {"test_attack_fraction", s.test.attack_fraction()}};
  return report::Bundle("dataset_summary", report::SummaryJson(s), summary, ctx.seed,
                        BaseConfig("summary", nullptr, data));
}

TrainOutcome TrainModel(const dataset::DatasetArtifact& data, const TrainOptions& options, const RunContext& ctx) {
  const std::uint64_t seed = options.seed.value_or(ctx.seed);
  const dataset::EncodedMatrix train = MaybeSubsample(data.split("train"), options.subsample, seed);
  std::vector<int> layers = options.layers.empty() ? nn::DefaultLayerSizes() : options.layers;
  if (!layers.empty() && layers.front() != data.schema.encoded_width()) {
    throw UsageError("first layer must match the encoded width " + std::to_string(data.schema.encoded_width()));
  }
  nn::TrainConfig cfg;
  cfg.learning_rate = options.learning_rate;
  cfg.epochs = options.epochs;
  cfg.batch_size = options.batch_size;
  cfg.dropout_rate = options.dropout;
  cfg.rng_seed = seed;
  cfg.Validate();
  TrainOutcome out;
  nn::TrainResult result = nn::Train(nn::InitModel(layers, options.dropout, seed), train, cfg);
  out.model = std::move(result.model);
  Json payload;
  payload["history"] = report::HistoryJson(result.history);
  payload["layers"] = out.model.layer_sizes;
  payload["parameter_count"] = out.model.parameter_count();
  payload["model_fingerprint"] = out.model.fingerprint();
  payload["train_rows"] = train.rows();
  Json summary{{"epochs", result.history.epochs()}, {"model_fingerprint", out.model.fingerprint()},
               {"train_rows", train.rows()}};
  if (!result.history.loss.empty()) {
    summary["final_loss"] = result.history.loss.back();
    summary["final_accuracy"] = result.history.accuracy.back();
  }
  Json config = BaseConfig("train", nullptr, data);
  config["options"] = options.ToJson(ctx);
  out.report = report::Bundle("train", payload, summary, seed, config);
  return out;
}

Json EvalReport(const nn::MlpModel& model, const dataset::DatasetArtifact& data, const std::string& split,
                const RunContext& ctx) {
  if (!data.has_split(split)) throw UsageError("unknown split '" + split + "'");
  const nn::Metrics m = nn::Evaluate(model, data.split(split));
  Json payload{{"split", split}, {"metrics", report::MetricsJson(m)}, {"model_fingerprint", model.fingerprint()}};
  Json summary{{"split", split}, {"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
               {"f1", m.f1}, {"rows", m.total()}};
  Json config = BaseConfig("eval", nullptr, data);
  config["model_fingerprint"] = model.fingerprint();
  config["split"] = split;
  return report::Bundle("metrics", payload, summary, ctx.seed, config);
}

Json ExplainInstanceReport(const Engine& engine, const std::string& method, const std::string& split,
                           std::size_t index, const Json& options, const RunContext& ctx) {
  const Vector x = engine.Instance(split, index);
  Json payload;
  Json config = BaseConfig("explain", &engine, engine.data());
  config["method"] = method;
  config["split"] = split;
  config["index"] = index;
  std::uint64_t seed = ctx.seed;
  if (method == "shap") {
    const ShapOptions o = ShapOptions::FromJson(options);
    seed = o.seed.value_or(ctx.seed);
    payload = engine.ExplainShap(x, o, seed);
    config["options"] = o.ToJson();
  } else if (method == "lime") {
    const LimeOptions o = LimeOptions::FromJson(options);
    seed = o.seed.value_or(ctx.seed);
    payload = engine.ExplainLime(x, o, seed);
    config["options"] = o.ToJson();
  } else {
    throw UsageError("unknown explanation method '" + method + "' (expected shap or lime)");
  }
  payload["instance"] = InstanceJson(engine.data(), split, index);
  const Json& attr = payload["attribution"];
  Json summary{{"method", method}, {"split", split}, {"index", index},
               {"model_output", attr["model_output"]}, {"base_value", attr["base_value"]},
               {"top_feature", TopFeature(attr)}};
  return report::Bundle("attribution", payload, summary, seed, config);
}

Json ExplainSummaryReport(const Engine& engine, const std::string& split, std::size_t count, const Json& options,
                          const RunContext& ctx) {
  if (count < 1) throw UsageError("summary needs --count >= 1");
  if (!engine.data().has_split(split)) throw UsageError("unknown split '" + split + "'");
  const ShapOptions o = ShapOptions::FromJson(options);
  const std::uint64_t seed = o.seed.value_or(ctx.seed);
  const auto& m = engine.data().split(split);
  const std::vector<std::size_t> rows = SampleRows(m.rows(), count, seed);
  std::vector<shap::Attribution> attrs;
  std::vector<std::string> groups;
  for (std::size_t r : rows) {
    int used = 0;
    bool reduced = false;
    attrs.push_back(engine.ShapAttribution(m.row(r), o, seed, Deadline(), &used, &reduced));
    groups.push_back(r < m.raw_labels.size() ? m.raw_labels[r] : std::to_string(m.labels[r]));
  }
  const shap::SummaryData s = shap::GlobalSummary(attrs);
  Json payload;
  payload["summary"] = report::SummaryDataJson(s);
  payload["stacked"] = report::StackedJson(shap::StackedForce(attrs, groups));
  payload["split"] = split;
  payload["rows"] = rows;
  Json top = Json::array();
  for (std::size_t k = 0; k < s.ranking.size() && k < 10; ++k) top.push_back(s.feature_names[static_cast<std::size_t>(s.ranking[k])]);
  payload["top10"] = top;
  Json config = BaseConfig("explain_summary", &engine, engine.data());
  config["split"] = split;
  config["count"] = count;
  config["options"] = o.ToJson();
  Json summary{{"instances", s.instances}, {"split", split}, {"top_feature", top.empty() ? "" : top[0]}};
  return report::Bundle("shap_summary", payload, summary, seed, config);
}

Json ContrastReport(const Engine& engine, cem::Mode mode, const std::string& split, std::size_t index,
                    const Json& options, const RunContext& ctx) {
  const Vector x = engine.Instance(split, index);
  const CemOptions o = CemOptions::FromJson(options);
  const cem::ContrastiveResult r = engine.Contrast(x, mode, o);
  Json payload = report::ContrastJson(r);
  payload["instance_info"] = InstanceJson(engine.data(), split, index);
  Json config = BaseConfig("contrast", &engine, engine.data());
  config["mode"] = cem::ModeName(mode);
  config["split"] = split;
  config["index"] = index;
  config["options"] = o.ToJson();
  Json summary{{"mode", cem::ModeName(mode)}, {"converged", r.converged}, {"changed", r.changed_features.size()},
               {"class_before", r.before.predicted_class}, {"class_after", r.after.predicted_class},
               {"l1", r.l1}};
  return report::Bundle("contrastive", payload, summary, ctx.seed, config);
}

Json ContrastBatchReport(const Engine& engine, cem::Mode mode, const std::string& split, std::size_t count,
                         const Json& options, const RunContext& ctx) {
  if (count < 1) throw UsageError("contrast batch needs --count >= 1");
  if (!engine.data().has_split(split)) throw UsageError("unknown split '" + split + "'");
  const CemOptions o = CemOptions::FromJson(options);
  const auto& m = engine.data().split(split);
  const std::vector<std::size_t> rows = SampleRows(m.rows(), count, ctx.seed);
  std::vector<cem::ContrastiveResult> results;
  Json items = Json::array();
  for (std::size_t r : rows) {
    results.push_back(engine.Contrast(m.row(r), mode, o));
    Json item = report::ContrastJson(results.back());
    item["instance_info"] = InstanceJson(engine.data(), split, r);
    items.push_back(item);
  }
  const cem::BatchStats stats = cem::CemBatchStats(results, engine.column_names());
  Json payload{{"stats", report::CemStatsJson(stats)}, {"results", items}, {"split", split}, {"rows", rows}};
  Json config = BaseConfig("contrast_batch", &engine, engine.data());
  config["mode"] = cem::ModeName(mode);
  config["split"] = split;
  config["count"] = count;
  config["options"] = o.ToJson();
  Json summary{{"mode", cem::ModeName(mode)}, {"count", results.size()}, {"success_rate", stats.success_rate},
               {"mean_changed", stats.mean_changed}};
  return report::Bundle("contrastive_batch", payload, summary, ctx.seed, config);
}

Json PrototypesReport(const Engine& engine, const std::string& split, std::size_t index, int m, const Json& options,
                      const RunContext& ctx) {
  double gamma = 0.0;
  OptionReader r(options, "prototypes");
  r.Read("gamma", &gamma);
  r.Finish();
  const Vector x = engine.Instance(split, index);
  Json payload = engine.Prototypes(x, m, gamma);
  payload["instance_info"] = InstanceJson(engine.data(), split, index);
  Json config = BaseConfig("prototypes", &engine, engine.data());
  config["split"] = split;
  config["index"] = index;
  config["m"] = m;
  config["gamma"] = gamma;
  const Json& protos = payload["prototypes"];
  Json summary{{"m", protos.size()}, {"pool_size", payload["pool_size"]},
               {"top_weight", protos.empty() ? Json(0.0) : protos[0]["weight"]},
               {"top_train_index", protos.empty() ? Json(-1) : protos[0]["train_index"]}};
  return report::Bundle("prototypes", payload, summary, ctx.seed, config);
}

RulesOutcome TrainRules(const dataset::DatasetArtifact& data, const RulesOptions& options, const RunContext& ctx) {
  const dataset::EncodedMatrix train = MaybeSubsample(data.split("train"), options.subsample, ctx.seed);
  brcg::BrcgConfig cfg = options.config;
  const brcg::BinarizedMatrix bin = brcg::Binarize(train, data.schema, cfg);
  brcg::TrainReport tr = brcg::TrainBrcg(bin, train.labels, cfg);
  RulesOutcome out;
  out.rules = tr.rules;
  const auto columns = data.schema.column_names();
  Json payload;
  payload["rules"] = report::RuleSetJson(out.rules);
  payload["lp_objective"] = tr.lp_objective;
  payload["iterations"] = tr.iterations;
  payload["iteration_cap"] = tr.iteration_cap;
  payload["candidate_clauses"] = tr.candidate_clauses;
  payload["binarized_literals"] = bin.literals.size();
  payload["train_rows"] = train.rows();
  const brcg::RuleEvaluation train_eval = brcg::EvaluateRules(out.rules, columns, train);
  payload["train_metrics"] = report::MetricsJson(train_eval.metrics);
  Json summary{{"clauses", out.rules.clauses.size()}, {"literals", out.rules.literal_count()},
               {"train_accuracy", train_eval.metrics.accuracy}, {"iterations", tr.iterations}};
  if (data.has_split("test")) {
    const brcg::RuleEvaluation test_eval = brcg::EvaluateRules(out.rules, columns, data.split("test"));
    payload["test_metrics"] = report::MetricsJson(test_eval.metrics);
    summary["test_accuracy"] = test_eval.metrics.accuracy;
  }
  Json config = BaseConfig("rules_train", nullptr, data);
  config["options"] = options.ToJson();
  out.report = report::Bundle("rules", payload, summary, ctx.seed, config);
  return out;
}

Json RulesEvalReport(const brcg::RuleSet& rules, const dataset::DatasetArtifact& data, const std::string& split,
                     const RunContext& ctx) {
  if (!data.has_split(split)) throw UsageError("unknown split '" + split + "'");
  const brcg::RuleEvaluation eval = brcg::EvaluateRules(rules, data.schema.column_names(), data.split(split));
  brcg::RuleSet with_stats = rules;
  with_stats.clause_stats = eval.clause_stats;
  Json payload{{"split", split}, {"rules", report::RuleSetJson(with_stats)}, {"metrics", report::MetricsJson(eval.metrics)}};
  Json config = BaseConfig("rules_eval", nullptr, data);
  config["split"] = split;
  config["rules_fingerprint"] = report::Fingerprint(Json(brcg::PrintRules(rules)));
  Json summary{{"split", split}, {"clauses", rules.clauses.size()}, {"accuracy", eval.metrics.accuracy},
               {"precision", eval.metrics.precision}, {"recall", eval.metrics.recall}, {"rows", eval.metrics.total()}};
  return report::Bundle("rules_eval", payload, summary, ctx.seed, config);
}

}  // namespace xids::pipeline
