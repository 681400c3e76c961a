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


#include "core/report.hpp"

#include <sstream>

namespace xids::report {

const char* ToolVersion() {
#ifdef XIDS_VERSION_STRING
  return XIDS_VERSION_STRING;
#else
  return "0.0.0";
#endif
}

Json VectorJson(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector VectorFromJson(const Json& j) {
  if (!j.is_array()) throw DataError("expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError("expected a number at position " + std::to_string(i));
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json MetricsJson(const nn::Metrics& m) {
  Json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["precision_defined"] = m.precision_defined;
  j["recall_defined"] = m.recall_defined;
  j["confusion"] = {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
  j["rows"] = m.total();
  return j;
}

Json HistoryJson(const nn::TrainHistory& h) {
  return {{"loss", h.loss}, {"accuracy", h.accuracy}, {"epochs", h.epochs()}};
}

Json TableStatsJson(const dataset::TableStats& s) {
  Json j;
  j["source"] = s.source_name;
  j["rows"] = s.rows;
  j["normal"] = s.normal;
  j["attack"] = s.attack;
  j["attack_fraction"] = s.attack_fraction();
  j["label_counts"] = s.label_counts;
  Json features = Json::array();
  for (const auto& f : s.features) {
    Json fj;
    fj["name"] = f.name;
    fj["kind"] = dataset::FeatureKindName(f.kind);
    fj["count"] = f.count;
    fj["missing"] = f.missing;
    fj["distinct"] = f.distinct;
    if (f.kind == dataset::FeatureKind::kCategorical) {
      Json top = Json::array();
      for (const auto& [name, count] : f.top) top.push_back({{"value", name}, {"count", count}});
      fj["top"] = top;
    } else {
      fj["mean"] = f.mean;
      fj["stddev"] = f.stddev;
      fj["min"] = f.min;
      fj["max"] = f.max;
    }
    features.push_back(fj);
  }
  j["features"] = features;
  return j;
}

Json SummaryJson(const dataset::DatasetSummary& s) {
  Json j;
  j["train"] = TableStatsJson(s.train);
  j["test"] = TableStatsJson(s.test);
  Json shift = Json::array();
  for (std::size_t f = 0; f < s.train.features.size() && f < s.test.features.size(); ++f) {
    const auto& a = s.train.features[f];
    const auto& b = s.test.features[f];
    if (a.kind == dataset::FeatureKind::kCategorical) continue;
    shift.push_back({{"name", a.name}, {"train_mean", a.mean}, {"test_mean", b.mean},
                     {"mean_difference", b.mean - a.mean}});
  }
  j["shift"] = shift;
  return j;
}

Json SchemaJson(const dataset::FeatureSchema& schema) {
  Json j;
  Json features = Json::array();
  for (const auto& f : schema.features) features.push_back({{"name", f.name}, {"kind", dataset::FeatureKindName(f.kind)}});
  j["features"] = features;
  Json columns = Json::array();
  for (int c = 0; c < schema.encoded_width(); ++c) {
    const auto& col = schema.columns[static_cast<std::size_t>(c)];
    Json cj{{"name", col.name},
            {"feature", schema.features[static_cast<std::size_t>(col.feature)].name},
            {"kind", dataset::FeatureKindName(schema.column_kind(c))},
            {"min", schema.col_min[static_cast<std::size_t>(c)]},
            {"max", schema.col_max[static_cast<std::size_t>(c)]}};
    if (col.category >= 0) {
      const auto& vocab = schema.vocab.at(schema.features[static_cast<std::size_t>(col.feature)].name);
      cj["category"] = vocab[static_cast<std::size_t>(col.category)];
    }
    columns.push_back(cj);
  }
  j["columns"] = columns;
  Json groups = Json::array();
  for (const auto& g : schema.one_hot_groups()) {
    groups.push_back({{"feature", schema.features[static_cast<std::size_t>(g.feature)].name},
                      {"first_column", g.first_column},
                      {"size", g.size}});
  }
  j["one_hot_groups"] = groups;
  j["schema_id"] = schema.fingerprint();
  return j;
}

Json AttributionJson(const shap::Attribution& a) {
  Json j;
  j["method"] = a.method;
  j["feature_names"] = a.feature_names;
  j["instance"] = VectorJson(a.instance);
  j["phi"] = VectorJson(a.phi);
  j["base_value"] = a.base_value;
  j["model_output"] = a.model_output;
  j["target_class"] = a.target_class;
  Json diag;
  if (a.method == "shap") {
    diag["coalitions"] = a.coalitions;
    diag["exhaustive"] = a.exhaustive;
    diag["background_size"] = a.background_size;
    diag["efficiency_gap"] = a.phi.sum() + a.base_value - a.model_output;
  } else {
    diag["samples"] = a.background_size;
    diag["surrogate_r2"] = a.surrogate_r2;
  }
  j["diagnostics"] = diag;
  return j;
}

namespace {

Json SegmentsJson(const std::vector<shap::ForceSegment>& segs) {
  Json a = Json::array();
  for (const auto& s : segs) a.push_back({{"feature", s.feature}, {"name", s.name}, {"value", s.value}, {"phi", s.phi}});
  return a;
}

}  // namespace

Json ForceJson(const shap::ForcePlotData& f) {
  return {{"base_value", f.base_value},
          {"model_output", f.model_output},
          {"positive", SegmentsJson(f.positive)},
          {"negative", SegmentsJson(f.negative)}};
}

Json SummaryDataJson(const shap::SummaryData& s) {
  Json j;
  j["feature_names"] = s.feature_names;
  j["ranking"] = s.ranking;
  j["mean_abs_phi"] = VectorJson(s.mean_abs_phi);
  j["instances"] = s.instances;
  Json points = Json::array();
  for (const auto& per_feature : s.points) {
    Json values = Json::array();
    Json phis = Json::array();
    for (const auto& [v, p] : per_feature) {
      values.push_back(v);
      phis.push_back(p);
    }
    points.push_back({{"value", values}, {"phi", phis}});
  }
  j["points"] = points;
  return j;
}

Json StackedJson(const shap::StackedForceData& s) {
  Json j;
  j["feature_names"] = s.feature_names;
  Json cols = Json::array();
  for (const auto& c : s.columns) {
    cols.push_back({{"attribution", c.attribution},
                    {"group", c.group},
                    {"model_output", c.model_output},
                    {"base_value", c.base_value},
                    {"phi", VectorJson(c.phi)}});
  }
  j["columns"] = cols;
  Json groups = Json::array();
  for (const auto& g : s.groups) groups.push_back({{"label", g.label}, {"start", g.start}, {"count", g.count}});
  j["groups"] = groups;
  return j;
}

Json PredictionJson(const cem::Prediction& p) {
  return {{"class", p.predicted_class}, {"probabilities", VectorJson(p.probabilities)}};
}

Json ContrastJson(const cem::ContrastiveResult& r) {
  Json j;
  j["mode"] = cem::ModeName(r.mode);
  j["instance"] = VectorJson(r.instance);
  j["delta"] = VectorJson(r.delta);
  Json changed = Json::array();
  for (const auto& f : r.changed_features) {
    changed.push_back({{"index", f.index}, {"name", f.name}, {"original", f.original}, {"updated", f.updated}});
  }
  j["changed_features"] = changed;
  j["prediction_before"] = PredictionJson(r.before);
  j["prediction_after"] = PredictionJson(r.after);
  j["converged"] = r.converged;
  j["objective"] = r.objective;
  j["l1"] = r.l1;
  j["l2"] = r.l2;
  j["diagnostics"] = {{"c_final", r.c_final}, {"iterations", r.iterations}};
  return j;
}

Json CemStatsJson(const cem::BatchStats& s) {
  Json j;
  j["mode"] = cem::ModeName(s.mode);
  j["count"] = s.count;
  j["success_rate"] = s.success_rate;
  j["mean_changed"] = s.mean_changed;
  j["frequency"] = VectorJson(s.frequency);
  j["mean_delta"] = VectorJson(s.mean_delta);
  j["ranking"] = s.ranking;
  j["feature_names"] = s.feature_names;
  return j;
}

Json PrototypeSetJson(const protodash::PrototypeSet& p) {
  return {{"indices", p.indices},
          {"weights", VectorJson(p.weights)},
          {"objective_trace", p.objective_trace},
          {"pool_fingerprint", p.pool_fingerprint},
          {"gamma", p.gamma},
          {"jittered", p.jittered}};
}

Json NeighborTableJson(const protodash::NeighborTable& t, const std::vector<std::string>& column_names,
                       const std::vector<std::string>* raw_lines) {
  Json j;
  j["query"] = VectorJson(t.query);
  j["query_class"] = t.query_class;
  j["pool_size"] = t.pool_size;
  j["column_names"] = column_names;
  Json rows = Json::array();
  for (const auto& nb : t.neighbors) {
    Json r{{"train_index", nb.train_index},
           {"weight", nb.weight},
           {"predicted_class", nb.predicted_class},
           {"label", nb.label},
           {"raw_label", nb.raw_label},
           {"values", VectorJson(nb.values)},
           {"similarity", VectorJson(nb.similarity)}};
    if (raw_lines && nb.train_index < raw_lines->size()) r["raw"] = (*raw_lines)[nb.train_index];
    rows.push_back(r);
  }
  j["prototypes"] = rows;
  j["selection"] = PrototypeSetJson(t.prototypes);
  return j;
}

Json LiteralJson(const brcg::Literal& l) {
  Json j{{"column", l.column}, {"form", brcg::LiteralFormName(l.form)}};
  if (l.form == brcg::LiteralForm::kLessEqual || l.form == brcg::LiteralForm::kGreater) {
    j["threshold"] = l.threshold;
    j["threshold_text"] = l.threshold_text;
  }
  return j;
}

Json RuleSetJson(const brcg::RuleSet& r) {
  Json j;
  j["provenance"] = r.provenance;
  j["lambda0"] = r.lambda0;
  j["lambda1"] = r.lambda1;
  j["text"] = brcg::PrintRules(r);
  j["literal_count"] = r.literal_count();
  Json clauses = Json::array();
  for (std::size_t k = 0; k < r.clauses.size(); ++k) {
    Json c;
    c["text"] = brcg::ClauseText(r.clauses[k]);
    Json lits = Json::array();
    for (const auto& l : r.clauses[k].literals) lits.push_back(LiteralJson(l));
    c["literals"] = lits;
    if (k < r.clause_stats.size()) {
      c["stats"] = {{"fires", r.clause_stats[k].fires}, {"true_positives", r.clause_stats[k].true_positives}};
    }
    clauses.push_back(c);
  }
  j["clauses"] = clauses;
  return j;
}

std::string Fingerprint(const Json& value) {
  Fnv1a h;
  h.Update(value.dump());
  return h.HexDigest();
}

Json Bundle(const std::string& kind, Json payload, Json summary, std::uint64_t seed, const Json& config) {
  Json j;
  j["format"] = kFormat;
  j["version"] = kFormatVersion;
  j["kind"] = kind;
  j["metadata"] = {{"tool_version", ToolVersion()}, {"seed", seed}, {"config", config},
                   {"config_fingerprint", Fingerprint(config)}};
  j["payload"] = std::move(payload);
  j["summary"] = summary.is_null() ? Json::object() : std::move(summary);
  return j;
}

std::string Dump(const Json& j) { return j.dump(1) + "\n"; }

Json Parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
}

std::string SummaryLine(const Json& bundle) {
  std::ostringstream out;
  out << bundle.value("kind", std::string("report"));
  const auto it = bundle.find("summary");
  if (it != bundle.end() && it->is_object()) {
    for (const auto& [key, value] : it->items()) {
      out << ' ' << key << '=';
      if (value.is_string()) {
        out << value.get<std::string>();
      } else {
        out << value.dump();
      }
    }
  }
  return out.str();
}

}  // namespace xids::report
