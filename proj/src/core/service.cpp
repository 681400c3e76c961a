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


#include "core/service.hpp"

#include <cmath>
#include <sstream>

namespace xids::service {

using pipeline::Json;

namespace {

// Request-level failures carry their HTTP status.
class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

[[noreturn]] void Malformed(const std::string& message) { throw HttpError(400, message); }
[[noreturn]] void OutOfRange(const std::string& message) { throw HttpError(422, message); }

const char* CodeName(int status) {
  switch (status) {
    case 400: return "malformed";
    case 404: return "not_found";
    case 405: return "method_not_allowed";
    case 422: return "out_of_range";
    case 503: return "budget_exceeded";
    default: return "internal";
  }
}

Response ErrorResponse(int status, const std::string& message) {
  return {status, report::Dump(Json{{"code", CodeName(status)}, {"message", message}})};
}

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string Unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size() && HexValue(s[i + 1]) >= 0 && HexValue(s[i + 2]) >= 0) {
      out.push_back(static_cast<char>(HexValue(s[i + 1]) * 16 + HexValue(s[i + 2])));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::size_t QueryInt(const Query& q, const std::string& key, std::size_t fallback) {
  const auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return fallback;
  const std::string& s = it->second;
  for (char c : s) {
    if (c < '0' || c > '9') Malformed("query parameter '" + key + "' must be a nonnegative integer");
  }
  if (s.size() > 12) OutOfRange("query parameter '" + key + "' is too large");
  return static_cast<std::size_t>(std::stoull(s));
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  return out;
}

const Json& RequireObject(const Json& body) {
  if (!body.is_object()) Malformed("request body must be a JSON object");
  return body;
}

void RejectUnknown(const Json& body, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : body.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) Malformed("unknown field '" + key + "'");
  }
}

Json Options(const Json& body) {
  if (!body.contains("options") || body["options"].is_null()) return Json::object();
  if (!body["options"].is_object()) Malformed("'options' must be an object");
  return body["options"];
}

}  // namespace

Query ParseQuery(const std::string& query) {
  Query out;
  std::string part;
  std::istringstream in(query);
  while (std::getline(in, part, '&')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      out[Unescape(part)] = "";
    } else {
      out[Unescape(part.substr(0, eq))] = Unescape(part.substr(eq + 1));
    }
  }
  return out;
}

Service::Service(std::shared_ptr<const nn::MlpModel> model, std::shared_ptr<const dataset::DatasetArtifact> data,
                 std::optional<brcg::RuleSet> rules, ServiceConfig config)
    : engine_(std::move(model), std::move(data)), config_(config), rules_(std::move(rules)) {
  if (!(config_.budget_seconds > 0)) throw UsageError("service budget must be > 0 seconds");
  if (rules_) {
    (void)brcg::Bind(*rules_, engine_.column_names());
    Json fires = Json::object();
    Json metrics = Json::object();
    for (const auto& split : engine_.data().split_names) {
      const auto eval = brcg::EvaluateRules(*rules_, engine_.column_names(), engine_.data().split(split));
      Json counts = Json::array();
      for (const auto& s : eval.clause_stats) counts.push_back(s.fires);
      fires[split] = counts;
      metrics[split] = report::MetricsJson(eval.metrics);
    }
    rules_json_ = {{"rules", report::RuleSetJson(*rules_)}, {"fires", fires}, {"metrics", metrics}};
  }
}

Response Service::Handle(const std::string& method, const std::string& path, const Query& query,
                         const std::string& body) const {
  struct Route {
    const char* path;
    const char* method;
  };
  static const Route kRoutes[] = {
      {"/api/meta", "GET"},        {"/api/instances", "GET"},  {"/api/predict", "POST"},
      {"/api/explain", "POST"},    {"/api/contrast", "POST"},  {"/api/prototypes", "POST"},
      {"/api/rules", "GET"},       {"/api/rules/apply", "POST"},
  };
  const Route* route = nullptr;
  for (const auto& r : kRoutes) {
    if (path == r.path) route = &r;
  }
  if (!route) return ErrorResponse(404, "no such endpoint: " + path);
  if (method != route->method) {
    return ErrorResponse(405, std::string(route->path) + " accepts " + route->method + " only");
  }
  try {
    Json parsed;
    if (std::string(route->method) == "POST") {
      try {
        parsed = Json::parse(body);
      } catch (const Json::parse_error& e) {
        Malformed(std::string("request body is not valid JSON: ") + e.what());
      }
      RequireObject(parsed);
    }
    Json out;
    if (path == "/api/meta") {
      out = Meta();
    } else if (path == "/api/instances") {
      out = Instances(query);
    } else if (path == "/api/predict") {
      out = Predict(parsed);
    } else if (path == "/api/explain") {
      out = Explain(parsed);
    } else if (path == "/api/contrast") {
      out = Contrast(parsed);
    } else if (path == "/api/prototypes") {
      out = Prototypes(parsed);
    } else if (path == "/api/rules") {
      out = Rules();
    } else {
      out = ApplyRules(parsed);
    }
    return {200, report::Dump(out)};
  } catch (const HttpError& e) {
    return ErrorResponse(e.status(), e.what());
  } catch (const BudgetExceeded& e) {
    return ErrorResponse(503, e.what());
  } catch (const UsageError& e) {
    return ErrorResponse(400, e.what());
  } catch (const DataError& e) {
    return ErrorResponse(422, e.what());
  } catch (const Json::exception& e) {
    return ErrorResponse(400, e.what());
  } catch (const std::exception& e) {
    return ErrorResponse(500, e.what());
  }
}

Json Service::Meta() const {
  const auto& data = engine_.data();
  Json j = report::SchemaJson(data.schema);
  j["model_fingerprint"] = engine_.model().fingerprint();
  j["layers"] = engine_.model().layer_sizes;
  j["encoded_width"] = engine_.width();
  j["class_names"] = {"normal", "attack"};
  Json splits = Json::object();
  for (std::size_t s = 0; s < data.split_names.size(); ++s) splits[data.split_names[s]] = data.splits[s].rows();
  j["splits"] = splits;
  j["tool_version"] = report::ToolVersion();
  j["budget_seconds"] = config_.budget_seconds;
  j["rules_loaded"] = rules_.has_value();
  return j;
}

Json Service::Instances(const Query& query) const {
  const auto it = query.find("split");
  const std::string split = it == query.end() || it->second.empty() ? "test" : it->second;
  const auto& data = engine_.data();
  if (!data.has_split(split)) OutOfRange("unknown split '" + split + "'");
  const std::size_t offset = QueryInt(query, "offset", 0);
  const std::size_t limit = QueryInt(query, "limit", 20);
  if (limit < 1 || limit > config_.max_instances) {
    OutOfRange("limit must be in [1, " + std::to_string(config_.max_instances) + "]");
  }
  const auto& m = data.split(split);
  if (offset > m.rows()) {
    OutOfRange("offset " + std::to_string(offset) + " beyond " + std::to_string(m.rows()) + " rows");
  }
  const std::size_t end = std::min(m.rows(), offset + limit);
  const auto& raw = data.raw(split);
  Json rows = Json::array();
  if (end > offset) {
    std::vector<std::size_t> idx;
    for (std::size_t i = offset; i < end; ++i) idx.push_back(i);
    const auto page = m.Subset(idx);
    const Matrix probs = nn::ForwardRows(engine_.model(), page.values);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t i = idx[k];
      const Eigen::Index r = static_cast<Eigen::Index>(k);
      Json row{{"index", i},
               {"features", report::VectorJson(m.row(i))},
               {"label", m.labels[i]},
               {"prediction",
                {{"probabilities", {probs(r, 0), probs(r, 1)}}, {"class", probs(r, 1) > probs(r, 0) ? 1 : 0}}}};
      if (i < m.raw_labels.size()) row["raw_label"] = m.raw_labels[i];
      if (i < raw.size()) row["raw"] = SplitFields(raw[i]);
      rows.push_back(row);
    }
  }
  return {{"split", split}, {"offset", offset}, {"limit", limit}, {"total", m.rows()}, {"rows", rows}};
}

Vector Service::Features(const Json& body) const {
  if (!body.contains("features")) Malformed("missing 'features'");
  const Json& f = body["features"];
  if (!f.is_array()) Malformed("'features' must be an array of numbers");
  const std::size_t width = static_cast<std::size_t>(engine_.width());
  if (f.size() != width) {
    Malformed("expected " + std::to_string(width) + " features, got " + std::to_string(f.size()));
  }
  Vector x(static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < width; ++i) {
    if (!f[i].is_number()) Malformed("feature " + std::to_string(i) + " is not a number");
    const double v = f[i].get<double>();
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      std::ostringstream msg;
      msg << "feature " << i << " (" << engine_.column_names()[i] << ") = " << v << " is outside [0, 1]";
      OutOfRange(msg.str());
    }
    x[static_cast<Eigen::Index>(i)] = v;
  }
  return x;
}

pipeline::Deadline Service::RequestDeadline(const Json& body) const {
  double seconds = config_.budget_seconds;
  if (body.contains("budget_seconds")) {
    if (!body["budget_seconds"].is_number()) Malformed("'budget_seconds' must be a number");
    seconds = body["budget_seconds"].get<double>();
    if (!(seconds > 0) || seconds > config_.budget_seconds) {
      std::ostringstream msg;
      msg << "budget_seconds must be in (0, " << config_.budget_seconds << "]";
      OutOfRange(msg.str());
    }
  }
  return pipeline::Deadline(seconds);
}

Json Service::Predict(const Json& body) const {
  RejectUnknown(body, {"features"});
  return engine_.PredictJson(Features(body));
}

Json Service::Explain(const Json& body) const {
  RejectUnknown(body, {"method", "features", "options", "budget_seconds"});
  if (!body.contains("method") || !body["method"].is_string()) Malformed("'method' must be \"shap\" or \"lime\"");
  const std::string method = body["method"];
  const Vector x = Features(body);
  const pipeline::Deadline deadline = RequestDeadline(body);
  const Json options = Options(body);
  if (method == "shap") {
    const auto o = pipeline::ShapOptions::FromJson(options);
    return engine_.ExplainShap(x, o, o.seed.value_or(config_.seed), deadline);
  }
  if (method == "lime") {
    const auto o = pipeline::LimeOptions::FromJson(options);
    return engine_.ExplainLime(x, o, o.seed.value_or(config_.seed), deadline);
  }
  Malformed("'method' must be \"shap\" or \"lime\"");
}

Json Service::Contrast(const Json& body) const {
  RejectUnknown(body, {"mode", "features", "options", "budget_seconds"});
  if (!body.contains("mode") || !body["mode"].is_string()) Malformed("'mode' must be \"pn\" or \"pp\"");
  const std::string mode_name = body["mode"];
  if (mode_name != "pn" && mode_name != "pp") Malformed("'mode' must be \"pn\" or \"pp\"");
  const Vector x = Features(body);
  const pipeline::Deadline deadline = RequestDeadline(body);
  const auto o = pipeline::CemOptions::FromJson(Options(body));
  return report::ContrastJson(engine_.Contrast(x, cem::ParseMode(mode_name), o, deadline));
}

Json Service::Prototypes(const Json& body) const {
  RejectUnknown(body, {"features", "m", "gamma", "budget_seconds"});
  const Vector x = Features(body);
  int m = 5;
  if (body.contains("m")) {
    if (!body["m"].is_number_integer()) Malformed("'m' must be an integer");
    const auto v = body["m"].get<std::int64_t>();
    if (v < 1 || v > config_.max_prototypes) {
      OutOfRange("m must be in [1, " + std::to_string(config_.max_prototypes) + "]");
    }
    m = static_cast<int>(v);
  }
  double gamma = 0.0;
  if (body.contains("gamma")) {
    if (!body["gamma"].is_number()) Malformed("'gamma' must be a number");
    gamma = body["gamma"].get<double>();
    if (!(gamma >= 0) || !std::isfinite(gamma)) OutOfRange("gamma must be >= 0 (0 selects 1/width)");
  }
  const pipeline::Deadline deadline = RequestDeadline(body);
  return engine_.Prototypes(x, m, gamma, deadline);
}

Json Service::Rules() const {
  if (!rules_) throw HttpError(404, "no rule set loaded (start the service with --rules)");
  return rules_json_;
}

Json Service::ApplyRules(const Json& body) const {
  if (!rules_) throw HttpError(404, "no rule set loaded (start the service with --rules)");
  RejectUnknown(body, {"features"});
  const Vector x = Features(body);
  const std::vector<int> fired = brcg::FiredClauses(*rules_, engine_.column_names(), x);
  return {{"fired", fired}, {"prediction", fired.empty() ? 0 : 1}};
}

}  // namespace xids::service
