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


#include "xids/xids.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "core/brcg.hpp"
#include "core/dataset.hpp"
#include "core/nn.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/service.hpp"
#include "core/svg.hpp"

struct xids_dataset {
  std::shared_ptr<const xids::dataset::DatasetArtifact> data;
};
struct xids_model {
  std::shared_ptr<const xids::nn::MlpModel> model;
};
struct xids_rules {
  xids::brcg::RuleSet rules;
};
struct xids_service {
  std::unique_ptr<xids::service::Service> service;
};

namespace {

using xids::pipeline::Json;

thread_local std::string g_last_error;

xids_status StatusOf(xids::ErrorKind kind) {
  switch (kind) {
    case xids::ErrorKind::kUsage: return XIDS_ERR_USAGE;
    case xids::ErrorKind::kData: return XIDS_ERR_DATA;
    case xids::ErrorKind::kNumeric: return XIDS_ERR_NUMERIC;
    case xids::ErrorKind::kIo: return XIDS_ERR_IO;
    case xids::ErrorKind::kBudget: return XIDS_ERR_BUDGET;
    case xids::ErrorKind::kInternal: return XIDS_ERR_INTERNAL;
  }
  return XIDS_ERR_INTERNAL;
}

// Runs `fn`, translating exceptions into a status and the thread's last error.
template <typename Fn>
xids_status Guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return XIDS_OK;
  } catch (const xids::Error& e) {
    g_last_error = e.what();
    return StatusOf(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return XIDS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return XIDS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return XIDS_ERR_INTERNAL;
  }
}

void Require(const void* p, const char* what) {
  if (!p) throw xids::UsageError(std::string(what) + " must not be NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void Emit(const Json& report, char** out) { *out = CopyString(xids::report::Dump(report)); }

Json OptionsJson(const char* text) {
  if (!text || !*text) return Json::object();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw xids::UsageError(std::string("options are not valid JSON: ") + e.what());
  }
}

xids::pipeline::RunContext Context(std::uint64_t seed) {
  xids::pipeline::RunContext ctx;
  ctx.seed = seed;
  return ctx;
}

xids::pipeline::Engine MakeEngine(const xids_model* model, const xids_dataset* dataset) {
  Require(model, "model");
  Require(dataset, "dataset");
  return xids::pipeline::Engine(model->model, dataset->data);
}

}  // namespace

extern "C" {

const char* xids_version(void) { return xids::report::ToolVersion(); }

const char* xids_last_error(void) { return g_last_error.c_str(); }

void xids_free_string(char* s) { std::free(s); }

const char* xids_status_name(xids_status status) {
  switch (status) {
    case XIDS_OK: return "ok";
    case XIDS_ERR_USAGE: return "usage";
    case XIDS_ERR_DATA: return "data";
    case XIDS_ERR_NUMERIC: return "numeric";
    case XIDS_ERR_IO: return "io";
    case XIDS_ERR_BUDGET: return "budget";
    case XIDS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

xids_status xids_dataset_ingest(const char* train_path, const char* test_path, xids_dataset** out) {
  return Guard([&] {
    Require(train_path, "train path");
    Require(test_path, "test path");
    Require(out, "out");
    auto data = std::make_shared<xids::dataset::DatasetArtifact>(xids::dataset::Ingest(train_path, test_path));
    *out = new xids_dataset{std::move(data)};
  });
}

xids_status xids_dataset_load(const char* path, xids_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto data = std::make_shared<xids::dataset::DatasetArtifact>(xids::dataset::LoadArtifact(path));
    *out = new xids_dataset{std::move(data)};
  });
}

xids_status xids_dataset_save(const xids_dataset* dataset, const char* path) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(path, "path");
    xids::dataset::SaveArtifact(*dataset->data, path);
  });
}

xids_status xids_dataset_rows(const xids_dataset* dataset, const char* split, size_t* rows) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(split, "split");
    Require(rows, "rows");
    if (!dataset->data->has_split(split)) throw xids::UsageError(std::string("unknown split '") + split + "'");
    *rows = dataset->data->split(split).rows();
  });
}

xids_status xids_dataset_width(const xids_dataset* dataset, int* width) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(width, "width");
    *width = dataset->data->schema.encoded_width();
  });
}

void xids_dataset_free(xids_dataset* dataset) { delete dataset; }

xids_status xids_model_load(const char* path, xids_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new xids_model{std::make_shared<xids::nn::MlpModel>(xids::nn::LoadModel(path))};
  });
}

xids_status xids_model_save(const xids_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    xids::nn::SaveModel(*model->model, path);
  });
}

void xids_model_free(xids_model* model) { delete model; }

xids_status xids_rules_load(const char* path, xids_rules** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new xids_rules{xids::brcg::LoadRulesFile(path)};
  });
}

xids_status xids_rules_parse(const char* text, xids_rules** out) {
  return Guard([&] {
    Require(text, "text");
    Require(out, "out");
    *out = new xids_rules{xids::brcg::ParseRules(text)};
  });
}

xids_status xids_rules_save(const xids_rules* rules, const char* path) {
  return Guard([&] {
    Require(rules, "rules");
    Require(path, "path");
    xids::brcg::SaveRulesFile(rules->rules, path);
  });
}

xids_status xids_rules_text(const xids_rules* rules, char** text) {
  return Guard([&] {
    Require(rules, "rules");
    Require(text, "text");
    *text = CopyString(xids::brcg::PrintRules(rules->rules));
  });
}

void xids_rules_free(xids_rules* rules) { delete rules; }

xids_status xids_ingest_report(const xids_dataset* dataset, uint64_t seed, char** report) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(report, "report");
    Emit(xids::pipeline::IngestReport(*dataset->data, Context(seed)), report);
  });
}

xids_status xids_summary_report(const xids_dataset* dataset, uint64_t seed, char** report) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(report, "report");
    Emit(xids::pipeline::DatasetSummaryReport(*dataset->data, Context(seed)), report);
  });
}

xids_status xids_train(const xids_dataset* dataset, const char* options_json, uint64_t seed, xids_model** model,
                       char** report) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(model, "model");
    Require(report, "report");
    const auto options = xids::pipeline::TrainOptions::FromJson(OptionsJson(options_json));
    auto outcome = xids::pipeline::TrainModel(*dataset->data, options, Context(seed));
    std::string text = xids::report::Dump(outcome.report);
    auto* handle = new xids_model{std::make_shared<xids::nn::MlpModel>(std::move(outcome.model))};
    try {
      *report = CopyString(text);
    } catch (...) {
      delete handle;
      throw;
    }
    *model = handle;
  });
}

xids_status xids_eval_report(const xids_model* model, const xids_dataset* dataset, const char* split, uint64_t seed,
                             char** report) {
  return Guard([&] {
    Require(model, "model");
    Require(dataset, "dataset");
    Require(split, "split");
    Require(report, "report");
    Emit(xids::pipeline::EvalReport(*model->model, *dataset->data, split, Context(seed)), report);
  });
}

xids_status xids_explain_report(const xids_model* model, const xids_dataset* dataset, const char* method,
                                const char* split, size_t index, const char* options_json, uint64_t seed,
                                char** report) {
  return Guard([&] {
    Require(method, "method");
    Require(split, "split");
    Require(report, "report");
    const auto engine = MakeEngine(model, dataset);
    Emit(xids::pipeline::ExplainInstanceReport(engine, method, split, index, OptionsJson(options_json),
                                               Context(seed)),
         report);
  });
}

xids_status xids_explain_summary_report(const xids_model* model, const xids_dataset* dataset, const char* split,
                                        size_t count, const char* options_json, uint64_t seed, char** report) {
  return Guard([&] {
    Require(split, "split");
    Require(report, "report");
    const auto engine = MakeEngine(model, dataset);
    Emit(xids::pipeline::ExplainSummaryReport(engine, split, count, OptionsJson(options_json), Context(seed)),
         report);
  });
}

xids_status xids_contrast_report(const xids_model* model, const xids_dataset* dataset, const char* mode,
                                 const char* split, size_t index, const char* options_json, uint64_t seed,
                                 char** report) {
  return Guard([&] {
    Require(mode, "mode");
    Require(split, "split");
    Require(report, "report");
    const auto engine = MakeEngine(model, dataset);
    Emit(xids::pipeline::ContrastReport(engine, xids::cem::ParseMode(mode), split, index, OptionsJson(options_json),
                                        Context(seed)),
         report);
  });
}

xids_status xids_contrast_batch_report(const xids_model* model, const xids_dataset* dataset, const char* mode,
                                       const char* split, size_t count, const char* options_json, uint64_t seed,
                                       char** report) {
  return Guard([&] {
    Require(mode, "mode");
    Require(split, "split");
    Require(report, "report");
    const auto engine = MakeEngine(model, dataset);
    Emit(xids::pipeline::ContrastBatchReport(engine, xids::cem::ParseMode(mode), split, count,
                                             OptionsJson(options_json), Context(seed)),
         report);
  });
}

xids_status xids_prototypes_report(const xids_model* model, const xids_dataset* dataset, const char* split,
                                   size_t index, int m, const char* options_json, uint64_t seed, char** report) {
  return Guard([&] {
    Require(split, "split");
    Require(report, "report");
    const auto engine = MakeEngine(model, dataset);
    Emit(xids::pipeline::PrototypesReport(engine, split, index, m, OptionsJson(options_json), Context(seed)),
         report);
  });
}

xids_status xids_rules_train(const xids_dataset* dataset, const char* options_json, uint64_t seed,
                             xids_rules** rules, char** report) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(rules, "rules");
    Require(report, "report");
    const auto options = xids::pipeline::RulesOptions::FromJson(OptionsJson(options_json));
    auto outcome = xids::pipeline::TrainRules(*dataset->data, options, Context(seed));
    std::string text = xids::report::Dump(outcome.report);
    auto* handle = new xids_rules{std::move(outcome.rules)};
    try {
      *report = CopyString(text);
    } catch (...) {
      delete handle;
      throw;
    }
    *rules = handle;
  });
}

xids_status xids_rules_eval_report(const xids_rules* rules, const xids_dataset* dataset, const char* split,
                                   uint64_t seed, char** report) {
  return Guard([&] {
    Require(rules, "rules");
    Require(dataset, "dataset");
    Require(split, "split");
    Require(report, "report");
    Emit(xids::pipeline::RulesEvalReport(rules->rules, *dataset->data, split, Context(seed)), report);
  });
}

xids_status xids_report_svg(const char* report_json, const char* variant, char** svg) {
  return Guard([&] {
    Require(report_json, "report");
    Require(svg, "svg");
    *svg = CopyString(xids::svg::Render(xids::report::Parse(report_json), variant ? variant : ""));
  });
}

xids_status xids_report_summary_line(const char* report_json, char** line) {
  return Guard([&] {
    Require(report_json, "report");
    Require(line, "line");
    *line = CopyString(xids::report::SummaryLine(xids::report::Parse(report_json)));
  });
}

xids_status xids_service_create(const xids_model* model, const xids_dataset* dataset, const xids_rules* rules,
                                double budget_seconds, uint64_t seed, xids_service** out) {
  return Guard([&] {
    Require(model, "model");
    Require(dataset, "dataset");
    Require(out, "out");
    xids::service::ServiceConfig config;
    config.budget_seconds = budget_seconds;
    config.seed = seed;
    std::optional<xids::brcg::RuleSet> active;
    if (rules) active = rules->rules;
    *out = new xids_service{
        std::make_unique<xids::service::Service>(model->model, dataset->data, std::move(active), config)};
  });
}

xids_status xids_service_handle(const xids_service* service, const char* method, const char* path,
                                const char* query, const char* body, int* http_status, char** response) {
  return Guard([&] {
    Require(service, "service");
    Require(method, "method");
    Require(path, "path");
    Require(http_status, "http_status");
    Require(response, "response");
    const auto r = service->service->Handle(method, path, xids::service::ParseQuery(query ? query : ""),
                                            body ? body : "");
    *response = CopyString(r.body);
    *http_status = r.status;
  });
}

void xids_service_free(xids_service* service) { delete service; }

}  // extern "C"
