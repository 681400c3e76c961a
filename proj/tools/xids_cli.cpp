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


// Command-line front end. Every stage goes through the C API; the process
// prints one summary line on stdout and exits with 0 (ok), 1 (usage),
// 2 (data or I/O), 3 (numeric or budget) or 4 (internal).

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "xids/xids.h"

namespace {

using Json = nlohmann::json;

struct Failure {
  xids_status status;
  std::string message;
};

void Check(xids_status status) {
  if (status != XIDS_OK) throw Failure{status, xids_last_error()};
}

int ExitCode(xids_status status) {
  switch (status) {
    case XIDS_OK: return 0;
    case XIDS_ERR_USAGE: return 1;
    case XIDS_ERR_DATA:
    case XIDS_ERR_IO: return 2;
    case XIDS_ERR_NUMERIC:
    case XIDS_ERR_BUDGET: return 3;
    case XIDS_ERR_INTERNAL: return 4;
  }
  return 4;
}

struct StringDeleter {
  void operator()(char* s) const { xids_free_string(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<xids_dataset, HandleDeleter<xids_dataset, xids_dataset_free>>;
using Model = std::unique_ptr<xids_model, HandleDeleter<xids_model, xids_model_free>>;
using Rules = std::unique_ptr<xids_rules, HandleDeleter<xids_rules, xids_rules_free>>;
using Service = std::unique_ptr<xids_service, HandleDeleter<xids_service, xids_service_free>>;

Dataset LoadDataset(const std::string& path) {
  xids_dataset* d = nullptr;
  Check(xids_dataset_load(path.c_str(), &d));
  return Dataset(d);
}

Model LoadModel(const std::string& path) {
  xids_model* m = nullptr;
  Check(xids_model_load(path.c_str(), &m));
  return Model(m);
}

Rules LoadRules(const std::string& path) {
  xids_rules* r = nullptr;
  Check(xids_rules_load(path.c_str(), &r));
  return Rules(r);
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{XIDS_ERR_IO, "cannot open '" + path + "' for writing"};
  out << text;
  if (!out.flush()) throw Failure{XIDS_ERR_IO, "failed writing '" + path + "'"};
}

// Writes the report (and optional SVG) and prints its summary line.
void Finish(char* raw_report, const std::string& out_path, const std::string& svg_path = "",
            const std::string& variant = "") {
  OwnedString report(raw_report);
  WriteFile(out_path, report.get());
  if (!svg_path.empty()) {
    char* svg = nullptr;
    Check(xids_report_svg(report.get(), variant.c_str(), &svg));
    OwnedString owned(svg);
    WriteFile(svg_path, owned.get());
  }
  char* line = nullptr;
  Check(xids_report_summary_line(report.get(), &line));
  OwnedString owned_line(line);
  std::cout << owned_line.get() << std::endl;
}

std::string ReportPath(const std::string& report, const std::string& out) {
  return report.empty() ? out + ".json" : report;
}

// Adds `value` under `key` only when the flag was given on the command line.
template <typename T>
void Put(Json* j, const char* key, const std::optional<T>& value) {
  if (value) (*j)[key] = *value;
}

std::string Dump(const Json& j) { return j.empty() ? std::string() : j.dump(); }

int Serve(const std::string& model_path, const std::string& data_path, const std::string& rules_path,
          const std::string& host, int port, double budget, std::uint64_t seed, int threads) {
  Model model = LoadModel(model_path);
  Dataset data = LoadDataset(data_path);
  Rules rules;
  if (!rules_path.empty()) rules = LoadRules(rules_path);
  xids_service* raw = nullptr;
  Check(xids_service_create(model.get(), data.get(), rules.get(), budget, seed, &raw));
  Service service(raw);

  httplib::Server server;
  const int pool = std::max(1, threads);
  server.new_task_queue = [pool] { return new httplib::ThreadPool(static_cast<std::size_t>(pool)); };
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto q = req.target.find('?');
    const std::string query = q == std::string::npos ? std::string() : req.target.substr(q + 1);
    int status = 500;
    char* body = nullptr;
    if (xids_service_handle(service.get(), req.method.c_str(), req.path.c_str(), query.c_str(), req.body.c_str(),
                            &status, &body) != XIDS_OK) {
      res.status = 500;
      res.set_content(Json{{"code", "internal"}, {"message", xids_last_error()}}.dump(), "application/json");
      return;
    }
    OwnedString owned(body);
    res.status = status;
    res.set_content(owned.get(), "application/json");
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Put(".*", handler);
  server.Delete(".*", handler);
  server.Patch(".*", handler);

  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
    if (bound < 0) throw Failure{XIDS_ERR_IO, "cannot bind " + host};
  } else if (!server.bind_to_port(host, port)) {
    throw Failure{XIDS_ERR_IO, "cannot bind " + host + ":" + std::to_string(port) + " (port busy?)"};
  }

  // Stop cleanly on SIGINT/SIGTERM; the signals are consumed by a waiter
  // thread so no work happens in signal context.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  waiter.detach();

  std::cout << "serve host=" << host << " port=" << bound << " threads=" << pool << std::endl;
  server.listen_after_bind();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xids: NSL-KDD intrusion detection with explanations"};
  app.require_subcommand(1);
  std::uint64_t seed = 42;
  int threads = std::max(2u, std::thread::hardware_concurrency());
  app.add_option("--seed", seed, "Global random seed")->capture_default_str();
  app.add_option("--threads", threads, "Request worker threads for serve")->check(CLI::PositiveNumber);
  app.fallthrough();

  std::string train_path, test_path, data_path, model_path, rules_path, out_path, report_path, svg_path, split;
  std::size_t index = 0, count = 0;
  int m = 5;

  auto* ingest = app.add_subcommand("ingest", "Parse and encode raw NSL-KDD train/test files");
  ingest->add_option("--train", train_path, "Training records")->required();
  ingest->add_option("--test", test_path, "Test records")->required();
  ingest->add_option("--out", out_path, "Dataset artifact")->required();
  ingest->add_option("--report", report_path, "Ingest report (default <out>.json)");

  auto* summary = app.add_subcommand("summary", "Descriptive statistics of both splits");
  summary->add_option("--data", data_path, "Dataset artifact")->required();
  summary->add_option("--out", out_path, "Report")->required();

  std::optional<int> epochs, batch;
  std::optional<double> lr, dropout;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::size_t> subsample;
  std::vector<int> layers;
  auto* train = app.add_subcommand("train", "Train the feed-forward classifier");
  train->add_option("--data", data_path, "Dataset artifact")->required();
  train->add_option("--epochs", epochs);
  train->add_option("--lr", lr);
  train->add_option("--batch", batch);
  train->add_option("--dropout", dropout);
  train->add_option("--seed", train_seed, "Training seed (defaults to the global seed)");
  train->add_option("--subsample", subsample, "Train on a seeded subset of N rows");
  train->add_option("--layers", layers, "Layer sizes, input first")->delimiter(',');
  train->add_option("--out", out_path, "Model artifact")->required();
  train->add_option("--report", report_path, "Training report (default <out>.json)");

  auto* eval = app.add_subcommand("eval", "Classifier metrics on one split");
  eval->add_option("--model", model_path)->required();
  eval->add_option("--data", data_path)->required();
  eval->add_option("--split", split)->required()->check(CLI::IsMember({"train", "test"}));
  eval->add_option("--out", out_path)->required();

  std::optional<std::size_t> background;
  std::optional<int> coalitions, samples, top_k;
  std::string variant;
  auto* explain = app.add_subcommand("explain", "Local or global attributions");
  explain->require_subcommand(1);
  CLI::App* explain_method[2] = {explain->add_subcommand("shap", "KernelSHAP attribution of one instance"),
                                 explain->add_subcommand("lime", "LIME attribution of one instance")};
  for (auto* sub : explain_method) {
    sub->add_option("--model", model_path)->required();
    sub->add_option("--data", data_path)->required();
    sub->add_option("--split", split)->required();
    sub->add_option("--index", index)->required();
    sub->add_option("--svg", svg_path);
    sub->add_option("--out", out_path)->required();
  }
  explain_method[0]->add_option("--background", background, "Background rows");
  explain_method[0]->add_option("--coalitions", coalitions, "Coalition budget (0 = default)");
  explain_method[1]->add_option("--samples", samples, "Perturbation samples");
  explain_method[1]->add_option("--top-k", top_k, "Features kept in the surrogate");
  auto* explain_summary = explain->add_subcommand("summary", "SHAP summary over seeded instances");
  explain_summary->add_option("--model", model_path)->required();
  explain_summary->add_option("--data", data_path)->required();
  explain_summary->add_option("--split", split)->default_str("test");
  explain_summary->add_option("--count", count)->required();
  explain_summary->add_option("--background", background);
  explain_summary->add_option("--coalitions", coalitions);
  explain_summary->add_option("--svg", svg_path, "Beeswarm");
  std::string stacked_svg;
  explain_summary->add_option("--stacked-svg", stacked_svg, "Stacked force plot grouped by attack label");
  explain_summary->add_option("--out", out_path)->required();

  std::optional<double> kappa, beta, c_init;
  std::optional<int> max_iterations;
  auto* contrast = app.add_subcommand("contrast", "Pertinent negative or positive");
  contrast->require_subcommand(1);
  CLI::App* contrast_mode[2] = {contrast->add_subcommand("pn", "Pertinent negative"),
                                contrast->add_subcommand("pp", "Pertinent positive")};
  std::optional<std::size_t> contrast_index;
  for (auto* sub : contrast_mode) {
    sub->add_option("--model", model_path)->required();
    sub->add_option("--data", data_path)->required();
    sub->add_option("--split", split)->default_str("test");
    auto* idx = sub->add_option("--index", contrast_index, "Instance index");
    sub->add_option("--count", count, "Explain N seeded instances instead")->excludes(idx);
    sub->add_option("--kappa", kappa);
    sub->add_option("--beta", beta);
    sub->add_option("--c-init", c_init);
    sub->add_option("--max-iterations", max_iterations);
    sub->add_option("--out", out_path)->required();
  }

  std::optional<double> gamma;
  auto* prototypes = app.add_subcommand("prototypes", "ProtoDash neighbors from the training split");
  prototypes->add_option("--model", model_path)->required();
  prototypes->add_option("--data", data_path)->required();
  prototypes->add_option("--split", split)->default_str("test");
  prototypes->add_option("--index", index)->required();
  prototypes->add_option("--m", m)->required();
  prototypes->add_option("--gamma", gamma, "RBF width (default 1/width)");
  prototypes->add_option("--out", out_path)->required();

  std::optional<int> degree, beam, quantiles;
  std::optional<double> lambda0, lambda1;
  auto* rules = app.add_subcommand("rules", "Boolean rule sets");
  rules->require_subcommand(1);
  auto* rules_train = rules->add_subcommand("train", "Learn a DNF rule set by column generation");
  rules_train->add_option("--data", data_path)->required();
  rules_train->add_option("--degree", degree, "Max literals per clause");
  rules_train->add_option("--lambda0", lambda0, "Per-clause penalty");
  rules_train->add_option("--lambda1", lambda1, "Per-literal penalty");
  rules_train->add_option("--beam", beam, "Pricing beam width");
  rules_train->add_option("--quantiles", quantiles, "Thresholds per numeric column");
  rules_train->add_option("--max-iterations", max_iterations, "Column generation rounds");
  rules_train->add_option("--subsample", subsample, "Learn on a seeded subset of N rows");
  rules_train->add_option("--out", out_path, "Rules text file")->required();
  rules_train->add_option("--report", report_path, "Training report (default <out>.json)");
  auto* rules_eval = rules->add_subcommand("eval", "Evaluate a rules file");
  rules_eval->add_option("--rules", rules_path)->required();
  rules_eval->add_option("--data", data_path)->required();
  rules_eval->add_option("--split", split)->required();
  rules_eval->add_option("--out", out_path)->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  double budget = 30.0;
  auto* serve = app.add_subcommand("serve", "HTTP JSON API");
  serve->add_option("--model", model_path)->required();
  serve->add_option("--data", data_path)->required();
  serve->add_option("--port", port, "0 picks a free port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host);
  serve->add_option("--rules", rules_path, "Rule set served by /api/rules");
  serve->add_option("--budget", budget, "Per-request compute budget in seconds");

  // Default split for subcommands that accept one without requiring it.
  split = "test";
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << app.help();
    std::cout << "error status=usage exit=1" << std::endl;
    return 1;
  }

  try {
    char* report = nullptr;
    if (*ingest) {
      xids_dataset* raw = nullptr;
      Check(xids_dataset_ingest(train_path.c_str(), test_path.c_str(), &raw));
      Dataset data(raw);
      Check(xids_dataset_save(data.get(), out_path.c_str()));
      Check(xids_ingest_report(data.get(), seed, &report));
      Finish(report, ReportPath(report_path, out_path));
    } else if (*summary) {
      Dataset data = LoadDataset(data_path);
      Check(xids_summary_report(data.get(), seed, &report));
      Finish(report, out_path);
    } else if (*train) {
      Dataset data = LoadDataset(data_path);
      Json options = Json::object();
      Put(&options, "epochs", epochs);
      Put(&options, "learning_rate", lr);
      Put(&options, "batch_size", batch);
      Put(&options, "dropout", dropout);
      Put(&options, "seed", train_seed);
      Put(&options, "subsample", subsample);
      if (!layers.empty()) options["layers"] = layers;
      xids_model* raw = nullptr;
      Check(xids_train(data.get(), Dump(options).c_str(), seed, &raw, &report));
      Model model(raw);
      OwnedString owned(report);
      Check(xids_model_save(model.get(), out_path.c_str()));
      Finish(owned.release(), ReportPath(report_path, out_path));
    } else if (*eval) {
      Model model = LoadModel(model_path);
      Dataset data = LoadDataset(data_path);
      Check(xids_eval_report(model.get(), data.get(), split.c_str(), seed, &report));
      Finish(report, out_path);
    } else if (*explain) {
      Model model = LoadModel(model_path);
      Dataset data = LoadDataset(data_path);
      Json options = Json::object();
      Put(&options, "background", background);
      Put(&options, "coalitions", coalitions);
      if (*explain_summary) {
        Check(xids_explain_summary_report(model.get(), data.get(), split.c_str(), count, Dump(options).c_str(), seed,
                                          &report));
        OwnedString owned(report);
        if (!stacked_svg.empty()) {
          char* svg = nullptr;
          Check(xids_report_svg(owned.get(), "stacked", &svg));
          OwnedString owned_svg(svg);
          WriteFile(stacked_svg, owned_svg.get());
        }
        Finish(owned.release(), out_path, svg_path);
      } else {
        const bool shap = explain_method[0]->parsed();
        if (!shap) {
          options = Json::object();
          Put(&options, "samples", samples);
          Put(&options, "top_k", top_k);
        }
        Check(xids_explain_report(model.get(), data.get(), shap ? "shap" : "lime", split.c_str(), index,
                                  Dump(options).c_str(), seed, &report));
        Finish(report, out_path, svg_path);
      }
    } else if (*contrast) {
      Model model = LoadModel(model_path);
      Dataset data = LoadDataset(data_path);
      const char* mode = contrast_mode[0]->parsed() ? "pn" : "pp";
      Json options = Json::object();
      Put(&options, "kappa", kappa);
      Put(&options, "beta", beta);
      Put(&options, "c_init", c_init);
      Put(&options, "max_iterations", max_iterations);
      if (count > 0) {
        Check(xids_contrast_batch_report(model.get(), data.get(), mode, split.c_str(), count, Dump(options).c_str(),
                                         seed, &report));
      } else {
        if (!contrast_index) throw Failure{XIDS_ERR_USAGE, "contrast needs --index or --count"};
        Check(xids_contrast_report(model.get(), data.get(), mode, split.c_str(), *contrast_index,
                                   Dump(options).c_str(), seed, &report));
      }
      Finish(report, out_path);
    } else if (*prototypes) {
      Model model = LoadModel(model_path);
      Dataset data = LoadDataset(data_path);
      Json options = Json::object();
      Put(&options, "gamma", gamma);
      Check(xids_prototypes_report(model.get(), data.get(), split.c_str(), index, m, Dump(options).c_str(), seed,
                                   &report));
      Finish(report, out_path);
    } else if (*rules_train) {
      Dataset data = LoadDataset(data_path);
      Json options = Json::object();
      Put(&options, "degree", degree);
      Put(&options, "lambda0", lambda0);
      Put(&options, "lambda1", lambda1);
      Put(&options, "beam_width", beam);
      Put(&options, "quantiles", quantiles);
      Put(&options, "max_iterations", max_iterations);
      Put(&options, "subsample", subsample);
      xids_rules* raw = nullptr;
      Check(xids_rules_train(data.get(), Dump(options).c_str(), seed, &raw, &report));
      Rules learned(raw);
      OwnedString owned(report);
      Check(xids_rules_save(learned.get(), out_path.c_str()));
      Finish(owned.release(), ReportPath(report_path, out_path));
    } else if (*rules_eval) {
      Rules loaded = LoadRules(rules_path);
      Dataset data = LoadDataset(data_path);
      Check(xids_rules_eval_report(loaded.get(), data.get(), split.c_str(), seed, &report));
      Finish(report, out_path);
    } else if (*serve) {
      return Serve(model_path, data_path, rules_path, host, port, budget, seed, threads);
    }
  } catch (const Failure& f) {
    const int code = ExitCode(f.status);
    std::cerr << "xids: " << xids_status_name(f.status) << " error: " << f.message << std::endl;
    std::cout << "error status=" << xids_status_name(f.status) << " exit=" << code << std::endl;
    return code;
  }
  return 0;
}
