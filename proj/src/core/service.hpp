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


// HTTP JSON API over one loaded model and dataset. Requests are handled by a
// pure function of (method, path, query, body) so the routing is testable
// without sockets; the CLI binds it to an HTTP server.

#ifndef XIDS_CORE_SERVICE_HPP_
#define XIDS_CORE_SERVICE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "core/brcg.hpp"
#include "core/pipeline.hpp"

namespace xids::service {

struct ServiceConfig {
  double budget_seconds = 30.0;  // per explanation request
  std::uint64_t seed = 42;
  std::size_t max_instances = 500;  // per /api/instances page
  int max_prototypes = 100;
};

struct Response {
  int status = 200;
  std::string body;
};

using Query = std::map<std::string, std::string>;

// "a=1&b=x%20y" -> {a:1, b:"x y"}; later keys win.
Query ParseQuery(const std::string& query);

class Service {
 public:
  Service(std::shared_ptr<const nn::MlpModel> model, std::shared_ptr<const dataset::DatasetArtifact> data,
          std::optional<brcg::RuleSet> rules, ServiceConfig config);

  Response Handle(const std::string& method, const std::string& path, const Query& query,
                  const std::string& body) const;

  const pipeline::Engine& engine() const { return engine_; }
  const ServiceConfig& config() const { return config_; }

 private:
  pipeline::Json Meta() const;
  pipeline::Json Instances(const Query& query) const;
  pipeline::Json Predict(const pipeline::Json& body) const;
  pipeline::Json Explain(const pipeline::Json& body) const;
  pipeline::Json Contrast(const pipeline::Json& body) const;
  pipeline::Json Prototypes(const pipeline::Json& body) const;
  pipeline::Json Rules() const;
  pipeline::Json ApplyRules(const pipeline::Json& body) const;

  Vector Features(const pipeline::Json& body) const;
  pipeline::Deadline RequestDeadline(const pipeline::Json& body) const;

  pipeline::Engine engine_;
  ServiceConfig config_;
  std::optional<brcg::RuleSet> rules_;
  pipeline::Json rules_json_;
};

}  // namespace xids::service

#endif  // XIDS_CORE_SERVICE_HPP_
