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


#include <gtest/gtest.h>

#include "core/brcg.hpp"
#include "core/report.hpp"
#include "core/service.hpp"
#include "synthetic_kdd.hpp"

namespace xids::service {
namespace {

using report::Json;

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto data = std::make_shared<dataset::DatasetArtifact>(testing::SyntheticArtifact(600, 120, 31));
    pipeline::TrainOptions o = pipeline::TrainOptions::FromJson(
        {{"epochs", 8}, {"batch_size", 64}, {"layers", {122, 24, 2}}, {"learning_rate", 0.003}});
    auto model = std::make_shared<nn::MlpModel>(pipeline::TrainModel(*data, o, {}).model);
    auto rules = brcg::ParseRules(
        "predict attack if any:\nsame_srv_rate <= 0.32\nwrong_fragment > 0\n");
    ServiceConfig cfg;
    cfg.budget_seconds = 20;
    with_rules_ = new Service(model, data, rules, cfg);
    without_rules_ = new Service(model, data, std::nullopt, cfg);
  }
  static void TearDownTestSuite() {
    delete with_rules_;
    delete without_rules_;
  }

  static Json Call(const Service& s, const std::string& method, const std::string& path, const Json& body,
                   int expected_status, const std::string& query = "") {
    const Response r = s.Handle(method, path, ParseQuery(query), body.is_null() ? "" : body.dump());
    EXPECT_EQ(r.status, expected_status) << method << " " << path << ": " << r.body;
    return Json::parse(r.body);
  }
  static Json Features(int index) {
    const Vector x = with_rules_->engine().Instance("test", static_cast<std::size_t>(index));
    return report::VectorJson(x);
  }

  static Service* with_rules_;
  static Service* without_rules_;
};

Service* ServiceTest::with_rules_ = nullptr;
Service* ServiceTest::without_rules_ = nullptr;

TEST(Query, Parse) {
  const Query q = ParseQuery("split=test&offset=10&name=a%20b+c&empty=");
  EXPECT_EQ(q.at("split"), "test");
  EXPECT_EQ(q.at("offset"), "10");
  EXPECT_EQ(q.at("name"), "a b c");
  EXPECT_EQ(q.at("empty"), "");
}

TEST_F(ServiceTest, Meta) {
  const Json m = Call(*with_rules_, "GET", "/api/meta", nullptr, 200);
  EXPECT_EQ(m["encoded_width"], 122);
  EXPECT_EQ(m["columns"].size(), 122u);
  EXPECT_EQ(m["rules_loaded"], true);
  EXPECT_EQ(Call(*without_rules_, "GET", "/api/meta", nullptr, 200)["rules_loaded"], false);
}

TEST_F(ServiceTest, InstancesPaging) {
  const Json page = Call(*with_rules_, "GET", "/api/instances", nullptr, 200, "split=test&offset=5&limit=3");
  ASSERT_EQ(page["rows"].size(), 3u);
  EXPECT_EQ(page["rows"][0]["index"], 5);
  EXPECT_EQ(page["rows"][0]["features"].size(), 122u);
  EXPECT_EQ(page["total"], 120);
  Call(*with_rules_, "GET", "/api/instances", nullptr, 422, "split=validation");
  Call(*with_rules_, "GET", "/api/instances", nullptr, 422, "limit=0");
  Call(*with_rules_, "GET", "/api/instances", nullptr, 422, "limit=100000");
  Call(*with_rules_, "GET", "/api/instances", nullptr, 422, "offset=121");
  Call(*with_rules_, "GET", "/api/instances", nullptr, 400, "offset=abc");
}

TEST_F(ServiceTest, PredictValidatesFeatures) {
  const Json p = Call(*with_rules_, "POST", "/api/predict", {{"features", Features(0)}}, 200);
  EXPECT_NEAR(p["probabilities"][0].get<double>() + p["probabilities"][1].get<double>(), 1.0, 1e-12);

  Json short_row = Features(0);
  short_row.erase(short_row.size() - 1);
  const Json e = Call(*with_rules_, "POST", "/api/predict", {{"features", short_row}}, 400);
  EXPECT_EQ(e["code"], "malformed");
  EXPECT_NE(e["message"].get<std::string>().find("expected 122"), std::string::npos);

  Json out_of_range = Features(0);
  out_of_range[4] = 1.5;
  EXPECT_EQ(Call(*with_rules_, "POST", "/api/predict", {{"features", out_of_range}}, 422)["code"], "out_of_range");
  Json text = Features(0);
  text[0] = "x";
  Call(*with_rules_, "POST", "/api/predict", {{"features", text}}, 400);
  Call(*with_rules_, "POST", "/api/predict", {{"features", Features(0)}, {"extra", 1}}, 400);
  EXPECT_EQ(with_rules_->Handle("POST", "/api/predict", {}, "{not json").status, 400);
  EXPECT_EQ(with_rules_->Handle("POST", "/api/predict", {}, "[1,2]").status, 400);
}

TEST_F(ServiceTest, RoutingErrors) {
  EXPECT_EQ(Call(*with_rules_, "GET", "/api/nothing", nullptr, 404)["code"], "not_found");
  EXPECT_EQ(Call(*with_rules_, "GET", "/api/predict", nullptr, 405)["code"], "method_not_allowed");
  EXPECT_EQ(Call(*with_rules_, "POST", "/api/meta", Json::object(), 405)["code"], "method_not_allowed");
}

TEST_F(ServiceTest, ExplainShapAndLime) {
  const Json s = Call(*with_rules_, "POST", "/api/explain",
                      {{"method", "shap"}, {"features", Features(2)}, {"options", {{"background", 10}, {"coalitions", 300}}}},
                      200);
  const Json& a = s["attribution"];
  double sum = 0;
  for (const auto& v : a["phi"]) sum += v.get<double>();
  EXPECT_NEAR(sum + a["base_value"].get<double>(), a["model_output"].get<double>(), 1e-9);
  EXPECT_EQ(s["budget"]["reduced"], false);

  const Json l = Call(*with_rules_, "POST", "/api/explain",
                      {{"method", "lime"}, {"features", Features(2)}, {"options", {{"samples", 400}}}}, 200);
  EXPECT_EQ(l["attribution"]["method"], "lime");
  Call(*with_rules_, "POST", "/api/explain", {{"method", "anchors"}, {"features", Features(2)}}, 400);
  Call(*with_rules_, "POST", "/api/explain", {{"method", "shap"}, {"features", Features(2)}, {"options", {{"bogus", 1}}}},
       400);
  Call(*with_rules_, "POST", "/api/explain", {{"method", "shap"}, {"features", Features(2)}, {"budget_seconds", 999}},
       422);
  Call(*with_rules_, "POST", "/api/explain", {{"method", "shap"}, {"features", Features(2)}, {"budget_seconds", 0}},
       422);
}

TEST_F(ServiceTest, BudgetExceededIs503) {
  const Json e = Call(*with_rules_, "POST", "/api/contrast",
                      {{"mode", "pn"}, {"features", Features(1)}, {"budget_seconds", 1e-9}}, 503);
  EXPECT_EQ(e["code"], "budget_exceeded");
  Call(*with_rules_, "POST", "/api/prototypes", {{"features", Features(1)}, {"budget_seconds", 1e-9}}, 503);
}

TEST_F(ServiceTest, ContrastPnFlipsClassOnRecheck) {
  for (int i = 0; i < 5; ++i) {
    const Json pn = Call(*with_rules_, "POST", "/api/contrast", {{"mode", "pn"}, {"features", Features(i)}}, 200);
    if (!pn["converged"].get<bool>()) continue;
    Json updated = Json::array();
    for (std::size_t j = 0; j < pn["instance"].size(); ++j) {
      updated.push_back(std::clamp(pn["instance"][j].get<double>() + pn["delta"][j].get<double>(), 0.0, 1.0));
    }
    const Json p = Call(*with_rules_, "POST", "/api/predict", {{"features", updated}}, 200);
    EXPECT_EQ(p["class"], pn["prediction_after"]["class"]);
    EXPECT_NE(p["class"], pn["prediction_before"]["class"]);
  }
  const Json pp = Call(*with_rules_, "POST", "/api/contrast", {{"mode", "pp"}, {"features", Features(0)}}, 200);
  EXPECT_EQ(pp["mode"], "pp");
  Call(*with_rules_, "POST", "/api/contrast", {{"mode", "xx"}, {"features", Features(0)}}, 400);
}

TEST_F(ServiceTest, Prototypes) {
  const Json p = Call(*with_rules_, "POST", "/api/prototypes", {{"features", Features(3)}, {"m", 3}}, 200);
  EXPECT_EQ(p["prototypes"].size(), 3u);
  double total = 0;
  for (const auto& proto : p["prototypes"]) total += proto["weight"].get<double>();
  EXPECT_GT(total, 0.0);
  Call(*with_rules_, "POST", "/api/prototypes", {{"features", Features(3)}, {"m", 0}}, 422);
  Call(*with_rules_, "POST", "/api/prototypes", {{"features", Features(3)}, {"m", 101}}, 422);
  Call(*with_rules_, "POST", "/api/prototypes", {{"features", Features(3)}, {"m", "3"}}, 400);
  Call(*with_rules_, "POST", "/api/prototypes", {{"features", Features(3)}, {"gamma", -1}}, 422);
}

TEST_F(ServiceTest, RulesAndApply) {
  const Json r = Call(*with_rules_, "GET", "/api/rules", nullptr, 200);
  EXPECT_EQ(r["rules"]["clauses"].size(), 2u);
  EXPECT_TRUE(r["fires"].contains("test"));

  Json x = Features(0);
  const auto& names = with_rules_->engine().column_names();
  const auto col = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
  };
  x[col("same_srv_rate")] = 1.0;
  x[col("wrong_fragment")] = 0.0;
  Json a = Call(*with_rules_, "POST", "/api/rules/apply", {{"features", x}}, 200);
  EXPECT_EQ(a["prediction"], 0);
  EXPECT_TRUE(a["fired"].empty());
  x[col("same_srv_rate")] = 0.1;
  a = Call(*with_rules_, "POST", "/api/rules/apply", {{"features", x}}, 200);
  EXPECT_EQ(a["prediction"], 1);
  EXPECT_EQ(a["fired"], Json::array({0}));

  Call(*without_rules_, "GET", "/api/rules", nullptr, 404);
  Call(*without_rules_, "POST", "/api/rules/apply", {{"features", x}}, 404);
}

}  // namespace
}  // namespace xids::service
