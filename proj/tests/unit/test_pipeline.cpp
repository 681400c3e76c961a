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

#include <algorithm>
#include <thread>

#include "core/pipeline.hpp"
#include "synthetic_kdd.hpp"

namespace xids::pipeline {
namespace {

struct Fixture {
  std::shared_ptr<const dataset::DatasetArtifact> data;
  std::shared_ptr<const nn::MlpModel> model;
  std::unique_ptr<Engine> engine;
};

const Fixture& Shared() {
  static const Fixture f = [] {
    Fixture out;
    out.data = std::make_shared<dataset::DatasetArtifact>(testing::SyntheticArtifact(800, 200, 21));
    TrainOptions o = TrainOptions::FromJson({{"epochs", 8}, {"batch_size", 64}, {"layers", {122, 24, 2}},
                                             {"learning_rate", 0.003}});
    out.model = std::make_shared<nn::MlpModel>(TrainModel(*out.data, o, {}).model);
    out.engine = std::make_unique<Engine>(out.model, out.data);
    return out;
  }();
  return f;
}

TEST(Options, UnknownAndMistypedKeysAreUsageErrors) {
  EXPECT_THROW(TrainOptions::FromJson({{"epoch", 3}}), UsageError);
  EXPECT_THROW(TrainOptions::FromJson({{"epochs", "3"}}), UsageError);
  EXPECT_THROW(ShapOptions::FromJson({{"background", -1}}), UsageError);
  EXPECT_THROW(ShapOptions::FromJson({{"background", 0}}), UsageError);
  EXPECT_THROW(LimeOptions::FromJson({{"samples", 1.5}}), UsageError);
  EXPECT_THROW(CemOptions::FromJson({{"kappa", -1.0}}), UsageError);
  EXPECT_THROW(RulesOptions::FromJson({{"degree", 0}}), UsageError);
  const auto t = TrainOptions::FromJson({{"epochs", 3}, {"seed", 9}});
  EXPECT_EQ(t.epochs, 3);
  EXPECT_EQ(t.seed.value(), 9u);
  EXPECT_EQ(ShapOptions::FromJson(Json::object()).background, 100u);
}

TEST(Deadline, UnlimitedAndExpired) {
  const Deadline none;
  EXPECT_FALSE(none.limited());
  EXPECT_NO_THROW(none.Check());
  EXPECT_FALSE(static_cast<bool>(none.AsCheck()));
  const Deadline tiny(1e-6);
  std::this_thread::sleep_for(std::chrono::milliseconds(2));
  EXPECT_THROW(tiny.Check(), BudgetExceeded);
  EXPECT_LE(tiny.remaining(), 0.0);
}

TEST(SampleRows, DistinctSortedSeeded) {
  const auto a = SampleRows(1000, 50, 3);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_EQ(a, SampleRows(1000, 50, 3));
  EXPECT_NE(a, SampleRows(1000, 50, 4));
  EXPECT_EQ(SampleRows(5, 10, 1).size(), 5u);
}

TEST(Stages, IngestReportsUnseenCategories) {
  testing::SyntheticKddOptions train{300, 1};
  testing::SyntheticKddOptions test{40, 2};
  test.cover_vocabulary = false;
  test.novel_service_fraction = 0.5;
  const auto data = dataset::IngestText(testing::SyntheticKddText(train), testing::SyntheticKddText(test));
  const Json r = IngestReport(data, {});
  EXPECT_EQ(r["kind"], "ingest");
  EXPECT_EQ(r["summary"]["columns"], 122);
  ASSERT_TRUE(r["payload"]["unseen_categories"].contains("test"));
  EXPECT_FALSE(r["payload"]["unseen_categories"]["test"]["service"].empty());
}

TEST(Stages, TrainRejectsWrongInputLayer) {
  const auto& f = Shared();
  EXPECT_THROW(TrainModel(*f.data, TrainOptions::FromJson({{"epochs", 1}, {"layers", {10, 4, 2}}}), {}),
               UsageError);
}

TEST(Stages, ReportsAreDeterministic) {
  const auto& f = Shared();
  const RunContext ctx{5, 1};
  EXPECT_EQ(report::Dump(EvalReport(*f.model, *f.data, "test", ctx)),
            report::Dump(EvalReport(*f.model, *f.data, "test", ctx)));
  const Json opts = {{"background", 10}, {"coalitions", 200}};
  const Json a = ExplainInstanceReport(*f.engine, "shap", "test", 3, opts, ctx);
  EXPECT_EQ(report::Dump(a), report::Dump(ExplainInstanceReport(*f.engine, "shap", "test", 3, opts, ctx)));
  EXPECT_EQ(a["kind"], "attribution");
  const Json attr = a["payload"]["attribution"];
  EXPECT_NEAR(attr["diagnostics"]["efficiency_gap"].get<double>(), 0.0, 1e-9);
  EXPECT_EQ(attr["phi"].size(), 122u);

  const Json lime = ExplainInstanceReport(*f.engine, "lime", "test", 3, {{"samples", 500}}, ctx);
  EXPECT_EQ(report::Dump(lime), report::Dump(ExplainInstanceReport(*f.engine, "lime", "test", 3,
                                                                   {{"samples", 500}}, ctx)));
  EXPECT_THROW(ExplainInstanceReport(*f.engine, "anchors", "test", 3, Json::object(), ctx), UsageError);
  EXPECT_THROW(ExplainInstanceReport(*f.engine, "shap", "test", 100000, Json::object(), ctx), UsageError);
}

TEST(Stages, SummaryContrastPrototypes) {
  const auto& f = Shared();
  const RunContext ctx{5, 1};
  const Json s = ExplainSummaryReport(*f.engine, "test", 6, {{"background", 8}, {"coalitions", 150}}, ctx);
  EXPECT_EQ(s["payload"]["summary"]["instances"], 6);
  EXPECT_EQ(s["payload"]["top10"].size(), 10u);

  const Json pn = ContrastReport(*f.engine, cem::Mode::kPertinentNegative, "test", 0, Json::object(), ctx);
  EXPECT_EQ(pn["kind"], "contrastive");
  EXPECT_EQ(report::Dump(pn),
            report::Dump(ContrastReport(*f.engine, cem::Mode::kPertinentNegative, "test", 0, Json::object(), ctx)));
  const Json batch = ContrastBatchReport(*f.engine, cem::Mode::kPertinentPositive, "test", 4, Json::object(), ctx);
  EXPECT_EQ(batch["payload"]["results"].size(), 4u);

  const Json p = PrototypesReport(*f.engine, "test", 2, 4, Json::object(), ctx);
  EXPECT_EQ(p["payload"]["prototypes"].size(), 4u);
  for (const auto& proto : p["payload"]["prototypes"]) {
    EXPECT_FALSE(proto["raw"].get<std::string>().empty());
    EXPECT_EQ(proto["predicted_class"], p["payload"]["query_class"]);
  }
  EXPECT_THROW(PrototypesReport(*f.engine, "test", 2, 0, Json::object(), ctx), UsageError);
}

TEST(Stages, RulesTrainAndEval) {
  const auto& f = Shared();
  const RulesOutcome r = TrainRules(*f.data, RulesOptions::FromJson({{"degree", 3}}), {});
  EXPECT_EQ(r.report["kind"], "rules");
  EXPECT_LE(r.rules.clauses.size(), 10u);
  const Json e = RulesEvalReport(r.rules, *f.data, "test", {});
  EXPECT_GE(e["payload"]["metrics"]["accuracy"].get<double>(), 0.85);
  EXPECT_EQ(report::Dump(r.report), report::Dump(TrainRules(*f.data, RulesOptions::FromJson({{"degree", 3}}), {}).report));
}

TEST(Engine, RejectsMismatchedModel) {
  const auto& f = Shared();
  auto small = std::make_shared<nn::MlpModel>(nn::InitModel({10, 4, 2}, 0.0, 1));
  EXPECT_THROW(Engine(small, f.data), DataError);
  EXPECT_THROW(f.engine->Instance("validation", 0), UsageError);
}

TEST(Engine, ShapReducesCoalitionsUnderTightBudget) {
  const auto& f = Shared();
  const Vector x = f.engine->Instance("test", 1);
  int used = 0;
  bool reduced = false;
  const ShapOptions o = ShapOptions::FromJson({{"background", 50}, {"coalitions", 200000}});
  const auto attr = f.engine->ShapAttribution(x, o, 1, Deadline(2.0), &used, &reduced);
  EXPECT_TRUE(reduced);
  EXPECT_LT(used, 200000);
  EXPECT_NEAR(attr.phi.sum() + attr.base_value, attr.model_output, 1e-9);
}

}  // namespace
}  // namespace xids::pipeline
