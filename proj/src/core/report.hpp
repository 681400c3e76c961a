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


// JSON forms of every result type and the report envelope written by each
// pipeline stage. Objects serialize with sorted keys and shortest round-trip
// doubles, so equal inputs give byte-equal documents.

#ifndef XIDS_CORE_REPORT_HPP_
#define XIDS_CORE_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/brcg.hpp"
#include "core/cem.hpp"
#include "core/common.hpp"
#include "core/dataset.hpp"
#include "core/nn.hpp"
#include "core/protodash.hpp"
#include "core/shap.hpp"

namespace xids::report {

using Json = nlohmann::json;

inline constexpr const char* kFormat = "xids-report";
inline constexpr int kFormatVersion = 1;

const char* ToolVersion();

Json VectorJson(const Vector& v);
Vector VectorFromJson(const Json& j);

Json MetricsJson(const nn::Metrics& m);
Json HistoryJson(const nn::TrainHistory& h);
Json TableStatsJson(const dataset::TableStats& s);
Json SummaryJson(const dataset::DatasetSummary& s);
Json SchemaJson(const dataset::FeatureSchema& schema);

Json AttributionJson(const shap::Attribution& a);
Json ForceJson(const shap::ForcePlotData& f);
Json SummaryDataJson(const shap::SummaryData& s);
Json StackedJson(const shap::StackedForceData& s);

Json PredictionJson(const cem::Prediction& p);
Json ContrastJson(const cem::ContrastiveResult& r);
Json CemStatsJson(const cem::BatchStats& s);

Json PrototypeSetJson(const protodash::PrototypeSet& p);
// `raw_lines` (optional) holds the source record text per training row.
Json NeighborTableJson(const protodash::NeighborTable& t, const std::vector<std::string>& column_names,
                       const std::vector<std::string>* raw_lines);

Json LiteralJson(const brcg::Literal& l);
Json RuleSetJson(const brcg::RuleSet& r);

// Stable fingerprint of a JSON value (serialized with sorted keys).
std::string Fingerprint(const Json& value);

// {"format","version","kind","metadata":{...},"payload","summary"}; the
// summary is a flat object of scalars for one-line reporting.
Json Bundle(const std::string& kind, Json payload, Json summary, std::uint64_t seed, const Json& config);

std::string Dump(const Json& j);  // compact, trailing newline
Json Parse(const std::string& text);  // throws DataError

// "kind key=value ..." on one line, keys sorted.
std::string SummaryLine(const Json& bundle);

}  // namespace xids::report

#endif  // XIDS_CORE_REPORT_HPP_
