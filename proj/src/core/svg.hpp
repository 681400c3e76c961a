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


// Static SVG views of plot-bearing reports: force plot, stacked force plot,
// summary beeswarm and local surrogate bars.

#ifndef XIDS_CORE_SVG_HPP_
#define XIDS_CORE_SVG_HPP_

#include <string>

#include "core/report.hpp"

namespace xids::svg {

using report::Json;

// Payload shapes are those produced by the report module.
std::string ForcePlot(const Json& force);
std::string LimeBars(const Json& attribution, const Json& probabilities = Json());
std::string Beeswarm(const Json& summary, int max_features = 20);
std::string StackedForce(const Json& stacked);

// Dispatch on the bundle kind. `variant` selects between views of one kind
// ("stacked" for summary reports); empty picks the default view. Throws
// UsageError for reports without a plot.
std::string Render(const Json& bundle, const std::string& variant = "");

}  // namespace xids::svg

#endif  // XIDS_CORE_SVG_HPP_
