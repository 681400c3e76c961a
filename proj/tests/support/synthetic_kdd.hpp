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


// Generator of NSL-KDD-shaped records for tests that cannot rely on the real
// files. Rows follow a few hand-made traffic profiles (plain sessions, SYN
// floods, ICMP echo floods, fragment attacks, scans, password guessing) so
// the classes are learnable, and the first rows cover every protocol,
// service and flag so the encoded width matches the real data (122).

#ifndef XIDS_TESTS_SUPPORT_SYNTHETIC_KDD_HPP_
#define XIDS_TESTS_SUPPORT_SYNTHETIC_KDD_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace xids::testing {

const std::vector<std::string>& KddProtocols();
const std::vector<std::string>& KddServices();
const std::vector<std::string>& KddFlags();

struct SyntheticKddOptions {
  std::size_t rows = 1000;
  std::uint64_t seed = 1;
  double attack_fraction = 0.45;
  // Prefix rows that enumerate every category value.
  bool cover_vocabulary = true;
  // Fraction of rows using a service name never seen in training data.
  double novel_service_fraction = 0.0;
  double label_noise = 0.0;
};

// Newline-terminated records, 43 comma-separated fields each.
std::string SyntheticKddText(const SyntheticKddOptions& options);

// Ingested artifact with a train and a test split drawn with different seeds.
dataset::DatasetArtifact SyntheticArtifact(std::size_t train_rows, std::size_t test_rows, std::uint64_t seed);

}  // namespace xids::testing

#endif  // XIDS_TESTS_SUPPORT_SYNTHETIC_KDD_HPP_
