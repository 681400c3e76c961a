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


// Boolean rule sets in disjunctive normal form, learned by LP column
// generation: a restricted master LP over clause-inclusion variables prices
// new conjunctions through a beam search over binarized literal columns.

#ifndef XIDS_CORE_BRCG_HPP_
#define XIDS_CORE_BRCG_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/dataset.hpp"
#include "core/nn.hpp"

namespace xids::brcg {

enum class LiteralForm { kLessEqual, kGreater, kIsTrue, kIsFalse };

const char* LiteralFormName(LiteralForm form);  // threshold_le, threshold_gt, is_true, is_false
LiteralForm ParseLiteralForm(const std::string& name);

// Boolean columns count as true above this value.
inline constexpr double kTrueCut = 0.5;

struct Literal {
  std::string column;
  LiteralForm form = LiteralForm::kIsTrue;
  double threshold = 0.0;
  std::string threshold_text;  // decimal as printed, threshold forms only

  bool Holds(double value) const;
  bool operator==(const Literal& other) const;
};

// Literal with a threshold chosen as printed text.
Literal ThresholdLiteral(const std::string& column, LiteralForm form, const std::string& text);

struct Clause {
  std::vector<Literal> literals;
};

struct ClauseStats {
  std::size_t fires = 0;
  std::size_t true_positives = 0;
};

struct RuleSet {
  std::vector<Clause> clauses;
  double lambda0 = 0.001;
  double lambda1 = 0.001;
  std::string provenance = "parsed";  // trained | parsed
  std::vector<ClauseStats> clause_stats;  // training statistics, may be empty
  std::size_t literal_count() const;
};

// Rule grammar. Header line, then one clause per line with literals joined
// by " AND "; a literal is "name <= d", "name > d", "name" or "name not".
inline constexpr const char* kRuleHeader = "predict attack if any:";

std::string LiteralText(const Literal& literal);
std::string ClauseText(const Clause& clause);
std::string PrintRules(const RuleSet& rules);
// Throws DataError("rules line L, column C: ...") on syntax errors. Column
// names are not checked here.
RuleSet ParseRules(const std::string& text);
RuleSet LoadRulesFile(const std::string& path);
void SaveRulesFile(const RuleSet& rules, const std::string& path);

// Column index per literal; throws DataError naming an unknown column.
struct BoundRules {
  std::vector<std::vector<std::pair<int, const Literal*>>> clauses;
};
BoundRules Bind(const RuleSet& rules, const std::vector<std::string>& column_names);

bool ClauseFires(const std::vector<std::pair<int, const Literal*>>& clause, const float* row);
std::vector<int> FiredClauses(const RuleSet& rules, const std::vector<std::string>& column_names,
                              const Vector& row);

struct RuleEvaluation {
  std::vector<int> predictions;
  nn::Metrics metrics;
  std::vector<ClauseStats> clause_stats;
};

RuleEvaluation EvaluateRules(const RuleSet& rules, const std::vector<std::string>& column_names,
                             const dataset::EncodedMatrix& data);

// ---------------------------------------------------------------------------
// Binarization.

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}
  void Set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool Test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  std::size_t size() const { return n_; }
  std::size_t Count() const;
  std::size_t CountAnd(const Bits& other) const;
  Bits And(const Bits& other) const;
  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

struct BrcgConfig {
  int max_degree = 3;
  int beam_width = 10;
  int max_iterations = 25;
  double lambda0 = 0.001;
  double lambda1 = 0.001;
  int quantiles = 10;  // decile thresholds
  int columns_per_iteration = 3;
  std::function<void()> budget;
  void Validate() const;
};

struct LiteralColumn {
  Literal literal;
  int column = 0;
};

struct BinarizedMatrix {
  std::vector<LiteralColumn> literals;
  std::vector<Bits> bits;  // one bitset over rows per literal
  std::size_t rows = 0;
  std::string schema_fingerprint;
};

// `boolean` marks one-hot and binary columns.
BinarizedMatrix BinarizeColumns(const RowMatrixF& values, const std::vector<std::string>& names,
                                const std::vector<bool>& boolean, const BrcgConfig& config);
BinarizedMatrix Binarize(const dataset::EncodedMatrix& data, const dataset::FeatureSchema& schema,
                         const BrcgConfig& config);

// Shortest decimal t with low <= t < high (as doubles).
std::string ShortestThreshold(double low, double high);

struct TrainReport {
  RuleSet rules;
  std::vector<double> lp_objective;  // restricted master optimum per iteration
  int iterations = 0;
  bool iteration_cap = false;
  std::size_t candidate_clauses = 0;  // columns generated in total
  double train_accuracy = 0.0;
};

TrainReport TrainBrcg(const BinarizedMatrix& bin, const std::vector<int>& labels, const BrcgConfig& config);

}  // namespace xids::brcg

#endif  // XIDS_CORE_BRCG_HPP_
