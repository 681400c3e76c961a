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


// Rule text format, binding to encoded columns and evaluation.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "core/brcg.hpp"
#include "core/io_util.hpp"

namespace xids::brcg {

const char* LiteralFormName(LiteralForm form) {
  switch (form) {
    case LiteralForm::kLessEqual: return "threshold_le";
    case LiteralForm::kGreater: return "threshold_gt";
    case LiteralForm::kIsTrue: return "is_true";
    case LiteralForm::kIsFalse: return "is_false";
  }
  return "?";
}

LiteralForm ParseLiteralForm(const std::string& name) {
  if (name == "threshold_le") return LiteralForm::kLessEqual;
  if (name == "threshold_gt") return LiteralForm::kGreater;
  if (name == "is_true") return LiteralForm::kIsTrue;
  if (name == "is_false") return LiteralForm::kIsFalse;
  throw DataError("unknown literal form '" + name + "'");
}

bool Literal::Holds(double value) const {
  switch (form) {
    case LiteralForm::kLessEqual: return value <= threshold;
    case LiteralForm::kGreater: return value > threshold;
    case LiteralForm::kIsTrue: return value > kTrueCut;
    case LiteralForm::kIsFalse: return !(value > kTrueCut);
  }
  return false;
}

bool Literal::operator==(const Literal& other) const {
  return column == other.column && form == other.form && threshold_text == other.threshold_text;
}

namespace {

bool IsDecimal(const std::string& s) {
  std::size_t i = 0;
  if (i < s.size() && s[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    std::size_t frac = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++frac;
    if (frac == 0) return false;
  }
  return digits > 0 && i == s.size();
}

bool IsName(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '<' || ch == '>') return false;
  }
  return true;
}

[[noreturn]] void SyntaxError(std::size_t line, std::size_t column, const std::string& what) {
  throw DataError("rules line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

}  // namespace

Literal ThresholdLiteral(const std::string& column, LiteralForm form, const std::string& text) {
  if (!IsDecimal(text)) throw DataError("invalid threshold '" + text + "'");
  Literal lit;
  lit.column = column;
  lit.form = form;
  lit.threshold_text = text;
  lit.threshold = io::ParseExact(text);
  return lit;
}

std::size_t RuleSet::literal_count() const {
  std::size_t n = 0;
  for (const auto& c : clauses) n += c.literals.size();
  return n;
}

std::string LiteralText(const Literal& literal) {
  switch (literal.form) {
    case LiteralForm::kLessEqual: return literal.column + " <= " + literal.threshold_text;
    case LiteralForm::kGreater: return literal.column + " > " + literal.threshold_text;
    case LiteralForm::kIsTrue: return literal.column;
    case LiteralForm::kIsFalse: return literal.column + " not";
  }
  return literal.column;
}

std::string ClauseText(const Clause& clause) {
  std::string out;
  for (std::size_t i = 0; i < clause.literals.size(); ++i) {
    if (i) out += " AND ";
    out += LiteralText(clause.literals[i]);
  }
  return out;
}

std::string PrintRules(const RuleSet& rules) {
  std::string out = std::string(kRuleHeader) + "\n";
  for (const auto& c : rules.clauses) out += ClauseText(c) + "\n";
  return out;
}

namespace {

Literal ParseLiteral(const std::string& text, std::size_t line, std::size_t column) {
  auto threshold = [&](const std::string& op, LiteralForm form) -> std::optional<Literal> {
    const auto pos = text.find(op);
    if (pos == std::string::npos) return std::nullopt;
    const std::string name = text.substr(0, pos);
    const std::string value = text.substr(pos + op.size());
    if (!IsName(name)) SyntaxError(line, column, "invalid column name '" + name + "'");
    if (!IsDecimal(value)) SyntaxError(line, column + pos + op.size(), "expected a decimal, found '" + value + "'");
    Literal lit = ThresholdLiteral(name, form, value);
    if (lit.threshold < 0.0 || lit.threshold > 1.0) {
      SyntaxError(line, column + pos + op.size(), "threshold " + value + " is outside [0, 1]");
    }
    return lit;
  };
  if (auto lit = threshold(" <= ", LiteralForm::kLessEqual)) return *lit;
  if (auto lit = threshold(" > ", LiteralForm::kGreater)) return *lit;
  Literal lit;
  std::string name = text;
  lit.form = LiteralForm::kIsTrue;
  const std::string suffix = " not";
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
    name.resize(name.size() - suffix.size());
    lit.form = LiteralForm::kIsFalse;
  }
  if (!IsName(name)) SyntaxError(line, column, "invalid literal '" + text + "'");
  lit.column = name;
  return lit;
}

void CheckClause(const Clause& clause, std::size_t line) {
  for (std::size_t a = 0; a < clause.literals.size(); ++a) {
    for (std::size_t b = a + 1; b < clause.literals.size(); ++b) {
      const Literal& p = clause.literals[a];
      const Literal& q = clause.literals[b];
      if (p.column != q.column) continue;
      auto contradicts = [](const Literal& x, const Literal& y) {
        if (x.form == LiteralForm::kIsTrue && y.form == LiteralForm::kIsFalse) return true;
        return x.form == LiteralForm::kLessEqual && y.form == LiteralForm::kGreater && x.threshold <= y.threshold;
      };
      if (contradicts(p, q) || contradicts(q, p)) {
        SyntaxError(line, 1, "contradictory literals on column '" + p.column + "'");
      }
    }
  }
}

}  // namespace

RuleSet ParseRules(const std::string& text) {
  RuleSet rules;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      if (line != kRuleHeader) SyntaxError(line_no, 1, std::string("expected header '") + kRuleHeader + "'");
      header = true;
      continue;
    }
    Clause clause;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(" AND ", start);
      const std::string piece = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      if (piece.empty()) SyntaxError(line_no, start + 1, "empty literal");
      clause.literals.push_back(ParseLiteral(piece, line_no, start + 1));
      if (pos == std::string::npos) break;
      start = pos + 5;
    }
    CheckClause(clause, line_no);
    rules.clauses.push_back(std::move(clause));
  }
  return rules;
}

RuleSet LoadRulesFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open rules file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseRules(buf.str());
}

void SaveRulesFile(const RuleSet& rules, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write rules file '" + path + "'");
  out << PrintRules(rules);
  if (!out) throw IoError("write failed for '" + path + "'");
}

BoundRules Bind(const RuleSet& rules, const std::vector<std::string>& column_names) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < column_names.size(); ++i) index.emplace(column_names[i], static_cast<int>(i));
  BoundRules bound;
  for (const auto& clause : rules.clauses) {
    std::vector<std::pair<int, const Literal*>> b;
    for (const auto& lit : clause.literals) {
      const auto it = index.find(lit.column);
      if (it == index.end()) throw DataError("rule refers to unknown column '" + lit.column + "'");
      b.emplace_back(it->second, &lit);
    }
    bound.clauses.push_back(std::move(b));
  }
  return bound;
}

bool ClauseFires(const std::vector<std::pair<int, const Literal*>>& clause, const float* row) {
  for (const auto& [col, lit] : clause) {
    if (!lit->Holds(static_cast<double>(row[col]))) return false;
  }
  return true;
}

std::vector<int> FiredClauses(const RuleSet& rules, const std::vector<std::string>& column_names,
                              const Vector& row) {
  if (row.size() != static_cast<Eigen::Index>(column_names.size())) {
    throw UsageError("rules: expected " + std::to_string(column_names.size()) + " values");
  }
  const BoundRules bound = Bind(rules, column_names);
  std::vector<float> values(static_cast<std::size_t>(row.size()));
  for (Eigen::Index j = 0; j < row.size(); ++j) values[static_cast<std::size_t>(j)] = static_cast<float>(row[j]);
  std::vector<int> fired;
  for (std::size_t k = 0; k < bound.clauses.size(); ++k) {
    if (ClauseFires(bound.clauses[k], values.data())) fired.push_back(static_cast<int>(k));
  }
  return fired;
}

RuleEvaluation EvaluateRules(const RuleSet& rules, const std::vector<std::string>& column_names,
                             const dataset::EncodedMatrix& data) {
  if (data.cols() != static_cast<int>(column_names.size())) {
    throw DataError("rules: data width differs from the schema");
  }
  const BoundRules bound = Bind(rules, column_names);
  RuleEvaluation eval;
  eval.predictions.assign(data.rows(), 0);
  eval.clause_stats.assign(bound.clauses.size(), {});
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const float* row = data.values.data() + static_cast<std::ptrdiff_t>(i) * data.cols();
    for (std::size_t k = 0; k < bound.clauses.size(); ++k) {
      if (!ClauseFires(bound.clauses[k], row)) continue;
      eval.predictions[i] = 1;
      ++eval.clause_stats[k].fires;
      if (data.labels[i] == 1) ++eval.clause_stats[k].true_positives;
    }
  }
  eval.metrics = nn::MetricsFromPredictions(eval.predictions, data.labels);
  return eval;
}

}  // namespace xids::brcg
