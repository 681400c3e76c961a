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


#include "core/brcg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "core/io_util.hpp"
#include "core/numopt.hpp"

namespace xids::brcg {

std::size_t Bits::Count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::size_t Bits::CountAnd(const Bits& other) const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) c += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
  return c;
}

Bits Bits::And(const Bits& other) const {
  Bits out = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= other.words_[i];
  return out;
}

void BrcgConfig::Validate() const {
  if (max_degree < 1) throw UsageError("brcg: degree must be >= 1");
  if (beam_width < 1) throw UsageError("brcg: beam width must be >= 1");
  if (max_iterations < 0) throw UsageError("brcg: iteration cap must be >= 0");
  if (lambda0 < 0 || lambda1 < 0) throw UsageError("brcg: complexity penalties must be >= 0");
  if (quantiles < 2) throw UsageError("brcg: need at least 2 quantiles");
  if (columns_per_iteration < 1) throw UsageError("brcg: columns per iteration must be >= 1");
}

std::string ShortestThreshold(double low, double high) {
  char buf[64];
  for (int p = 0; p <= 17; ++p) {
    const double scale = std::pow(10.0, p);
    for (double bump : {0.0, 1.0}) {
      const double v = (std::ceil(low * scale) + bump) / scale;
      std::snprintf(buf, sizeof(buf), "%.*f", p, v);
      const double parsed = io::ParseExact(buf);
      if (parsed >= low && parsed < high) return buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "%.25f", low);
  return buf;
}

BinarizedMatrix BinarizeColumns(const RowMatrixF& values, const std::vector<std::string>& names,
                                const std::vector<bool>& boolean, const BrcgConfig& config) {
  config.Validate();
  const Eigen::Index n = values.rows();
  const Eigen::Index d = values.cols();
  if (static_cast<Eigen::Index>(names.size()) != d || static_cast<Eigen::Index>(boolean.size()) != d) {
    throw UsageError("binarize: one name and kind per column is required");
  }
  BinarizedMatrix bin;
  bin.rows = static_cast<std::size_t>(n);
  auto add = [&](Literal lit, int column) {
    Bits bits(bin.rows);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (lit.Holds(static_cast<double>(values(i, column)))) bits.Set(static_cast<std::size_t>(i));
    }
    bin.literals.push_back({std::move(lit), column});
    bin.bits.push_back(std::move(bits));
  };
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = values(i, j);
    std::sort(col.begin(), col.end());
    if (n == 0 || col.front() == col.back()) continue;
    const std::string& name = names[static_cast<std::size_t>(j)];
    if (boolean[static_cast<std::size_t>(j)]) {
      Literal t;
      t.column = name;
      t.form = LiteralForm::kIsTrue;
      Literal f = t;
      f.form = LiteralForm::kIsFalse;
      add(t, static_cast<int>(j));
      add(f, static_cast<int>(j));
      continue;
    }
    std::vector<double> cuts;
    for (int k = 1; k < config.quantiles; ++k) {
      const auto idx = static_cast<std::size_t>((static_cast<double>(k) * static_cast<double>(n - 1)) / config.quantiles);
      const double q = col[idx];
      if (q >= col.back()) continue;
      if (cuts.empty() || cuts.back() != q) cuts.push_back(q);
    }
    for (double q : cuts) {
      const double next = *std::upper_bound(col.begin(), col.end(), q);
      const std::string text = ShortestThreshold(q, next);
      add(ThresholdLiteral(name, LiteralForm::kLessEqual, text), static_cast<int>(j));
      add(ThresholdLiteral(name, LiteralForm::kGreater, text), static_cast<int>(j));
    }
  }
  return bin;
}

BinarizedMatrix Binarize(const dataset::EncodedMatrix& data, const dataset::FeatureSchema& schema,
                         const BrcgConfig& config) {
  std::vector<bool> boolean;
  for (int c = 0; c < schema.encoded_width(); ++c) {
    const auto kind = schema.column_kind(c);
    boolean.push_back(kind == dataset::FeatureKind::kBinary || kind == dataset::FeatureKind::kCategorical);
  }
  BinarizedMatrix bin = BinarizeColumns(data.values, schema.column_names(), boolean, config);
  bin.schema_fingerprint = schema.fingerprint();
  return bin;
}

namespace {

struct Candidate {
  std::vector<int> literals;  // sorted literal indices
  Bits cover;
  double reduced_cost = 0.0;
};

class Pricer {
 public:
  Pricer(const BinarizedMatrix& bin, const Bits& negatives, const std::vector<std::pair<double, Bits>>& buckets,
         double n, const BrcgConfig& config)
      : bin_(bin), negatives_(negatives), buckets_(buckets), n_(n), config_(config) {}

  double ReducedCost(const Bits& cover, std::size_t length) const {
    double rc = config_.lambda0 + config_.lambda1 * static_cast<double>(length) +
                static_cast<double>(cover.CountAnd(negatives_)) / n_;
    for (const auto& [value, bits] : buckets_) rc -= value * static_cast<double>(cover.CountAnd(bits));
    return rc;
  }

  // Most negative reduced-cost conjunctions not in `existing`, best first.
  std::vector<Candidate> Search(const std::set<std::vector<int>>& existing) const {
    std::set<std::vector<int>> seen;
    std::vector<Candidate> found;
    std::vector<Candidate> beam;
    const int literal_count = static_cast<int>(bin_.literals.size());
    for (int l = 0; l < literal_count; ++l) {
      Candidate c;
      c.literals = {l};
      c.cover = bin_.bits[static_cast<std::size_t>(l)];
      if (c.cover.Count() == 0) continue;
      c.reduced_cost = ReducedCost(c.cover, 1);
      seen.insert(c.literals);
      beam.push_back(std::move(c));
    }
    Collect(beam, existing, &found);
    Trim(&beam);
    for (int degree = 2; degree <= config_.max_degree && !beam.empty(); ++degree) {
      std::vector<Candidate> next;
      for (const auto& node : beam) {
        for (int l = 0; l < literal_count; ++l) {
          const int column = bin_.literals[static_cast<std::size_t>(l)].column;
          bool clash = false;
          for (int m : node.literals) clash |= bin_.literals[static_cast<std::size_t>(m)].column == column;
          if (clash) continue;
          std::vector<int> key = node.literals;
          key.insert(std::upper_bound(key.begin(), key.end(), l), l);
          if (!seen.insert(key).second) continue;
          Candidate c;
          c.literals = std::move(key);
          c.cover = node.cover.And(bin_.bits[static_cast<std::size_t>(l)]);
          if (c.cover.Count() == 0) continue;
          c.reduced_cost = ReducedCost(c.cover, c.literals.size());
          next.push_back(std::move(c));
        }
      }
      Collect(next, existing, &found);
      Trim(&next);
      beam = std::move(next);
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Candidate& a, const Candidate& b) { return a.reduced_cost < b.reduced_cost; });
    return found;
  }

 private:
  void Collect(const std::vector<Candidate>& level, const std::set<std::vector<int>>& existing,
               std::vector<Candidate>* found) const {
    for (const auto& c : level) {
      if (c.reduced_cost < -1e-9 && !existing.count(c.literals)) found->push_back(c);
    }
  }

  void Trim(std::vector<Candidate>* level) const {
    std::stable_sort(level->begin(), level->end(),
                     [](const Candidate& a, const Candidate& b) { return a.reduced_cost < b.reduced_cost; });
    if (level->size() > static_cast<std::size_t>(config_.beam_width)) {
      level->resize(static_cast<std::size_t>(config_.beam_width));
    }
  }

  const BinarizedMatrix& bin_;
  const Bits& negatives_;
  const std::vector<std::pair<double, Bits>>& buckets_;
  double n_;
  const BrcgConfig& config_;
};

struct MasterResult {
  double objective = 0.0;
  Vector clause_values;
  std::vector<double> positive_duals;  // per row (0 for negatives)
};

// Restricted master LP; positives sharing a coverage pattern share one row.
MasterResult SolveMaster(const std::vector<Candidate>& clauses, const std::vector<double>& clause_cost,
                         const std::vector<int>& labels, double n) {
  const std::size_t rows = labels.size();
  const int k = static_cast<int>(clauses.size());
  std::map<std::vector<int>, int> group_of;
  std::vector<int> row_group(rows, -1);
  std::vector<std::size_t> group_size;
  std::vector<std::vector<int>> patterns;
  double constant = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (labels[i] != 1) continue;
    std::vector<int> pattern;
    for (int c = 0; c < k; ++c) {
      if (clauses[static_cast<std::size_t>(c)].cover.Test(i)) pattern.push_back(c);
    }
    if (pattern.empty()) {
      constant += 1.0 / n;
      continue;
    }
    auto [it, inserted] = group_of.emplace(pattern, static_cast<int>(patterns.size()));
    if (inserted) {
      patterns.push_back(pattern);
      group_size.push_back(0);
    }
    row_group[i] = it->second;
    ++group_size[static_cast<std::size_t>(it->second)];
  }
  const int g = static_cast<int>(patterns.size());

  MasterResult out;
  out.positive_duals.assign(rows, 0.0);
  out.clause_values = Vector::Zero(k);
  std::vector<double> group_dual(static_cast<std::size_t>(g), 0.0);
  if (g > 0) {
    numopt::LpProblem lp = numopt::LpProblem::WithVariables(k + g);
    for (int c = 0; c < k; ++c) {
      lp.objective[c] = clause_cost[static_cast<std::size_t>(c)];
      lp.upper[c] = 1.0;
    }
    lp.constraints = Matrix::Zero(g, k + g);
    lp.rhs = Vector::Ones(g);
    lp.senses.assign(static_cast<std::size_t>(g), numopt::RowSense::kGreaterEqual);
    for (int r = 0; r < g; ++r) {
      lp.objective[k + r] = static_cast<double>(group_size[static_cast<std::size_t>(r)]) / n;
      lp.constraints(r, k + r) = 1.0;
      for (int c : patterns[static_cast<std::size_t>(r)]) lp.constraints(r, c) = 1.0;
    }
    const numopt::LpSolution sol = numopt::SimplexLp(lp);
    if (sol.status != numopt::LpStatus::kOptimal) {
      throw Error(ErrorKind::kInternal, std::string("brcg: master LP ended with status ") +
                                            numopt::LpStatusName(sol.status));
    }
    out.objective = sol.objective;
    out.clause_values = sol.x.head(k);
    for (int r = 0; r < g; ++r) group_dual[static_cast<std::size_t>(r)] = std::max(0.0, sol.duals[r]);
  } else {
    // No clause covers a positive; every clause sits at zero.
    for (int c = 0; c < k; ++c) out.clause_values[c] = 0.0;
  }
  out.objective += constant;
  for (std::size_t i = 0; i < rows; ++i) {
    if (labels[i] != 1) continue;
    const int grp = row_group[i];
    out.positive_duals[i] =
        grp < 0 ? 1.0 / n : group_dual[static_cast<std::size_t>(grp)] / static_cast<double>(group_size[static_cast<std::size_t>(grp)]);
  }
  return out;
}

std::size_t Errors(const std::vector<const Bits*>& selected, const Bits& positives, std::size_t rows) {
  std::vector<std::uint64_t> acc((rows + 63) / 64, 0);
  for (const Bits* b : selected) {
    for (std::size_t w = 0; w < acc.size(); ++w) acc[w] |= b->words()[w];
  }
  std::size_t errors = 0;
  for (std::size_t w = 0; w < acc.size(); ++w) {
    errors += static_cast<std::size_t>(std::popcount(acc[w] ^ positives.words()[w]));
  }
  return errors;
}

}  // namespace

TrainReport TrainBrcg(const BinarizedMatrix& bin, const std::vector<int>& labels, const BrcgConfig& config) {
  config.Validate();
  if (labels.size() != bin.rows) throw UsageError("brcg: one label per row is required");
  if (bin.rows == 0) throw DataError("brcg: no training rows");
  const double n = static_cast<double>(bin.rows);
  Bits positives(bin.rows), negatives(bin.rows);
  for (std::size_t i = 0; i < bin.rows; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("brcg: labels must be 0 or 1");
    (labels[i] == 1 ? positives : negatives).Set(i);
  }

  TrainReport report;
  std::vector<Candidate> clauses;
  std::vector<double> clause_cost;
  std::set<std::vector<int>> existing;
  MasterResult master;
  for (int it = 0;; ++it) {
    if (config.budget) config.budget();
    master = SolveMaster(clauses, clause_cost, labels, n);
    report.lp_objective.push_back(master.objective);
    if (it == config.max_iterations) {
      report.iteration_cap = true;
      break;
    }
    // Group positives by dual value so pricing is popcount arithmetic.
    std::map<double, Bits> by_value;
    for (std::size_t i = 0; i < bin.rows; ++i) {
      const double v = master.positive_duals[i];
      if (labels[i] != 1 || v <= 0.0) continue;
      auto [pos, inserted] = by_value.try_emplace(v, bin.rows);
      pos->second.Set(i);
    }
    std::vector<std::pair<double, Bits>> buckets(by_value.begin(), by_value.end());
    const Pricer pricer(bin, negatives, buckets, n, config);
    std::vector<Candidate> found = pricer.Search(existing);
    report.iterations = it + 1;
    if (found.empty()) break;
    int added = 0;
    for (auto& c : found) {
      if (added == config.columns_per_iteration) break;
      if (!existing.insert(c.literals).second) continue;
      clause_cost.push_back(config.lambda0 + config.lambda1 * static_cast<double>(c.literals.size()) +
                            static_cast<double>(c.cover.CountAnd(negatives)) / n);
      clauses.push_back(std::move(c));
      ++added;
    }
    report.candidate_clauses = clauses.size();
  }
  report.candidate_clauses = clauses.size();

  std::vector<std::size_t> selected;
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    if (master.clause_values[static_cast<Eigen::Index>(c)] > 0.5) selected.push_back(c);
  }
  auto errors_of = [&](const std::vector<std::size_t>& set) {
    std::vector<const Bits*> covers;
    for (std::size_t c : set) covers.push_back(&clauses[c].cover);
    return Errors(covers, positives, bin.rows);
  };
  std::size_t errors = errors_of(selected);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t pos = 0; pos < selected.size(); ++pos) {
      std::vector<std::size_t> trial = selected;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
      const std::size_t e = errors_of(trial);
      if (e <= errors) {
        selected = std::move(trial);
        errors = e;
        changed = true;
        break;
      }
    }
  }

  RuleSet& rules = report.rules;
  rules.lambda0 = config.lambda0;
  rules.lambda1 = config.lambda1;
  rules.provenance = "trained";
  for (std::size_t c : selected) {
    Clause clause;
    for (int l : clauses[c].literals) clause.literals.push_back(bin.literals[static_cast<std::size_t>(l)].literal);
    rules.clauses.push_back(std::move(clause));
    rules.clause_stats.push_back({clauses[c].cover.Count(), clauses[c].cover.CountAnd(positives)});
  }
  report.train_accuracy = 1.0 - static_cast<double>(errors) / n;
  return report;
}

}  // namespace xids::brcg
