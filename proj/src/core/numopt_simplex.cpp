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

// Two-phase tableau simplex.
//
// The general problem (arbitrary bounds, mixed row senses) is rewritten in
// standard form  min c'z  s.t.  Mz = r, z >= 0, r >= 0:
//   x = l + z           (finite lower bound; a finite upper bound adds z <= u-l)
//   x = u - z           (only an upper bound)
//   x = z+ - z-         (free)
// Inequalities receive slack columns, and rows without a usable slack get an
// artificial column for phase one. Pivoting uses Bland's rule throughout.

#include <algorithm>
#include <cmath>

#include "core/numopt.hpp"

namespace xids::numopt {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

struct VarMap {
  enum Kind { kShift, kMirror, kSplit } kind;
  int column;          // first standard-form column
  double offset;       // l for kShift, u for kMirror
};

class Tableau {
 public:
  Tableau(Matrix m, Vector rhs) : rows_(m.rows()), cols_(m.cols()) {
    t_ = Matrix::Zero(rows_ + 1, cols_ + 1);
    t_.topLeftCorner(rows_, cols_) = std::move(m);
    t_.topRightCorner(rows_, 1) = std::move(rhs);
    basis_.assign(static_cast<std::size_t>(rows_), -1);
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  double value(Eigen::Index row) const { return t_(row, cols_); }
  double entry(Eigen::Index row, Eigen::Index col) const { return t_(row, col); }
  double objective() const { return -t_(rows_, cols_); }

  // Installs the cost row c - c_B B^{-1} M for the current basis.
  void SetCosts(const Vector& costs) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(cols_) = costs.transpose();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double cb = costs[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  void Pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    const Vector column = t_.col(col);
    const Eigen::RowVectorXd pivot_row = t_.row(row);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == row || column[i] == 0.0) continue;
      t_.row(i) -= column[i] * pivot_row;
      t_(i, col) = 0.0;
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Runs Bland's-rule simplex on the current cost row. `allowed` masks the
  // columns that may enter.
  LpStatus Run(const std::vector<bool>& allowed, int max_iterations, int* iterations) {
    while (true) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (allowed[static_cast<std::size_t>(j)] && t_(rows_, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      Eigen::Index leave = -1;
      double best_ratio = kInfinity;
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = t_(i, cols_) / a;
        if (ratio < best_ratio - 1e-12 ||
            (std::abs(ratio - best_ratio) <= 1e-12 && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      if (*iterations >= max_iterations) return LpStatus::kIterationLimit;
      ++*iterations;
      Pivot(leave, enter);
    }
  }

 private:
  Eigen::Index rows_, cols_;
  Matrix t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

const char* LpStatusName(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

LpProblem LpProblem::WithVariables(int vars) {
  LpProblem p;
  p.objective = Vector::Zero(vars);
  p.constraints = Matrix::Zero(0, vars);
  p.rhs = Vector::Zero(0);
  p.lower = Vector::Zero(vars);
  p.upper = Vector::Constant(vars, kInfinity);
  return p;
}

void LpProblem::AddRow(const Vector& coefficients, RowSense sense, double value) {
  if (coefficients.size() != vars()) throw UsageError("lp: row length mismatch");
  constraints.conservativeResize(constraints.rows() + 1, vars());
  constraints.row(constraints.rows() - 1) = coefficients.transpose();
  rhs.conservativeResize(rhs.size() + 1);
  rhs[rhs.size() - 1] = value;
  senses.push_back(sense);
}

void LpProblem::Validate() const {
  const Eigen::Index n = objective.size();
  if (constraints.cols() != n || lower.size() != n || upper.size() != n) {
    throw UsageError("lp: inconsistent variable dimensions");
  }
  if (rhs.size() != constraints.rows() || static_cast<Eigen::Index>(senses.size()) != constraints.rows()) {
    throw UsageError("lp: inconsistent row dimensions");
  }
  if (!objective.allFinite() || !constraints.allFinite() || !rhs.allFinite()) {
    throw UsageError("lp: problem data must be finite");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lower[j] > upper[j]) throw UsageError("lp: lower bound exceeds upper bound");
    if (lower[j] == kInfinity || upper[j] == -kInfinity) throw UsageError("lp: invalid bound");
  }
}

LpSolution SimplexLp(const LpProblem& problem, int max_iterations) {
  problem.Validate();
  const Eigen::Index m0 = problem.constraints.rows();
  const Eigen::Index n0 = problem.objective.size();

  // Variable substitution.
  std::vector<VarMap> vars;
  Eigen::Index z_cols = 0;
  std::vector<std::pair<Eigen::Index, double>> upper_rows;  // (z column, bound)
  for (Eigen::Index j = 0; j < n0; ++j) {
    const double l = problem.lower[j], u = problem.upper[j];
    if (std::isfinite(l)) {
      vars.push_back({VarMap::kShift, static_cast<int>(z_cols), l});
      if (std::isfinite(u)) upper_rows.emplace_back(z_cols, u - l);
      z_cols += 1;
    } else if (std::isfinite(u)) {
      vars.push_back({VarMap::kMirror, static_cast<int>(z_cols), u});
      z_cols += 1;
    } else {
      vars.push_back({VarMap::kSplit, static_cast<int>(z_cols), 0.0});
      z_cols += 2;
    }
  }
  const Eigen::Index rows = m0 + static_cast<Eigen::Index>(upper_rows.size());
  Matrix a = Matrix::Zero(rows, z_cols);
  Vector r(rows);
  Vector cost = Vector::Zero(z_cols);
  std::vector<RowSense> sense(static_cast<std::size_t>(rows), RowSense::kLessEqual);
  for (Eigen::Index j = 0; j < n0; ++j) {
    const auto& v = vars[static_cast<std::size_t>(j)];
    const double c = problem.objective[j];
    switch (v.kind) {
      case VarMap::kShift:
        a.block(0, v.column, m0, 1) = problem.constraints.col(j);
        cost[v.column] = c;
        break;
      case VarMap::kMirror:
        a.block(0, v.column, m0, 1) = -problem.constraints.col(j);
        cost[v.column] = -c;
        break;
      case VarMap::kSplit:
        a.block(0, v.column, m0, 1) = problem.constraints.col(j);
        a.block(0, v.column + 1, m0, 1) = -problem.constraints.col(j);
        cost[v.column] = c;
        cost[v.column + 1] = -c;
        break;
    }
  }
  for (Eigen::Index i = 0; i < m0; ++i) {
    double shift = 0.0;
    for (Eigen::Index j = 0; j < n0; ++j) {
      const auto& v = vars[static_cast<std::size_t>(j)];
      if (v.kind != VarMap::kSplit) shift += problem.constraints(i, j) * v.offset;
    }
    r[i] = problem.rhs[i] - shift;
    sense[static_cast<std::size_t>(i)] = problem.senses[static_cast<std::size_t>(i)];
  }
  for (std::size_t k = 0; k < upper_rows.size(); ++k) {
    const Eigen::Index i = m0 + static_cast<Eigen::Index>(k);
    a(i, upper_rows[k].first) = 1.0;
    r[i] = upper_rows[k].second;
  }

  // Slacks, sign normalization, artificials.
  Eigen::Index slack_count = 0;
  for (auto s : sense) slack_count += s != RowSense::kEqual;
  std::vector<double> row_sign(static_cast<std::size_t>(rows), 1.0);
  std::vector<Eigen::Index> slack_of(static_cast<std::size_t>(rows), -1);
  Matrix full = Matrix::Zero(rows, z_cols + slack_count);
  full.leftCols(z_cols) = a;
  Eigen::Index next = z_cols;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto s = sense[static_cast<std::size_t>(i)];
    if (s == RowSense::kEqual) continue;
    full(i, next) = s == RowSense::kLessEqual ? 1.0 : -1.0;
    slack_of[static_cast<std::size_t>(i)] = next++;
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (r[i] < 0) {
      full.row(i) *= -1.0;
      r[i] = -r[i];
      row_sign[static_cast<std::size_t>(i)] = -1.0;
    }
  }
  std::vector<Eigen::Index> basis_col(static_cast<std::size_t>(rows), -1);
  Eigen::Index artificial_count = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index s = slack_of[static_cast<std::size_t>(i)];
    if (s >= 0 && full(i, s) > 0) {
      basis_col[static_cast<std::size_t>(i)] = s;
    } else {
      ++artificial_count;
    }
  }
  const Eigen::Index structural = z_cols + slack_count;
  const Eigen::Index total = structural + artificial_count;
  Matrix std_form = Matrix::Zero(rows, total);
  std_form.leftCols(structural) = full;
  next = structural;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (basis_col[static_cast<std::size_t>(i)] < 0) {
      std_form(i, next) = 1.0;
      basis_col[static_cast<std::size_t>(i)] = next++;
    }
  }

  Tableau tab(std_form, r);
  for (Eigen::Index i = 0; i < rows; ++i) tab.basis()[static_cast<std::size_t>(i)] = basis_col[static_cast<std::size_t>(i)];

  LpSolution sol;
  int iterations = 0;
  std::vector<bool> allowed(static_cast<std::size_t>(total), true);

  if (artificial_count > 0) {
    Vector phase1 = Vector::Zero(total);
    phase1.tail(artificial_count).setOnes();
    tab.SetCosts(phase1);
    const LpStatus s1 = tab.Run(allowed, max_iterations, &iterations);
    if (s1 == LpStatus::kIterationLimit) {
      sol.status = s1;
      sol.iterations = iterations;
      return sol;
    }
    if (tab.objective() > 1e-7 * std::max(1.0, r.lpNorm<Eigen::Infinity>())) {
      sol.status = LpStatus::kInfeasible;
      sol.iterations = iterations;
      return sol;
    }
    // Drive artificials out of the basis where a structural pivot exists.
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < structural) continue;
      for (Eigen::Index j = 0; j < structural; ++j) {
        if (std::abs(tab.entry(i, j)) > kPivotTol) {
          tab.Pivot(i, j);
          break;
        }
      }
    }
    for (Eigen::Index j = structural; j < total; ++j) allowed[static_cast<std::size_t>(j)] = false;
  }

  Vector phase2 = Vector::Zero(total);
  phase2.head(z_cols) = cost;
  tab.SetCosts(phase2);
  const LpStatus s2 = tab.Run(allowed, max_iterations, &iterations);
  sol.iterations = iterations;
  sol.status = s2;
  if (s2 != LpStatus::kOptimal) return sol;

  Vector z = Vector::Zero(total);
  for (Eigen::Index i = 0; i < rows; ++i) z[tab.basis()[static_cast<std::size_t>(i)]] = tab.value(i);
  sol.x.resize(n0);
  for (Eigen::Index j = 0; j < n0; ++j) {
    const auto& v = vars[static_cast<std::size_t>(j)];
    switch (v.kind) {
      case VarMap::kShift: sol.x[j] = v.offset + z[v.column]; break;
      case VarMap::kMirror: sol.x[j] = v.offset - z[v.column]; break;
      case VarMap::kSplit: sol.x[j] = z[v.column] - z[v.column + 1]; break;
    }
    sol.x[j] = std::clamp(sol.x[j], problem.lower[j], problem.upper[j]);
  }
  sol.objective = problem.objective.dot(sol.x);

  // Duals from B^T y = c_B on the standard form.
  Matrix basis(rows, rows);
  Vector cb(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index col = tab.basis()[static_cast<std::size_t>(i)];
    basis.col(i) = std_form.col(col);
    cb[i] = phase2[col];
  }
  Vector y = rows ? Vector(basis.transpose().partialPivLu().solve(cb)) : Vector();
  sol.duals.resize(m0);
  for (Eigen::Index i = 0; i < m0; ++i) sol.duals[i] = row_sign[static_cast<std::size_t>(i)] * y[i];
  sol.reduced_costs = problem.objective - problem.constraints.transpose() * sol.duals;
  return sol;
}

}  // namespace xids::numopt
