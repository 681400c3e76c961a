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

// Dense numerical kernels shared by the explainers.

#ifndef XIDS_CORE_NUMOPT_HPP_
#define XIDS_CORE_NUMOPT_HPP_

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "core/common.hpp"

namespace xids::numopt {

// ---------------------------------------------------------------------------
// Weighted ridge regression.
//
// Minimizes sum_i w_i (y_i - x_i.beta - intercept)^2 + lambda ||beta||^2,
// optionally subject to sum(beta) = coefficient_sum. The equality is handled
// by eliminating the last coefficient; the penalty still covers every
// coefficient, the eliminated one included. The intercept is never penalized.

struct RidgeOptions {
  double lambda = 0.0;
  bool fit_intercept = false;
  std::optional<double> coefficient_sum;
};

struct RidgeResult {
  Vector coefficients;
  double intercept = 0.0;
};

RidgeResult SolveWeightedRidge(const Matrix& x, const Vector& y, const Vector& weights,
                               const RidgeOptions& options);

// ---------------------------------------------------------------------------
// Nonnegative least squares, min ||Ax - b||^2 s.t. x >= 0 (Lawson-Hanson).

struct NnlsResult {
  Vector x;
  double residual_norm = 0.0;
  int iterations = 0;
};

// Throws NumericError (message carries the best iterate's residual) when the
// iteration cap is reached. max_iterations <= 0 selects 3 * columns.
NnlsResult Nnls(const Matrix& a, const Vector& b, int max_iterations = 0, double tolerance = 1e-10);

// ---------------------------------------------------------------------------
// Dense two-phase primal simplex with Bland's rule.

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };
enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* LpStatusName(LpStatus status);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct LpProblem {
  Vector objective;              // minimize c.x
  Matrix constraints;            // rows x vars
  Vector rhs;
  std::vector<RowSense> senses;
  Vector lower;                  // may be -inf
  Vector upper;                  // may be +inf

  // Problem with `vars` variables bounded to [0, +inf) and no rows.
  static LpProblem WithVariables(int vars);
  void AddRow(const Vector& coefficients, RowSense sense, double value);
  int rows() const { return static_cast<int>(constraints.rows()); }
  int vars() const { return static_cast<int>(objective.size()); }
  void Validate() const;
};

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  Vector x;
  double objective = 0.0;
  // d objective / d rhs_i at the optimum; sign follows the row sense
  // (<= rows have duals <= 0, >= rows >= 0 for a minimization).
  Vector duals;
  // c_j - a_j.duals; nonzero only for variables resting at a bound.
  Vector reduced_costs;
  int iterations = 0;
};

LpSolution SimplexLp(const LpProblem& problem, int max_iterations = 50000);

// ---------------------------------------------------------------------------
// Accelerated proximal gradient (FISTA) for
//   min f(x) + l1_weight * ||x||_1   s.t.  lo <= x <= hi
// with momentum restart whenever the composite objective increases.

// Returns f(x) and writes grad f(x) into `gradient`.
using SmoothFunction = std::function<double(const Vector& x, Vector* gradient)>;
// Observes each accepted iterate (1-based iteration index).
using IterateObserver = std::function<void(int iteration, const Vector& x)>;

struct ProxConfig {
  int max_iterations = 1000;
  double step_size = 0.01;
  double l1_weight = 0.0;
  // Stop when the composite objective changes by less than tolerance *
  // max(1, |objective|) over `patience` consecutive iterations. 0 disables.
  double tolerance = 0.0;
  int patience = 10;
  IterateObserver observer;

  void Validate() const;
};

struct ProxResult {
  Vector x;                               // best-objective iterate
  double objective = 0.0;
  std::vector<double> objective_trace;    // composite objective per iteration
  std::vector<double> best_trace;         // running minimum
  int iterations = 0;
  int restarts = 0;
};

ProxResult FistaMinimize(const SmoothFunction& smooth, const Vector& lower, const Vector& upper,
                         const Vector& x0, const ProxConfig& config);

}  // namespace xids::numopt

#endif  // XIDS_CORE_NUMOPT_HPP_
