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

#include <cmath>

#include "core/numopt.hpp"

namespace xids::numopt {

RidgeResult SolveWeightedRidge(const Matrix& x, const Vector& y, const Vector& weights,
                               const RidgeOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 1) throw UsageError("ridge: need at least one row");
  if (y.size() != n || weights.size() != n) throw UsageError("ridge: dimension mismatch");
  if ((weights.array() < 0.0).any()) throw UsageError("ridge: weights must be nonnegative");
  if (options.lambda < 0) throw UsageError("ridge: lambda must be >= 0");
  const double lambda = options.lambda;

  // Reduced design: the free coefficients, plus an optional intercept column.
  const bool constrained = options.coefficient_sum.has_value() && p > 0;
  const double s = constrained ? *options.coefficient_sum : 0.0;
  const Eigen::Index free = constrained ? p - 1 : p;
  const Eigen::Index cols = free + (options.fit_intercept ? 1 : 0);

  Matrix design(n, cols);
  Vector target = y;
  if (constrained) {
    const Vector last = x.col(p - 1);
    for (Eigen::Index j = 0; j < free; ++j) design.col(j) = x.col(j) - last;
    target -= s * last;
  } else {
    design.leftCols(free) = x;
  }
  if (options.fit_intercept) design.col(cols - 1).setOnes();

  RidgeResult result;
  result.coefficients = Vector::Zero(p);
  if (cols == 0) {
    if (constrained) result.coefficients[0] = s;
    return result;
  }

  Matrix normal = design.transpose() * weights.asDiagonal() * design;
  Vector rhs = design.transpose() * weights.asDiagonal() * target;
  for (Eigen::Index j = 0; j < free; ++j) normal(j, j) += lambda;
  if (constrained) {
    // Penalty on the eliminated coefficient: lambda * (s - sum(free))^2.
    normal.topLeftCorner(free, free).array() += lambda;
    rhs.head(free).array() += lambda * s;
  }

  const Eigen::LDLT<Matrix> ldlt(normal);
  const Vector d = ldlt.vectorD().cwiseAbs();
  const double d_max = d.size() ? d.maxCoeff() : 0.0;
  if (ldlt.info() != Eigen::Success || d_max == 0.0 || d.minCoeff() <= 1e-13 * d_max) {
    throw NumericError("ridge: singular least-squares system; use lambda > 0");
  }
  const Vector theta = ldlt.solve(rhs);
  if (!theta.allFinite()) throw NumericError("ridge: non-finite solution; use lambda > 0");

  result.coefficients.head(free) = theta.head(free);
  if (constrained) result.coefficients[p - 1] = s - theta.head(free).sum();
  if (options.fit_intercept) result.intercept = theta[cols - 1];
  return result;
}

}  // namespace xids::numopt
