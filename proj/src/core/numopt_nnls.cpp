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

// Lawson-Hanson active set NNLS. The passive set P holds the coordinates that
// are free to be positive; each outer step moves the coordinate with the
// largest positive dual w = A^T (b - Ax) into P, and the inner loop walks
// back along the segment towards the unconstrained solution on P whenever it
// would leave the feasible orthant.

#include <cmath>
#include <sstream>

#include "core/numopt.hpp"

namespace xids::numopt {

namespace {

Vector SolveOnPassiveSet(const Matrix& a, const Vector& b, const std::vector<bool>& passive) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
  }
  Vector z = Vector::Zero(a.cols());
  if (idx.empty()) return z;
  Matrix sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
  const Vector zs = sub.colPivHouseholderQr().solve(b);
  for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[static_cast<Eigen::Index>(k)];
  return z;
}

}  // namespace

NnlsResult Nnls(const Matrix& a, const Vector& b, int max_iterations, double tolerance) {
  if (a.rows() != b.size()) throw UsageError("nnls: dimension mismatch");
  const Eigen::Index n = a.cols();
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * std::max<Eigen::Index>(n, 1));
  NnlsResult result;
  Vector x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Vector w = a.transpose() * (b - a * x);
  int iterations = 0;

  while (true) {
    Eigen::Index t = -1;
    double best = tolerance;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best) {
        best = w[j];
        t = j;
      }
    }
    if (t < 0) break;
    if (++iterations > max_iterations) {
      std::ostringstream msg;
      msg << "nnls: iteration cap " << max_iterations << " exceeded (best residual "
          << (a * x - b).norm() << ")";
      throw NumericError(msg.str());
    }
    passive[static_cast<std::size_t>(t)] = true;

    bool first = true;
    bool rejected = false;
    while (true) {
      Vector z = SolveOnPassiveSet(a, b, passive);
      if (first && z[t] <= 0.0) {
        // Entering coordinate cannot become positive (round-off); drop it for
        // this outer step.
        passive[static_cast<std::size_t>(t)] = false;
        w[t] = 0.0;
        rejected = true;
        break;
      }
      first = false;
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) feasible = false;
      }
      if (feasible) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          alpha = std::min(alpha, x[j] / (x[j] - z[j]));
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tolerance) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
    if (!rejected) w = a.transpose() * (b - a * x);
  }

  result.x = x;
  result.residual_norm = (a * x - b).norm();
  result.iterations = iterations;
  return result;
}

}  // namespace xids::numopt
