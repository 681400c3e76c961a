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

void ProxConfig::Validate() const {
  if (max_iterations < 1) throw UsageError("prox: max_iterations must be >= 1");
  if (!(step_size > 0)) throw UsageError("prox: step size must be > 0");
  if (l1_weight < 0) throw UsageError("prox: l1 weight must be >= 0");
}

namespace {

// prox of t*l1*|.| + box indicator: soft-threshold, then clip. Exact per
// coordinate because the 1-D problem is convex.
Vector Prox(const Vector& v, double threshold, const Vector& lower, const Vector& upper) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double s = v[i];
    if (s > threshold) {
      s -= threshold;
    } else if (s < -threshold) {
      s += threshold;
    } else {
      s = 0.0;
    }
    out[i] = std::min(std::max(s, lower[i]), upper[i]);
  }
  return out;
}

}  // namespace

ProxResult FistaMinimize(const SmoothFunction& smooth, const Vector& lower, const Vector& upper,
                         const Vector& x0, const ProxConfig& config) {
  config.Validate();
  if (lower.size() != x0.size() || upper.size() != x0.size()) {
    throw UsageError("prox: box and start point dimensions differ");
  }
  if ((lower.array() > upper.array()).any()) throw UsageError("prox: empty box");

  auto composite = [&](const Vector& x) {
    const double f = smooth(x, nullptr);
    return f + config.l1_weight * x.lpNorm<1>();
  };

  ProxResult result;
  Vector x = x0.cwiseMax(lower).cwiseMin(upper);
  double fx = composite(x);
  if (!std::isfinite(fx)) throw NumericError("prox: non-finite objective at the start point");
  result.x = x;
  result.objective = fx;
  Vector y = x;
  double t = 1.0;
  Vector grad(x.size());
  int quiet = 0;

  for (int k = 1; k <= config.max_iterations; ++k) {
    smooth(y, &grad);
    if (!grad.allFinite()) {
      throw NumericError("prox: non-finite gradient at iteration " + std::to_string(k));
    }
    const Vector x_next = Prox(y - config.step_size * grad, config.step_size * config.l1_weight, lower, upper);
    const double f_next = composite(x_next);
    if (!std::isfinite(f_next)) {
      throw NumericError("prox: non-finite objective at iteration " + std::to_string(k));
    }
    if (f_next > fx) {
      t = 1.0;
      y = x_next;
      ++result.restarts;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      t = t_next;
    }
    const double change = std::abs(f_next - fx);
    x = x_next;
    fx = f_next;
    result.iterations = k;
    result.objective_trace.push_back(fx);
    if (fx < result.objective) {
      result.objective = fx;
      result.x = x;
    }
    result.best_trace.push_back(result.objective);
    if (config.observer) config.observer(k, x);

    if (config.tolerance > 0) {
      quiet = change <= config.tolerance * std::max(1.0, std::abs(fx)) ? quiet + 1 : 0;
      if (quiet >= config.patience) break;
    }
  }
  return result;
}

}  // namespace xids::numopt
