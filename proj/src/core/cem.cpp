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


#include "core/cem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/nn.hpp"
#include "core/numopt.hpp"

namespace xids::cem {

const char* ModeName(Mode mode) { return mode == Mode::kPertinentNegative ? "pn" : "pp"; }

Mode ParseMode(const std::string& name) {
  if (name == "pn") return Mode::kPertinentNegative;
  if (name == "pp") return Mode::kPertinentPositive;
  throw UsageError("unknown contrast mode '" + name + "' (expected pn or pp)");
}

DifferentiableModel FromMlp(const nn::MlpModel& model) {
  DifferentiableModel m;
  m.logits = [&model](const Vector& x) { return nn::LogitsOf(model, x); };
  m.margin_gradient = [&model](const Vector& x, int target, Vector* logits) {
    return nn::MarginGradient(model, x, target, logits);
  };
  return m;
}

void CemConfig::Validate() const {
  if (!(kappa >= 0)) throw UsageError("cem: kappa must be >= 0");
  if (!(beta >= 0)) throw UsageError("cem: beta must be >= 0");
  if (!(c_init > 0)) throw UsageError("cem: c_init must be > 0");
  if (c_search_steps < 1) throw UsageError("cem: c_search_steps must be >= 1");
  if (max_iterations < 1) throw UsageError("cem: max_iterations must be >= 1");
  if (!(step_size > 0)) throw UsageError("cem: step size must be > 0");
  if (tolerance < 0) throw UsageError("cem: tolerance must be >= 0");
}

namespace {

int Argmax(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    if (v[j] > v[best]) best = j;
  }
  return static_cast<int>(best);
}

int RunnerUp(const Vector& v, int t) {
  int best = -1;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (j != t && (best < 0 || v[j] > v[best])) best = static_cast<int>(j);
  }
  return best;
}

Prediction PredictionOf(const Vector& logits) {
  Prediction p;
  p.predicted_class = Argmax(logits);
  const Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
  p.probabilities = e / e.sum();
  return p;
}

std::string NameOf(const std::vector<std::string>& names, int j) {
  return j < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(j)] : "f" + std::to_string(j);
}

}  // namespace

ContrastiveResult Explain(const DifferentiableModel& model, const Vector& x, const CemConfig& config,
                          const std::vector<std::string>& feature_names) {
  config.Validate();
  const bool pn = config.mode == Mode::kPertinentNegative;
  const Eigen::Index d = x.size();
  if (d < 1) throw UsageError("cem: empty instance");
  if ((x.array() < 0).any() || (x.array() > 1).any() || !x.allFinite()) {
    throw UsageError("cem: instance values must lie in [0, 1]");
  }
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != d) {
    throw UsageError("cem: feature name count differs from instance");
  }

  const Vector logits_x = model.logits(x);
  if (logits_x.size() < 2 || !logits_x.allFinite()) throw NumericError("cem: model returned invalid logits");
  const int target = Argmax(logits_x);

  const Vector lower = Vector::Zero(d);
  const Vector upper = pn ? Vector((1.0 - x.array()).matrix()) : x;
  const Vector start = pn ? Vector::Zero(d) : x;
  auto point = [&](const Vector& delta) -> Vector { return pn ? Vector(x + delta) : delta; };
  // Hinge argument: positive while the explanation goal is not reached.
  auto margin = [&](const Vector& logits) {
    const double other = logits[RunnerUp(logits, target)];
    return pn ? logits[target] - other : other - logits[target];
  };
  auto attains = [&](const Vector& logits) { return -margin(logits) > config.kappa; };

  ContrastiveResult result;
  result.mode = config.mode;
  result.instance = x;
  result.before = PredictionOf(logits_x);

  bool have_best = false;
  Vector best;
  double best_l1 = std::numeric_limits<double>::infinity();
  double best_c = config.c_init;
  Vector best_logits;
  auto consider = [&](const Vector& delta, const Vector& logits, double c) {
    if (!attains(logits)) return false;
    const double l1 = delta.lpNorm<1>();
    if (l1 < best_l1) {
      best_l1 = l1;
      best = delta;
      best_c = c;
      best_logits = logits;
      have_best = true;
    }
    return true;
  };

  if (!pn) consider(start, model.logits(point(start)), config.c_init);

  double c = config.c_init;
  Vector fallback = start;
  double fallback_c = c;
  for (int step = 0; step < config.c_search_steps; ++step) {
    if (config.budget) config.budget();
    Vector cached_delta;
    Vector cached_logits;
    auto smooth = [&](const Vector& delta, Vector* grad) {
      Vector logits;
      const Vector z = point(delta);
      if (grad) {
        const Vector g = model.margin_gradient(z, target, &logits);
        const double m = margin(logits);
        *grad = 2.0 * delta;
        if (m > -config.kappa) *grad += (pn ? c : -c) * g;
      } else {
        logits = model.logits(z);
        cached_delta = delta;
        cached_logits = logits;
      }
      return c * std::max(margin(logits), -config.kappa) + delta.squaredNorm();
    };

    bool found = false;
    numopt::ProxConfig prox;
    prox.max_iterations = config.max_iterations;
    prox.step_size = config.step_size;
    prox.l1_weight = config.beta;
    prox.tolerance = config.tolerance;
    prox.patience = config.patience;
    prox.observer = [&](int k, const Vector& delta) {
      if (config.budget && k % 32 == 0) config.budget();
      const Vector logits = delta == cached_delta ? cached_logits : model.logits(point(delta));
      if (consider(delta, logits, c)) found = true;
    };
    const numopt::ProxResult run = numopt::FistaMinimize(smooth, lower, upper, start, prox);
    result.iterations += run.iterations;
    fallback = run.x;
    fallback_c = c;
    c = found ? c * 0.5 : c * 10.0;
  }

  result.converged = have_best;
  if (have_best) {
    result.delta = best;
    result.c_final = best_c;
  } else {
    result.delta = fallback;
    result.c_final = fallback_c;
  }
  if (pn) {
    // Keep x + delta inside the unit box after rounding.
    for (Eigen::Index j = 0; j < d; ++j) {
      while (x[j] + result.delta[j] > 1.0) result.delta[j] = std::nextafter(result.delta[j], 0.0);
    }
  }
  const Vector after_logits = have_best && !pn ? best_logits : model.logits(point(result.delta));
  result.after = PredictionOf(after_logits);
  if (result.converged && !attains(after_logits)) {
    // Only reachable through the rounding adjustment above.
    result.converged = false;
  }
  result.l1 = result.delta.lpNorm<1>();
  result.l2 = result.delta.norm();
  result.objective = result.c_final * std::max(margin(after_logits), -config.kappa) + config.beta * result.l1 +
                     result.delta.squaredNorm();
  for (Eigen::Index j = 0; j < d; ++j) {
    const double v = result.delta[j];
    if (std::abs(v) <= kChangeThreshold) continue;
    const int jj = static_cast<int>(j);
    result.changed_features.push_back({jj, NameOf(feature_names, jj), x[j], pn ? x[j] + v : v});
  }
  return result;
}

ContrastiveResult PertinentNegative(const DifferentiableModel& model, const Vector& x, CemConfig config,
                                    const std::vector<std::string>& feature_names) {
  config.mode = Mode::kPertinentNegative;
  return Explain(model, x, config, feature_names);
}

ContrastiveResult PertinentPositive(const DifferentiableModel& model, const Vector& x, CemConfig config,
                                    const std::vector<std::string>& feature_names) {
  config.mode = Mode::kPertinentPositive;
  return Explain(model, x, config, feature_names);
}

BatchStats CemBatchStats(const std::vector<ContrastiveResult>& results,
                         const std::vector<std::string>& feature_names) {
  if (results.empty()) throw UsageError("cem stats: no results");
  BatchStats stats;
  stats.mode = results.front().mode;
  stats.count = results.size();
  const Eigen::Index d = results.front().delta.size();
  stats.feature_names = feature_names;
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != d) {
    throw UsageError("cem stats: feature name count differs from delta width");
  }
  stats.frequency = Vector::Zero(d);
  stats.mean_delta = Vector::Zero(d);
  Vector mean_abs = Vector::Zero(d);
  std::size_t converged = 0;
  double changed = 0.0;
  for (const auto& r : results) {
    if (r.mode != stats.mode) throw UsageError("cem stats: results mix pn and pp modes");
    if (r.delta.size() != d) throw UsageError("cem stats: results differ in width");
    for (const auto& f : r.changed_features) stats.frequency[f.index] += 1.0;
    stats.mean_delta += r.delta;
    mean_abs += r.delta.cwiseAbs();
    if (r.converged) {
      ++converged;
      changed += static_cast<double>(r.changed_features.size());
    }
  }
  const double n = static_cast<double>(results.size());
  stats.frequency /= n;
  stats.mean_delta /= n;
  mean_abs /= n;
  stats.success_rate = static_cast<double>(converged) / n;
  stats.mean_changed = converged ? changed / static_cast<double>(converged) : 0.0;
  stats.ranking.resize(static_cast<std::size_t>(d));
  std::iota(stats.ranking.begin(), stats.ranking.end(), 0);
  std::stable_sort(stats.ranking.begin(), stats.ranking.end(), [&](int a, int b) {
    if (stats.frequency[a] != stats.frequency[b]) return stats.frequency[a] > stats.frequency[b];
    return mean_abs[a] > mean_abs[b];
  });
  return stats;
}

}  // namespace xids::cem
