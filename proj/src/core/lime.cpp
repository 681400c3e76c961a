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


#include "core/lime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/numopt.hpp"

namespace xids::lime {

void LimeConfig::Validate(int features) const {
  if (n_samples < 10) throw UsageError("lime: n_samples must be >= 10");
  if (top_k < 1 || top_k > features) {
    throw UsageError("lime: top_k must be in [1, " + std::to_string(features) + "]");
  }
  if (kernel_width < 0 || !std::isfinite(kernel_width)) throw UsageError("lime: kernel width must be > 0");
  if (ridge_lambda < 0) throw UsageError("lime: ridge lambda must be >= 0");
}

namespace {

double Uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int DrawCategory(std::mt19937_64& rng, const std::vector<double>& freq) {
  const double total = std::accumulate(freq.begin(), freq.end(), 0.0);
  if (total <= 0) return -1;
  double u = Uniform(rng) * total;
  for (std::size_t k = 0; k < freq.size(); ++k) {
    if (u < freq[k]) return static_cast<int>(k);
    u -= freq[k];
  }
  for (std::size_t k = freq.size(); k-- > 0;) {
    if (freq[k] > 0) return static_cast<int>(k);
  }
  return -1;
}

}  // namespace

PerturbationSet Perturb(const Vector& x, const dataset::TrainStats& stats, int n, std::uint64_t seed) {
  const Eigen::Index d = x.size();
  if (stats.mean.size() != d || stats.stddev.size() != d) {
    throw UsageError("lime: training statistics do not match the instance width");
  }
  if (n < 1) throw UsageError("lime: need at least one sample");
  std::vector<char> grouped(static_cast<std::size_t>(d), 0);
  for (const auto& g : stats.groups) {
    for (int k = 0; k < g.size; ++k) grouped[static_cast<std::size_t>(g.first_column + k)] = 1;
  }
  for (int c : stats.binary_columns) grouped[static_cast<std::size_t>(c)] = 1;

  PerturbationSet set;
  set.samples.resize(n, d);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    auto row = set.samples.row(i);
    row = x.transpose();
    if (i == 0) continue;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (grouped[static_cast<std::size_t>(j)]) continue;
      const double sd = stats.stddev[j];
      if (sd <= 0) continue;
      row[j] = std::clamp(x[j] + sd * normal(rng), 0.0, 1.0);
    }
    for (std::size_t g = 0; g < stats.groups.size(); ++g) {
      if (Uniform(rng) >= 0.5) continue;
      const auto& grp = stats.groups[g];
      const int pick = DrawCategory(rng, stats.group_frequencies[g]);
      for (int k = 0; k < grp.size; ++k) row[grp.first_column + k] = k == pick ? 1.0 : 0.0;
    }
    for (int c : stats.binary_columns) {
      if (Uniform(rng) >= 0.5) continue;
      row[c] = Uniform(rng) < stats.mean[c] ? 1.0 : 0.0;
    }
  }
  set.mask.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) set.mask(i, j) = set.samples(i, j) == x[j] ? 1.0 : 0.0;
  }
  return set;
}

double WeightedR2(const Vector& y, const Vector& predicted, const Vector& weights) {
  const double wsum = weights.sum();
  if (!(wsum > 0)) return 0.0;
  const double mean = weights.dot(y) / wsum;
  const double ss_tot = (weights.array() * (y.array() - mean).square()).sum();
  const double ss_res = (weights.array() * (y - predicted).array().square()).sum();
  if (ss_tot <= 0) return ss_res <= 0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

shap::Attribution ExplainLime(const shap::ModelFn& model, const Vector& x, const dataset::TrainStats& stats,
                              const LimeConfig& config, std::vector<std::string> feature_names) {
  const int d = static_cast<int>(x.size());
  config.Validate(d);
  if (!feature_names.empty() && static_cast<int>(feature_names.size()) != d) {
    throw UsageError("lime: feature name count differs from instance");
  }
  const double width = config.kernel_width > 0 ? config.kernel_width : 0.75 * std::sqrt(static_cast<double>(d));

  const PerturbationSet set = Perturb(x, stats, config.n_samples, config.seed);
  if ((set.mask.array() > 0.5).all()) {
    throw NumericError("lime: degenerate sampling, every sample equals the instance");
  }
  if (config.budget) config.budget();
  const Vector y = model(set.samples);
  if (!y.allFinite()) throw NumericError("lime: model returned non-finite values");
  if (config.budget) config.budget();

  const Vector dist2 = (set.samples.rowwise() - x.transpose()).rowwise().squaredNorm();
  const Vector weights = (-dist2.array() / (width * width)).exp().matrix();

  numopt::RidgeOptions ridge;
  ridge.lambda = config.ridge_lambda;
  ridge.fit_intercept = true;
  const numopt::RidgeResult fit = numopt::SolveWeightedRidge(set.samples, y, weights, ridge);

  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(fit.coefficients[a]) > std::abs(fit.coefficients[b]);
  });

  shap::Attribution attr;
  attr.method = "lime";
  attr.feature_names = std::move(feature_names);
  attr.instance = x;
  attr.phi = Vector::Zero(d);
  for (int r = 0; r < config.top_k; ++r) {
    const int j = order[static_cast<std::size_t>(r)];
    attr.phi[j] = fit.coefficients[j];
  }
  attr.base_value = fit.intercept;
  attr.model_output = y[0];
  attr.background_size = config.n_samples;
  const Vector predicted = (set.samples * fit.coefficients).array() + fit.intercept;
  attr.surrogate_r2 = WeightedR2(y, predicted, weights);
  return attr;
}

}  // namespace xids::lime
