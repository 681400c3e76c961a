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

#include "core/shap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "core/numopt.hpp"

namespace xids::shap {

namespace {

double Binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Coalition masks with their regression weights. Empty and full coalitions
// are implied (they pin the base value and the efficiency constraint).
class CoalitionSet {
 public:
  explicit CoalitionSet(int d) : d_(d) {}

  // Returns true when the mask was new.
  bool Add(const std::string& mask, double weight) {
    const auto [it, inserted] = index_.emplace(mask, masks_.size());
    if (inserted) {
      masks_.push_back(mask);
      weights_.push_back(weight);
    } else {
      weights_[it->second] += weight;
    }
    return inserted;
  }

  std::size_t size() const { return masks_.size(); }
  const std::vector<std::string>& masks() const { return masks_; }
  std::vector<double>& weights() { return weights_; }
  int features() const { return d_; }

 private:
  int d_;
  std::vector<std::string> masks_;
  std::vector<double> weights_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string Complement(const std::string& mask) {
  std::string c = mask;
  for (auto& ch : c) ch = ch ? 0 : 1;
  return c;
}

void EnumerateAll(CoalitionSet* set) {
  const int d = set->features();
  const std::uint64_t total = std::uint64_t{1} << d;
  std::string mask(static_cast<std::size_t>(d), 0);
  for (std::uint64_t bits = 1; bits + 1 < total; ++bits) {
    int s = 0;
    for (int i = 0; i < d; ++i) {
      mask[static_cast<std::size_t>(i)] = (bits >> i) & 1 ? 1 : 0;
      s += mask[static_cast<std::size_t>(i)];
    }
    set->Add(mask, (d - 1) / (Binomial(d, s) * s * (d - s)));
  }
}

// Enumerates every subset of the given size (and its complement when paired).
void EnumerateSize(CoalitionSet* set, int size, bool paired, double weight_each) {
  const int d = set->features();
  std::vector<int> idx(static_cast<std::size_t>(size));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    std::string mask(static_cast<std::size_t>(d), 0);
    for (int i : idx) mask[static_cast<std::size_t>(i)] = 1;
    set->Add(mask, weight_each);
    if (paired) set->Add(Complement(mask), weight_each);
    int k = size - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == d - size + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

// Budgeted coalition design: subset sizes are enumerated completely, from
// the most heavily weighted (smallest and largest) inwards, while the budget
// covers them; the remaining sizes are sampled in proportion to their kernel
// mass, each draw paired with its complement, duplicates merged.
void SampleCoalitions(CoalitionSet* set, int budget, std::uint64_t seed) {
  const int d = set->features();
  const int num_sizes = (d - 1 + 1) / 2;   // ceil((d-1)/2)
  const int num_paired = (d - 1) / 2;      // floor((d-1)/2)
  std::vector<double> size_weight(static_cast<std::size_t>(num_sizes));
  for (int s = 1; s <= num_sizes; ++s) {
    double w = (d - 1.0) / (s * (d - s));
    if (s <= num_paired) w *= 2.0;
    size_weight[static_cast<std::size_t>(s - 1)] = w;
  }
  const double total = std::accumulate(size_weight.begin(), size_weight.end(), 0.0);
  for (auto& w : size_weight) w /= total;

  std::vector<double> remaining = size_weight;
  double left = budget;
  int full_sizes = 0;
  for (int s = 1; s <= num_sizes; ++s) {
    const bool paired = s <= num_paired;
    const double count = Binomial(d, s) * (paired ? 2.0 : 1.0);
    if (left * remaining[static_cast<std::size_t>(s - 1)] / count < 1.0 - 1e-8) break;
    ++full_sizes;
    left -= count;
    const double w = remaining[static_cast<std::size_t>(s - 1)];
    if (w < 1.0) {
      for (auto& r : remaining) r /= (1.0 - w);
    }
    EnumerateSize(set, s, paired, size_weight[static_cast<std::size_t>(s - 1)] / count);
  }
  if (full_sizes == num_sizes || left < 1.0) return;

  double leftover_mass = 0.0;
  std::vector<double> probs;
  for (int s = full_sizes + 1; s <= num_sizes; ++s) {
    leftover_mass += size_weight[static_cast<std::size_t>(s - 1)];
    probs.push_back(remaining[static_cast<std::size_t>(s - 1)]);
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick_size(probs.begin(), probs.end());
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);

  // Sampled sizes never collide with enumerated ones, so merged duplicates
  // only accumulate draw counts.
  const std::size_t first_sampled = set->size();
  auto add_count = [&](const std::string& mask) { return set->Add(mask, 1.0); };

  int budget_left = static_cast<int>(left);
  const int max_draws = 8 * budget + 64;
  for (int draw = 0; draw < max_draws && budget_left > 0; ++draw) {
    const int s = full_sizes + 1 + pick_size(rng);
    for (int i = 0; i < s; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
    }
    std::string mask(static_cast<std::size_t>(d), 0);
    for (int i = 0; i < s; ++i) mask[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    if (add_count(mask)) --budget_left;
    if (s <= num_paired && budget_left > 0) {
      if (add_count(Complement(mask))) --budget_left;
    }
  }
  auto& weights = set->weights();
  double count_sum = 0.0;
  for (std::size_t i = first_sampled; i < weights.size(); ++i) count_sum += weights[i];
  for (std::size_t i = first_sampled; i < weights.size(); ++i) weights[i] *= leftover_mass / count_sum;
}

void CheckFinite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string("kernel shap: model returned non-finite values for ") + what);
}

}  // namespace

BackgroundSet SampleBackground(const RowMatrixF& source, std::size_t size, std::uint64_t seed) {
  if (source.rows() == 0) throw DataError("background source is empty");
  if (size == 0) throw UsageError("background size must be >= 1");
  const std::size_t n = static_cast<std::size_t>(source.rows());
  BackgroundSet bg;
  bg.seed = seed;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (size < n) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(size);
    std::sort(idx.begin(), idx.end());
  }
  bg.indices = idx;
  bg.rows.resize(static_cast<Eigen::Index>(idx.size()), source.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    bg.rows.row(static_cast<Eigen::Index>(i)) = source.row(static_cast<Eigen::Index>(idx[i])).cast<double>();
  }
  return bg;
}

int DefaultCoalitions(int features) { return 2 * features + 2048; }

Attribution KernelShap(const ModelFn& model, const Vector& x, const BackgroundSet& background,
                       const KernelShapOptions& options, std::vector<std::string> feature_names) {
  const int d = static_cast<int>(x.size());
  if (d < 1) throw UsageError("kernel shap: empty instance");
  if (background.rows.rows() < 1) throw UsageError("kernel shap: empty background set");
  if (background.rows.cols() != d) throw UsageError("kernel shap: background dimension differs from instance");
  if (!feature_names.empty() && static_cast<int>(feature_names.size()) != d) {
    throw UsageError("kernel shap: feature name count differs from instance");
  }

  const int requested = options.n_coalitions > 0 ? options.n_coalitions : DefaultCoalitions(d);
  const bool can_enumerate = d <= kMaxExhaustiveFeatures;
  const double all_coalitions = std::ldexp(1.0, std::min(d, 60));
  const bool exhaustive =
      options.force_exhaustive ||
      (can_enumerate && (options.n_coalitions <= 0 || requested >= all_coalitions));
  if (options.force_exhaustive && !can_enumerate) {
    throw UsageError("kernel shap: exhaustive enumeration needs <= 15 features");
  }
  if (!exhaustive && requested < d + 2) {
    throw UsageError("kernel shap: need at least d + 2 = " + std::to_string(d + 2) + " coalitions");
  }

  Attribution attr;
  attr.method = "shap";
  attr.instance = x;
  attr.feature_names = std::move(feature_names);
  attr.exhaustive = exhaustive;
  attr.background_size = static_cast<int>(background.rows.rows());

  const Vector bg_out = model(background.rows);
  CheckFinite(bg_out, "the background set");
  attr.base_value = bg_out.mean();
  const Vector fx = model(x.transpose());
  CheckFinite(fx, "the instance");
  attr.model_output = fx[0];

  if (d == 1) {
    attr.phi = Vector::Constant(1, attr.model_output - attr.base_value);
    attr.coalitions = 2;
    return attr;
  }

  CoalitionSet set(d);
  if (exhaustive) {
    EnumerateAll(&set);
  } else {
    SampleCoalitions(&set, requested - 2, options.seed);
  }
  attr.coalitions = static_cast<int>(set.size()) + 2;

  // Masked evaluation, batched by rows.
  const Eigen::Index nb = background.rows.rows();
  const std::size_t per_batch = std::max<std::size_t>(1, options.max_batch_rows / static_cast<std::size_t>(nb));
  Vector values(static_cast<Eigen::Index>(set.size()));
  const auto& masks = set.masks();
  for (std::size_t start = 0; start < masks.size(); start += per_batch) {
    if (options.budget) options.budget();
    const std::size_t end = std::min(masks.size(), start + per_batch);
    Matrix batch(static_cast<Eigen::Index>((end - start)) * nb, d);
    for (std::size_t c = start; c < end; ++c) {
      auto block = batch.middleRows(static_cast<Eigen::Index>(c - start) * nb, nb);
      block = background.rows;
      for (int j = 0; j < d; ++j) {
        if (masks[c][static_cast<std::size_t>(j)]) block.col(j).setConstant(x[j]);
      }
    }
    const Vector out = model(batch);
    CheckFinite(out, "a masked batch");
    for (std::size_t c = start; c < end; ++c) {
      values[static_cast<Eigen::Index>(c)] = out.segment(static_cast<Eigen::Index>(c - start) * nb, nb).mean();
    }
  }

  Matrix design(static_cast<Eigen::Index>(set.size()), d);
  for (std::size_t c = 0; c < masks.size(); ++c) {
    for (int j = 0; j < d; ++j) design(static_cast<Eigen::Index>(c), j) = masks[c][static_cast<std::size_t>(j)];
  }
  Vector weights = Eigen::Map<const Vector>(set.weights().data(), static_cast<Eigen::Index>(set.size()));
  // Unit mean weight keeps the ridge guard's influence independent of d.
  weights *= static_cast<double>(weights.size()) / weights.sum();

  numopt::RidgeOptions ridge;
  // Full enumeration gives a full-rank design; the guard only matters for
  // sampled coalitions, where it would otherwise bias exact values.
  ridge.lambda = exhaustive ? 0.0 : options.ridge_lambda;
  ridge.coefficient_sum = attr.model_output - attr.base_value;
  const Vector target = values.array() - attr.base_value;
  attr.phi = numopt::SolveWeightedRidge(design, target, weights, ridge).coefficients;
  return attr;
}

SummaryData GlobalSummary(const std::vector<Attribution>& attributions) {
  if (attributions.empty()) throw UsageError("global summary needs at least one attribution");
  SummaryData s;
  s.feature_names = attributions.front().feature_names;
  const Eigen::Index d = attributions.front().phi.size();
  s.mean_abs_phi = Vector::Zero(d);
  s.points.assign(static_cast<std::size_t>(d), {});
  for (const auto& a : attributions) {
    if (a.phi.size() != d || a.feature_names != s.feature_names) {
      throw UsageError("global summary: attributions disagree on the feature list");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      s.mean_abs_phi[j] += std::abs(a.phi[j]);
      s.points[static_cast<std::size_t>(j)].emplace_back(a.instance.size() == d ? a.instance[j] : 0.0, a.phi[j]);
    }
  }
  s.instances = attributions.size();
  s.mean_abs_phi /= static_cast<double>(attributions.size());
  s.ranking.resize(static_cast<std::size_t>(d));
  std::iota(s.ranking.begin(), s.ranking.end(), 0);
  std::stable_sort(s.ranking.begin(), s.ranking.end(),
                   [&](int a, int b) { return s.mean_abs_phi[a] > s.mean_abs_phi[b]; });
  return s;
}

ForcePlotData ForceData(const Attribution& attribution) {
  ForcePlotData f;
  f.base_value = attribution.base_value;
  f.model_output = attribution.model_output;
  for (Eigen::Index j = 0; j < attribution.phi.size(); ++j) {
    const double phi = attribution.phi[j];
    if (phi == 0.0) continue;
    ForceSegment seg;
    seg.feature = static_cast<int>(j);
    seg.name = j < static_cast<Eigen::Index>(attribution.feature_names.size())
                   ? attribution.feature_names[static_cast<std::size_t>(j)]
                   : "f" + std::to_string(j);
    seg.value = j < attribution.instance.size() ? attribution.instance[j] : 0.0;
    seg.phi = phi;
    (phi > 0 ? f.positive : f.negative).push_back(std::move(seg));
  }
  std::stable_sort(f.positive.begin(), f.positive.end(), [](const auto& a, const auto& b) { return a.phi > b.phi; });
  std::stable_sort(f.negative.begin(), f.negative.end(), [](const auto& a, const auto& b) { return a.phi < b.phi; });
  return f;
}

StackedForceData StackedForce(const std::vector<Attribution>& attributions,
                              const std::vector<std::string>& group_labels) {
  if (attributions.size() != group_labels.size()) {
    throw UsageError("stacked force: one group label per attribution is required");
  }
  StackedForceData out;
  if (!attributions.empty()) out.feature_names = attributions.front().feature_names;
  std::vector<std::string> order;
  for (const auto& g : group_labels) {
    if (std::find(order.begin(), order.end(), g) == order.end()) order.push_back(g);
  }
  for (const auto& g : order) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < attributions.size(); ++i) {
      if (group_labels[i] == g) members.push_back(i);
    }
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return attributions[a].model_output > attributions[b].model_output;
    });
    out.groups.push_back({g, out.columns.size(), members.size()});
    for (std::size_t i : members) {
      out.columns.push_back({i, g, attributions[i].model_output, attributions[i].base_value, attributions[i].phi});
    }
  }
  return out;
}

}  // namespace xids::shap
