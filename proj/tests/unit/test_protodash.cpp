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


#include <gtest/gtest.h>

#include <random>

#include "core/protodash.hpp"
#include "synthetic_kdd.hpp"

namespace xids::protodash {
namespace {

Matrix RandomMatrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

// max w.mu - w'Kw/2 over w >= 0 by enumerating supports.
Vector QpOracle(const Matrix& k, const Vector& mu) {
  const int n = static_cast<int>(mu.size());
  Vector best = Vector::Zero(n);
  double best_value = 0.0;
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      if (mask & (1 << j)) idx.push_back(j);
    }
    const int s = static_cast<int>(idx.size());
    Matrix ks(s, s);
    Vector ms(s);
    for (int a = 0; a < s; ++a) {
      ms[a] = mu[idx[static_cast<std::size_t>(a)]];
      for (int b = 0; b < s; ++b) ks(a, b) = k(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    const Vector ws = ks.ldlt().solve(ms);
    if ((ws.array() < 0).any()) continue;
    Vector w = Vector::Zero(n);
    for (int a = 0; a < s; ++a) w[idx[static_cast<std::size_t>(a)]] = ws[a];
    const double v = w.dot(mu) - 0.5 * w.dot(k * w);
    if (v > best_value) {
      best_value = v;
      best = w;
    }
  }
  return best;
}

TEST(ProtoDash, FirstPickIsArgmaxMeanSimilarity) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix cand = RandomMatrix(200, 6, seed);
    const Matrix target = RandomMatrix(15, 6, seed + 100);
    KernelConfig kc;
    const double gamma = kc.Resolve(6);
    const Vector mu = MeanSimilarity(cand, target, gamma);
    Eigen::Index arg = 0;
    mu.maxCoeff(&arg);
    const PrototypeSet p = SelectPrototypes(cand, target, 1, kc);
    ASSERT_EQ(p.indices.size(), 1u);
    EXPECT_EQ(p.indices[0], static_cast<std::size_t>(arg));
    // K(j, j) = 1, so the single weight is mu_j.
    EXPECT_NEAR(p.weights[0], mu[arg], 1e-12);
  }
}

TEST(ProtoDash, WeightsMatchQpOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix cand = RandomMatrix(120, 4, seed);
    const Matrix target = RandomMatrix(30, 4, seed + 7);
    KernelConfig kc;
    kc.gamma = 2.0;
    const PrototypeSet p = SelectPrototypes(cand, target, 6, kc);
    const int m = static_cast<int>(p.indices.size());
    Matrix k(m, m);
    Vector mu(m);
    const Vector mu_all = MeanSimilarity(cand, target, 2.0);
    for (int a = 0; a < m; ++a) {
      mu[a] = mu_all[static_cast<Eigen::Index>(p.indices[static_cast<std::size_t>(a)])];
      for (int b = 0; b < m; ++b) {
        k(a, b) = RbfKernel(cand.row(static_cast<Eigen::Index>(p.indices[static_cast<std::size_t>(a)])).transpose(),
                            cand.row(static_cast<Eigen::Index>(p.indices[static_cast<std::size_t>(b)])).transpose(), 2.0);
      }
    }
    const Vector oracle = QpOracle(k, mu);
    EXPECT_LT((p.weights - oracle).cwiseAbs().maxCoeff(), 1e-8) << "seed " << seed;
    for (std::size_t s = 1; s < p.objective_trace.size(); ++s) {
      EXPECT_GE(p.objective_trace[s], p.objective_trace[s - 1] - 1e-12);
    }
    EXPECT_NEAR(PrototypeObjective(cand, target, p), p.objective_trace.back(), 1e-10);
  }
}

TEST(ProtoDash, DuplicatedQueryIsTopPrototype) {
  Matrix cand = RandomMatrix(500, 8, 3);
  const Matrix query = cand.row(137);
  const PrototypeSet p = SelectPrototypes(cand, query, 5);
  ASSERT_FALSE(p.indices.empty());
  EXPECT_EQ(p.indices[0], 137u);
  const double total = p.weights.sum();
  EXPECT_GT(p.weights[0], 0.5 * total);
  EXPECT_EQ(p.weights.maxCoeff(), p.weights[0]);
}

TEST(ProtoDash, IdenticalCandidatesAreHandled) {
  Matrix cand = RandomMatrix(20, 3, 4);
  cand.row(5) = cand.row(6);
  const Matrix target = cand.middleRows(5, 2);
  const PrototypeSet p = SelectPrototypes(cand, target, 4);
  EXPECT_TRUE((p.weights.array() >= 0).all());
  EXPECT_TRUE(p.weights.allFinite());
}

TEST(ProtoDash, DeterministicAndFingerprinted) {
  const Matrix cand = RandomMatrix(100, 5, 8);
  const Matrix target = RandomMatrix(3, 5, 9);
  const PrototypeSet a = SelectPrototypes(cand, target, 4);
  const PrototypeSet b = SelectPrototypes(cand, target, 4);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.pool_fingerprint, b.pool_fingerprint);
  EXPECT_THROW(SelectPrototypes(cand, target, 0), UsageError);
}

TEST(ProtoDash, SimilarityProfile) {
  Vector p(2), x(2), sd(2);
  p << 0.5, 0.2;
  x << 0.5, 0.4;
  sd << 0.1, 0.0;
  const Vector s = SimilarityProfile(p, x, sd);
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_NEAR(s[1], 0.0, 1e-12);
}

TEST(ProtoDash, NeighborTableFromTrainingPool) {
  const auto data = testing::SyntheticArtifact(600, 20, 3);
  const auto& train = data.split("train");
  const auto stats = dataset::ComputeTrainStats(train, data.schema);
  std::vector<int> preds = train.labels;  // a perfect model
  const Vector x = train.row(42);
  const NeighborTable t = ExplainByPrototypes(train, preds, stats, x, train.labels[42], 5);
  ASSERT_FALSE(t.neighbors.empty());
  EXPECT_EQ(t.neighbors[0].train_index, 42u);
  for (std::size_t k = 1; k < t.neighbors.size(); ++k) EXPECT_GE(t.neighbors[k - 1].weight, t.neighbors[k].weight);
  for (const auto& nb : t.neighbors) EXPECT_EQ(nb.predicted_class, train.labels[42]);
  EXPECT_THROW(ExplainByPrototypes(train, std::vector<int>(train.rows(), 0), stats, x, 1, 5), DataError);
}

}  // namespace
}  // namespace xids::protodash
