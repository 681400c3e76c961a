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


#include "core/protodash.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/numopt.hpp"

namespace xids::protodash {

double KernelConfig::Resolve(int d) const {
  if (gamma < 0 || !std::isfinite(gamma)) throw UsageError("protodash: gamma must be > 0");
  if (gamma > 0) return gamma;
  if (d < 1) throw UsageError("protodash: empty feature space");
  return 1.0 / d;
}

double RbfKernel(const Vector& a, const Vector& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

Vector MeanSimilarity(const Matrix& candidates, const Matrix& target, double gamma) {
  const Eigen::Index n = candidates.rows();
  Vector mu = Vector::Zero(n);
  if (target.rows() <= 16) {
    for (Eigen::Index r = 0; r < target.rows(); ++r) {
      const Eigen::RowVectorXd t = target.row(r);
      mu += (-gamma * (candidates.rowwise() - t).rowwise().squaredNorm().array()).exp().matrix();
    }
  } else {
    const Vector cn = candidates.rowwise().squaredNorm();
    const Vector tn = target.rowwise().squaredNorm();
    for (Eigen::Index start = 0; start < target.rows(); start += 1024) {
      const Eigen::Index len = std::min<Eigen::Index>(1024, target.rows() - start);
      Matrix d2 = -2.0 * candidates * target.middleRows(start, len).transpose();
      d2.colwise() += cn;
      d2.rowwise() += tn.segment(start, len).transpose();
      mu += (-gamma * d2.array().max(0.0)).exp().matrix().rowwise().sum();
    }
  }
  return mu / static_cast<double>(target.rows());
}

namespace {

Vector KernelColumn(const Matrix& candidates, Eigen::Index j, double gamma) {
  const Eigen::RowVectorXd c = candidates.row(j);
  return (-gamma * (candidates.rowwise() - c).rowwise().squaredNorm().array()).exp().matrix();
}

std::string PoolFingerprint(const Matrix& candidates) {
  Fnv1a h;
  const std::int64_t shape[2] = {candidates.rows(), candidates.cols()};
  h.Update(shape, sizeof(shape));
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    for (Eigen::Index j = 0; j < candidates.cols(); ++j) {
      const double v = candidates(i, j);
      h.Update(&v, sizeof(v));
    }
  }
  return h.HexDigest();
}

// argmax_{w >= 0} w.mu - w'Kw / 2 through NNLS on the Cholesky factor.
Vector SolveWeights(const Matrix& k, const Vector& mu, bool* jittered) {
  Eigen::LLT<Matrix> llt(k);
  const double scale = std::max(1.0, k.diagonal().maxCoeff());
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
    ok = diag.minCoeff() * diag.minCoeff() > 1e-12 * scale;
  }
  if (!ok) {
    *jittered = true;
    llt.compute(k + 1e-6 * scale * Matrix::Identity(k.rows(), k.cols()));
    if (llt.info() != Eigen::Success) throw NumericError("protodash: kernel block is not positive definite");
  }
  const Matrix l = llt.matrixL();
  const Vector b = l.triangularView<Eigen::Lower>().solve(mu);
  return numopt::Nnls(l.transpose(), b).x;
}

}  // namespace

PrototypeSet SelectPrototypes(const Matrix& candidates, const Matrix& target, int m, const KernelConfig& kernel,
                              const std::function<void()>& budget) {
  const Eigen::Index n = candidates.rows();
  if (n < 1) throw UsageError("protodash: empty candidate pool");
  if (target.rows() < 1) throw UsageError("protodash: empty target set");
  if (target.cols() != candidates.cols()) throw UsageError("protodash: target and candidates differ in width");
  if (m < 1) throw UsageError("protodash: m must be >= 1");
  if (m > n) {
    throw UsageError("protodash: m = " + std::to_string(m) + " exceeds the pool size " + std::to_string(n));
  }
  PrototypeSet set;
  set.gamma = kernel.Resolve(static_cast<int>(candidates.cols()));
  set.pool_fingerprint = PoolFingerprint(candidates);
  const Vector mu = MeanSimilarity(candidates, target, set.gamma);

  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<Vector> columns;  // K[:, s] for selected s
  Vector kw = Vector::Zero(n);
  Vector w;
  for (int step = 0; step < m; ++step) {
    if (budget) budget();
    Eigen::Index pick = -1;
    double best = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (chosen[static_cast<std::size_t>(j)]) continue;
      const double g = mu[j] - kw[j];
      if (pick < 0 || g > best) {
        pick = j;
        best = g;
      }
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    set.indices.push_back(static_cast<std::size_t>(pick));
    columns.push_back(KernelColumn(candidates, pick, set.gamma));

    const Eigen::Index s = static_cast<Eigen::Index>(set.indices.size());
    Matrix kss(s, s);
    Vector mus(s);
    for (Eigen::Index a = 0; a < s; ++a) {
      mus[a] = mu[static_cast<Eigen::Index>(set.indices[static_cast<std::size_t>(a)])];
      for (Eigen::Index b = 0; b < s; ++b) {
        kss(a, b) = columns[static_cast<std::size_t>(b)][static_cast<Eigen::Index>(set.indices[static_cast<std::size_t>(a)])];
      }
    }
    kss = 0.5 * (kss + kss.transpose());
    w = SolveWeights(kss, mus, &set.jittered);
    kw.setZero();
    for (Eigen::Index a = 0; a < s; ++a) kw += w[a] * columns[static_cast<std::size_t>(a)];
    set.objective_trace.push_back(w.dot(mus) - 0.5 * w.dot(kss * w));
  }
  set.weights = w;
  return set;
}

double PrototypeObjective(const Matrix& candidates, const Matrix& target, const PrototypeSet& set) {
  const Vector mu = MeanSimilarity(candidates, target, set.gamma);
  const Eigen::Index s = static_cast<Eigen::Index>(set.indices.size());
  double value = 0.0;
  for (Eigen::Index a = 0; a < s; ++a) {
    const Vector ca = candidates.row(static_cast<Eigen::Index>(set.indices[static_cast<std::size_t>(a)])).transpose();
    value += set.weights[a] * mu[static_cast<Eigen::Index>(set.indices[static_cast<std::size_t>(a)])];
    for (Eigen::Index b = 0; b < s; ++b) {
      const Vector cb = candidates.row(static_cast<Eigen::Index>(set.indices[static_cast<std::size_t>(b)])).transpose();
      value -= 0.5 * set.weights[a] * set.weights[b] * RbfKernel(ca, cb, set.gamma);
    }
  }
  return value;
}

Vector SimilarityProfile(const Vector& prototype, const Vector& x, const Vector& stddev) {
  if (prototype.size() != x.size() || stddev.size() != x.size()) {
    throw UsageError("similarity profile: dimension mismatch");
  }
  Vector s(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double sigma = std::max(stddev[i], 1e-6);
    const double diff = x[i] - prototype[i];
    s[i] = std::exp(-diff * diff / (2.0 * sigma * sigma));
  }
  return s;
}

NeighborTable ExplainByPrototypes(const dataset::EncodedMatrix& train, const std::vector<int>& train_predictions,
                                  const dataset::TrainStats& stats, const Vector& x, int query_class, int m,
                                  const KernelConfig& kernel, const std::function<void()>& budget) {
  if (train_predictions.size() != train.rows()) {
    throw UsageError("prototypes: one prediction per training row is required");
  }
  if (x.size() != train.cols()) throw UsageError("prototypes: instance width differs from the training data");
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    if (train_predictions[i] == query_class) pool.push_back(i);
  }
  if (pool.empty()) {
    throw DataError("prototypes: no training row is predicted as class " + std::to_string(query_class));
  }
  Matrix candidates(static_cast<Eigen::Index>(pool.size()), train.cols());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    candidates.row(static_cast<Eigen::Index>(k)) = train.values.row(static_cast<Eigen::Index>(pool[k])).cast<double>();
  }
  NeighborTable table;
  table.query = x;
  table.query_class = query_class;
  table.pool_size = pool.size();
  table.prototypes = SelectPrototypes(candidates, x.transpose(), m, kernel, budget);

  const auto& sel = table.prototypes.indices;
  std::vector<std::size_t> order(sel.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.prototypes.weights[static_cast<Eigen::Index>(a)] > table.prototypes.weights[static_cast<Eigen::Index>(b)];
  });
  for (std::size_t k : order) {
    Neighbor nb;
    nb.train_index = pool[sel[k]];
    nb.weight = table.prototypes.weights[static_cast<Eigen::Index>(k)];
    nb.predicted_class = query_class;
    nb.label = train.labels[nb.train_index];
    if (nb.train_index < train.raw_labels.size()) nb.raw_label = train.raw_labels[nb.train_index];
    nb.values = candidates.row(static_cast<Eigen::Index>(sel[k])).transpose();
    nb.similarity = SimilarityProfile(nb.values, x, stats.stddev);
    table.neighbors.push_back(std::move(nb));
  }
  return table;
}

}  // namespace xids::protodash
