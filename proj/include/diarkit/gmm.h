// Copyright 2026 The diarkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "diarkit/common.h"

namespace diarkit {

// Diagonal-covariance Gaussian mixture.
class Gmm {
 public:
  Gmm() = default;
  Gmm(Eigen::VectorXd weights, RowMatrix means, RowMatrix variances);

  Eigen::Index components() const { return weights_.size(); }
  Eigen::Index dim() const { return means_.cols(); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const RowMatrix& means() const { return means_; }
  const RowMatrix& variances() const { return variances_; }

  // Per-frame log p(x_t), via log-sum-exp over components.
  Eigen::VectorXd frame_log_likelihood(const RowMatrix& x) const;
  // Frames x components matrix of log(w_m N(x_t; mu_m, var_m)).
  RowMatrix component_log_densities(const RowMatrix& x) const;

  void validate() const;

 private:
  void refresh();

  Eigen::VectorXd weights_;
  RowMatrix means_;
  RowMatrix variances_;
  RowMatrix inv_var_;
  Eigen::VectorXd log_norm_;  // log w_m - 0.5 * sum_d log(2 pi var_md)
};

struct EmOptions {
  int max_iters = 20;
  double tol = 1e-4;  // on the mean per-frame log-likelihood
  // Per-dim variance floor. Empty means 1e-3 x the variance of the data fit.
  Eigen::VectorXd variance_floor;
};

struct GmmFit {
  Gmm model;
  // Total log-likelihood of the initial model followed by one entry per EM
  // iteration.
  std::vector<double> log_likelihoods;
  int iterations = 0;
};

// 1e-3 x the population variance of each column (at least 1e-12).
Eigen::VectorXd variance_floor(const RowMatrix& x, double factor = 1e-3);

// k-means++ seeding followed by at most 20 Lloyd iterations. Empty clusters
// are re-seeded from the point farthest from its centroid.
Gmm kmeans_init(const RowMatrix& x, Eigen::Index components, std::uint64_t seed,
                const Eigen::VectorXd& floor);

// EM from a k-means start; requires at least 2M frames.
GmmFit em_fit(const RowMatrix& x, Eigen::Index components, std::uint64_t seed,
              const EmOptions& opts = {});

// EM warm-started from `init`; each iteration cannot decrease the likelihood.
GmmFit em_refine(const RowMatrix& x, const Gmm& init, const EmOptions& opts = {});

// Sum over frames of log p(x_t).
double log_likelihood(const Gmm& g, const RowMatrix& x);

// Both children's components, each weight halved.
Gmm concatenate_halved(const Gmm& a, const Gmm& b);

struct MergeResult {
  double gain = 0.0;  // log L(X1 u X2 | merged) - log L(X1 | g1) - log L(X2 | g2)
  Gmm merged;
};

// Threshold-free merge test: the union is modelled with as many components
// as both children together, so the parameter count is unchanged and no
// penalty term is needed. Positive gain favours merging.
MergeResult merge_gain(const Gmm& g1, const RowMatrix& x1, const Gmm& g2, const RowMatrix& x2,
                       const EmOptions& opts);

RowMatrix stack_rows(const RowMatrix& a, const RowMatrix& b);

}  // namespace diarkit
