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

#include "diarkit/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace diarkit {
namespace {

constexpr double kMinWeight = 1e-12;
constexpr int kLloydIters = 20;

Eigen::VectorXd resolve_floor(const RowMatrix& x, const EmOptions& opts) {
  if (opts.variance_floor.size() == 0) return variance_floor(x);
  if (opts.variance_floor.size() != x.cols()) throw Error("variance floor has the wrong dimension");
  return opts.variance_floor;
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// One EM step: returns the updated model given responsibilities of `g`.
Gmm em_step(const RowMatrix& x, const Gmm& g, const Eigen::VectorXd& floor) {
  RowMatrix resp = g.component_log_densities(x);
  for (Eigen::Index t = 0; t < resp.rows(); ++t) {
    const double lse = log_sum_exp(resp.row(t));
    resp.row(t) = (resp.row(t).array() - lse).exp();
  }
  const Eigen::Index m = g.components();
  const Eigen::VectorXd occ = resp.colwise().sum().transpose();
  RowMatrix sum_x = resp.transpose() * x;
  RowMatrix sum_x2 = resp.transpose() * x.array().square().matrix();

  Eigen::VectorXd w(m);
  RowMatrix mu = g.means();
  RowMatrix var = g.variances();
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index k = 0; k < m; ++k) {
    w(k) = std::max(occ(k) / n, kMinWeight);
    if (occ(k) > 1e-10) {
      mu.row(k) = sum_x.row(k) / occ(k);
      var.row(k) = (sum_x2.row(k) / occ(k) - mu.row(k).array().square().matrix())
                       .cwiseMax(floor.transpose());
    }
  }
  w /= w.sum();
  return Gmm(std::move(w), std::move(mu), std::move(var));
}

}  // namespace

Gmm::Gmm(Eigen::VectorXd weights, RowMatrix means, RowMatrix variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  if (weights_.size() == 0 || means_.rows() != weights_.size() ||
      variances_.rows() != means_.rows() || variances_.cols() != means_.cols()) {
    throw Error("inconsistent GMM parameter shapes");
  }
  refresh();
}

void Gmm::refresh() {
  inv_var_ = variances_.cwiseInverse();
  log_norm_.resize(weights_.size());
  const double log2pi = std::log(2.0 * M_PI);
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    log_norm_(k) = std::log(weights_(k)) -
                   0.5 * (static_cast<double>(dim()) * log2pi + variances_.row(k).array().log().sum());
  }
}

void Gmm::validate() const {
  if (std::abs(weights_.sum() - 1.0) > 1e-12) throw Error("GMM weights do not sum to 1");
  if ((weights_.array() <= 0.0).any()) throw Error("GMM weights must be positive");
  if ((variances_.array() <= 0.0).any()) throw Error("GMM variances must be positive");
  if (!means_.allFinite() || !variances_.allFinite()) throw Error("non-finite GMM parameters");
}

RowMatrix Gmm::component_log_densities(const RowMatrix& x) const {
  if (x.cols() != dim()) {
    throw Error("GMM dimension " + std::to_string(dim()) + " does not match data dimension " +
                std::to_string(x.cols()));
  }
  RowMatrix out(x.rows(), components());
  for (Eigen::Index k = 0; k < components(); ++k) {
    out.col(k) = (-0.5 * ((x.rowwise() - means_.row(k)).array().square().rowwise() *
                         inv_var_.row(k).array())
                            .rowwise()
                            .sum() +
                  log_norm_(k))
                     .matrix();
  }
  return out;
}

Eigen::VectorXd Gmm::frame_log_likelihood(const RowMatrix& x) const {
  const RowMatrix c = component_log_densities(x);
  Eigen::VectorXd out(c.rows());
  for (Eigen::Index t = 0; t < c.rows(); ++t) out(t) = log_sum_exp(c.row(t));
  return out;
}

double log_likelihood(const Gmm& g, const RowMatrix& x) {
  const Eigen::VectorXd ll = g.frame_log_likelihood(x);
  double s = 0.0;
  for (Eigen::Index t = 0; t < ll.size(); ++t) s += ll(t);
  return s;
}

Eigen::VectorXd variance_floor(const RowMatrix& x, double factor) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd var =
      (x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(x.rows());
  return (factor * var.transpose()).cwiseMax(1e-12);
}

Gmm kmeans_init(const RowMatrix& x, Eigen::Index m, std::uint64_t seed,
                const Eigen::VectorXd& floor) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (m < 1) throw ValidationError("need at least one component");
  if (n < m) {
    throw Error("k-means needs at least " + std::to_string(m) + " frames, got " +
                std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  RowMatrix centers(m, d);
  {
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    centers.row(0) = x.row(first(rng));
    Eigen::VectorXd dist = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (Eigen::Index k = 1; k < m; ++k) {
      const double total = dist.sum();
      Eigen::Index pick = 0;
      if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng), acc = 0.0;
        pick = n - 1;
        for (Eigen::Index t = 0; t < n; ++t) {
          acc += dist(t);
          if (acc >= r && dist(t) > 0.0) {
            pick = t;
            break;
          }
        }
      } else {
        std::uniform_int_distribution<Eigen::Index> any(0, n - 1);
        pick = any(rng);
      }
      centers.row(k) = x.row(pick);
      dist = dist.cwiseMin((x.rowwise() - centers.row(k)).rowwise().squaredNorm());
    }
  }

  std::vector<Eigen::Index> assign(n, -1);
  Eigen::VectorXd best(n);
  const auto assign_all = [&] {
    bool changed = false;
    for (Eigen::Index t = 0; t < n; ++t) {
      Eigen::Index arg = 0;
      const double b = (centers.rowwise() - x.row(t)).rowwise().squaredNorm().minCoeff(&arg);
      best(t) = b;
      if (assign[t] != arg) {
        assign[t] = arg;
        changed = true;
      }
    }
    return changed;
  };
  for (int it = 0; it < kLloydIters; ++it) {
    const bool changed = assign_all();
    if (!changed && it > 0) break;
    RowMatrix sums = RowMatrix::Zero(m, d);
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(m);
    for (Eigen::Index t = 0; t < n; ++t) {
      sums.row(assign[t]) += x.row(t);
      ++counts(assign[t]);
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      if (counts(k) > 0) {
        centers.row(k) = sums.row(k) / counts(k);
        continue;
      }
      // re-seed from the point farthest from its centroid
      Eigen::Index far = 0;
      best.maxCoeff(&far);
      centers.row(k) = x.row(far);
      best(far) = 0.0;
      assign[far] = k;
    }
  }
  assign_all();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  RowMatrix mu = RowMatrix::Zero(m, d);
  RowMatrix var = RowMatrix::Zero(m, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    w(assign[t]) += 1.0;
    mu.row(assign[t]) += x.row(t);
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    if (w(k) > 0.0) {
      mu.row(k) /= w(k);
    } else {
      mu.row(k) = centers.row(k);
    }
  }
  for (Eigen::Index t = 0; t < n; ++t) {
    var.row(assign[t]) += (x.row(t) - mu.row(assign[t])).array().square().matrix();
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    if (w(k) > 0.0) var.row(k) /= w(k);
    var.row(k) = var.row(k).cwiseMax(floor.transpose());
  }
  w = (w / static_cast<double>(n)).cwiseMax(kMinWeight);
  w /= w.sum();
  return Gmm(std::move(w), std::move(mu), std::move(var));
}

GmmFit em_refine(const RowMatrix& x, const Gmm& init, const EmOptions& opts) {
  if (x.rows() == 0) throw Error("EM needs at least one frame");
  const Eigen::VectorXd floor = resolve_floor(x, opts);
  GmmFit fit{init, {}, 0};
  const double n = static_cast<double>(x.rows());
  double ll = log_likelihood(fit.model, x);
  if (!std::isfinite(ll)) throw Error("non-finite GMM log-likelihood");
  fit.log_likelihoods.push_back(ll);
  for (int it = 0; it < opts.max_iters; ++it) {
    Gmm next = em_step(x, fit.model, floor);
    const double next_ll = log_likelihood(next, x);
    if (!std::isfinite(next_ll)) {
      throw Error("non-finite GMM log-likelihood at EM iteration " + std::to_string(it + 1));
    }
    fit.model = std::move(next);
    fit.log_likelihoods.push_back(next_ll);
    ++fit.iterations;
    const double delta = (next_ll - ll) / n;
    ll = next_ll;
    if (delta < opts.tol) break;
  }
  return fit;
}

GmmFit em_fit(const RowMatrix& x, Eigen::Index components, std::uint64_t seed,
              const EmOptions& opts) {
  if (x.rows() < 2 * components) {
    throw Error("EM with " + std::to_string(components) + " components needs at least " +
                std::to_string(2 * components) + " frames, got " + std::to_string(x.rows()));
  }
  EmOptions o = opts;
  o.variance_floor = resolve_floor(x, opts);
  return em_refine(x, kmeans_init(x, components, seed, o.variance_floor), o);
}

Gmm concatenate_halved(const Gmm& a, const Gmm& b) {
  if (a.dim() != b.dim()) throw Error("cannot combine GMMs of different dimension");
  const Eigen::Index ma = a.components(), mb = b.components();
  Eigen::VectorXd w(ma + mb);
  w << 0.5 * a.weights(), 0.5 * b.weights();
  RowMatrix mu(ma + mb, a.dim()), var(ma + mb, a.dim());
  mu << a.means(), b.means();
  var << a.variances(), b.variances();
  return Gmm(std::move(w), std::move(mu), std::move(var));
}

RowMatrix stack_rows(const RowMatrix& a, const RowMatrix& b) {
  RowMatrix u(a.rows() + b.rows(), a.cols());
  u << a, b;
  return u;
}

MergeResult merge_gain(const Gmm& g1, const RowMatrix& x1, const Gmm& g2, const RowMatrix& x2,
                       const EmOptions& opts) {
  if (g1.dim() != g2.dim() || x1.cols() != g1.dim() || x2.cols() != g2.dim()) {
    throw Error("merge_gain: dimension mismatch");
  }
  const Eigen::Index need = 2 * (g1.components() + g2.components());
  if (x1.rows() + x2.rows() < need) {
    throw Error("merge_gain needs at least " + std::to_string(need) + " frames, got " +
                std::to_string(x1.rows() + x2.rows()));
  }
  const RowMatrix u = stack_rows(x1, x2);
  GmmFit fit = em_refine(u, concatenate_halved(g1, g2), opts);
  MergeResult r;
  r.gain = fit.log_likelihoods.back() - (log_likelihood(g1, x1) + log_likelihood(g2, x2));
  r.merged = std::move(fit.model);
  return r;
}

}  // namespace diarkit
