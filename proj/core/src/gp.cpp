// Copyright 2026 The bosal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bosal/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace bosal {

void GpHyperparams::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("sigma2 must be positive and finite");
  }
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("lengthscale must be positive and finite");
  }
  if (nu != 0.5 && nu != 1.5 && nu != 2.5) {
    throw std::invalid_argument("nu must be 0.5, 1.5 or 2.5");
  }
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
    throw std::invalid_argument("jitter must be non-negative and finite");
  }
}

double matern_kernel(double r, const GpHyperparams& hp) {
  if (r < 0.0 || !std::isfinite(r)) {
    throw std::invalid_argument("distance must be non-negative and finite");
  }
  const double q = r / hp.lengthscale;
  if (hp.nu == 0.5) {
    return hp.sigma2 * std::exp(-q);
  }
  if (hp.nu == 1.5) {
    const double a = std::numbers::sqrt3 * q;
    return hp.sigma2 * (1.0 + a) * std::exp(-a);
  }
  const double a = std::sqrt(5.0) * q;
  return hp.sigma2 * (1.0 + a + 5.0 * q * q / 3.0) * std::exp(-a);
}

double matern_kernel(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                     const GpHyperparams& hp) {
  return matern_kernel((xi - xj).norm(), hp);
}

namespace {

// Drops exact duplicate inputs. Bit-equal responses collapse silently;
// conflicting responses make the kernel matrix singular by construction, so
// that is an input error.
TrainingSet deduplicate(const TrainingSet& training) {
  TrainingSet out;
  out.points.reserve(training.size());
  out.responses.reserve(training.size());
  for (std::size_t i = 0; i < training.size(); ++i) {
    bool duplicate = false;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (out.points[j] == training.points[i]) {
        if (out.responses[j] != training.responses[i]) {
          throw std::invalid_argument(
              "duplicate training point with conflicting responses");
        }
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      out.add(training.points[i], training.responses[i]);
    }
  }
  return out;
}

Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::Vector3d>& points,
                              const GpHyperparams& hp) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = hp.sigma2;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = matern_kernel(points[i], points[j], hp);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace

GpModel fit(const TrainingSet& training, const GpHyperparams& hp) {
  hp.validate();
  if (training.size() == 0) {
    throw std::invalid_argument("cannot fit a GP to an empty training set");
  }
  if (training.points.size() != training.responses.size()) {
    throw std::invalid_argument("points/responses size mismatch");
  }
  for (const double y : training.responses) {
    if (!std::isfinite(y)) {
      throw std::invalid_argument("training responses must be finite");
    }
  }

  GpModel model;
  model.training = deduplicate(training);
  model.hp = hp;
  const Eigen::Index n = static_cast<Eigen::Index>(model.training.size());
  const Eigen::MatrixXd k = kernel_matrix(model.training.points, hp);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      model.training.responses.data(), n);

  double jitter = hp.jitter;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(
        k + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      model.chol = llt.matrixL();
      model.alpha = llt.solve(y);
      model.effective_jitter = jitter;
      model.train_coords.resize(n, 3);
      for (Eigen::Index i = 0; i < n; ++i) {
        model.train_coords.row(i) = model.training.points[i].transpose();
      }
      return model;
    }
    jitter = (jitter == 0.0) ? hp.jitter * 10.0 : jitter * 10.0;
    if (jitter == 0.0) {
      jitter = 1e-6;
    }
  }
  throw FitError("Cholesky factorization failed at jitter " +
                 std::to_string(jitter / 10.0));
}

namespace {

// Vectorized cross-covariance block: distances via the expansion
// |a - b|^2 = |a|^2 + |b|^2 - 2 a.b (clamped at 0 against cancellation),
// then the closed-form Matérn applied with array ops.
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& train,
                             const Eigen::MatrixXd& queries,
                             const GpHyperparams& hp) {
  const Eigen::VectorXd tn = train.rowwise().squaredNorm();
  const Eigen::VectorXd qn = queries.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (train * queries.transpose());
  d2.colwise() += tn;
  d2.rowwise() += qn.transpose();
  const Eigen::ArrayXXd q = d2.cwiseMax(0.0).cwiseSqrt().array() /
                            hp.lengthscale;
  if (hp.nu == 0.5) {
    return hp.sigma2 * (-q).exp();
  }
  if (hp.nu == 1.5) {
    const Eigen::ArrayXXd a = std::numbers::sqrt3 * q;
    return hp.sigma2 * ((1.0 + a) * (-a).exp());
  }
  const Eigen::ArrayXXd a = std::sqrt(5.0) * q;
  return hp.sigma2 * ((1.0 + a + (5.0 / 3.0) * q.square()) * (-a).exp());
}

}  // namespace

PosteriorPrediction predict(const GpModel& model,
                            const Eigen::MatrixXd& queries) {
  if (queries.cols() != 3) {
    throw std::invalid_argument("queries must have 3 columns (u, v, s)");
  }
  const Eigen::Index m = queries.rows();
  PosteriorPrediction out;
  out.mean.resize(m);
  out.std.resize(m);
  constexpr Eigen::Index kChunk = 16384;  // bounds the N x chunk temporaries
  for (Eigen::Index start = 0; start < m; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, m - start);
    const Eigen::MatrixXd kstar =
        cross_kernel(model.train_coords, queries.middleRows(start, len),
                     model.hp);
    out.mean.segment(start, len) = kstar.transpose() * model.alpha;
    const Eigen::MatrixXd v =
        model.chol.triangularView<Eigen::Lower>().solve(kstar);
    for (Eigen::Index j = 0; j < len; ++j) {
      const double var = model.hp.sigma2 - v.col(j).squaredNorm();
      out.std[start + j] = std::sqrt(std::max(var, 0.0));
    }
  }
  return out;
}

PosteriorPrediction predict(const GpModel& model,
                            const std::vector<OcclusionPoint>& queries) {
  Eigen::MatrixXd q(static_cast<Eigen::Index>(queries.size()), 3);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    q.row(static_cast<Eigen::Index>(i)) = queries[i].coords().transpose();
  }
  return predict(model, q);
}

double log_marginal_likelihood(const TrainingSet& training,
                               const GpHyperparams& hp) {
  const GpModel model = fit(training, hp);
  const Eigen::Index n = model.train_coords.rows();
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      model.training.responses.data(), n);
  return -0.5 * y.dot(model.alpha) -
         model.chol.diagonal().array().log().sum() -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

GpHyperparams grid_search_hp(const TrainingSet& training,
                             const GpHyperparams& base,
                             std::span<const double> sigma2_grid,
                             std::span<const double> lengthscale_grid) {
  if (sigma2_grid.empty() || lengthscale_grid.empty()) {
    throw std::invalid_argument("hyperparameter grids must be non-empty");
  }
  GpHyperparams best = base;
  double best_lml = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const double sigma2 : sigma2_grid) {
    for (const double lengthscale : lengthscale_grid) {
      GpHyperparams hp = base;
      hp.sigma2 = sigma2;
      hp.lengthscale = lengthscale;
      double lml;
      try {
        lml = log_marginal_likelihood(training, hp);
      } catch (const FitError&) {
        continue;
      }
      if (!any || lml > best_lml) {
        best = hp;
        best_lml = lml;
        any = true;
      }
    }
  }
  if (!any) {
    throw FitError("every hyperparameter grid point failed to fit");
  }
  return best;
}

}  // namespace bosal
