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

#ifndef BOSAL_TESTS_ORACLES_HPP
#define BOSAL_TESTS_ORACLES_HPP

// Independent reference implementations used only by tests. Each oracle
// recomputes a quantity through a different route than the library (general
// Gamma/Bessel kernel form, dense matrix inverse, adaptive quadrature), so
// agreement is evidence of correctness rather than repetition.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "bosal/gp.hpp"

namespace bosal::testing {

// Matern covariance in its general form,
//   k(r) = sigma2 * 2^(1 - nu) / Gamma(nu) * w^nu * K_nu(w),
//   w = sqrt(2 nu) r / l,
// valid for any nu > 0. The library's closed forms are the half-integer
// special cases of this expression.
inline double matern_bessel(double r, const GpHyperparams& hp) {
  if (r == 0.0) {
    return hp.sigma2;
  }
  const double w = std::sqrt(2.0 * hp.nu) * r / hp.lengthscale;
  return hp.sigma2 * std::pow(2.0, 1.0 - hp.nu) / std::tgamma(hp.nu) *
         std::pow(w, hp.nu) * boost::math::cyl_bessel_k(hp.nu, w);
}

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

// Zero-mean GP posterior by explicit matrix inversion (LU, not Cholesky).
// `jitter` must match the effective jitter the library used.
inline DensePosterior dense_gp_posterior(const TrainingSet& training,
                                         const GpHyperparams& hp,
                                         const Eigen::MatrixXd& queries,
                                         double jitter) {
  const Eigen::Index n = static_cast<Eigen::Index>(training.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = matern_bessel(
          (training.points[static_cast<std::size_t>(i)] -
           training.points[static_cast<std::size_t>(j)])
              .norm(),
          hp);
    }
  }
  k.diagonal().array() += jitter;
  const Eigen::MatrixXd k_inv = k.inverse();
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      training.responses.data(), static_cast<Eigen::Index>(n));

  const Eigen::Index m = queries.rows();
  DensePosterior out;
  out.mean.resize(m);
  out.std.resize(m);
  Eigen::VectorXd kstar(n);
  for (Eigen::Index q = 0; q < m; ++q) {
    const Eigen::Vector3d x = queries.row(q).transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      kstar(i) = matern_bessel(
          (training.points[static_cast<std::size_t>(i)] - x).norm(), hp);
    }
    out.mean(q) = kstar.dot(k_inv * y);
    const double var = hp.sigma2 - kstar.dot(k_inv * kstar);
    out.std(q) = std::sqrt(std::max(var, 0.0));
  }
  return out;
}

// Log marginal likelihood by LU decomposition (determinant route).
inline double dense_lml(const TrainingSet& training, const GpHyperparams& hp,
                        double jitter) {
  const Eigen::Index n = static_cast<Eigen::Index>(training.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = matern_bessel(
          (training.points[static_cast<std::size_t>(i)] -
           training.points[static_cast<std::size_t>(j)])
              .norm(),
          hp);
    }
  }
  k.diagonal().array() += jitter;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
  const double log_det =
      lu.matrixLU().diagonal().array().abs().log().sum();
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      training.responses.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd solved = lu.solve(y);
  return -0.5 * y.dot(solved) - 0.5 * log_det -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

// E[max(G - y_best, 0)] for G ~ N(mean, std^2) by adaptive quadrature over
// the improvement region.
inline double ei_quadrature(double mean, double std, double y_best) {
  const double z0 = (y_best - mean) / std;
  const auto integrand = [&](double t) {
    return (mean + std * t - y_best) * std::exp(-0.5 * t * t) /
           std::sqrt(2.0 * std::numbers::pi);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, z0, std::numeric_limits<double>::infinity(), 15, 1e-12);
}

// Uniformly scattered 3-D training data; responses in [-1, 1]. The domain
// mirrors the (u, v, s) scale the engines use.
inline TrainingSet random_training(std::size_t n, std::mt19937_64& rng,
                                   double extent = 64.0) {
  std::uniform_real_distribution<double> coord(0.0, extent);
  std::uniform_real_distribution<double> resp(-1.0, 1.0);
  TrainingSet d;
  for (std::size_t i = 0; i < n; ++i) {
    d.add(Eigen::Vector3d(coord(rng), coord(rng), coord(rng)), resp(rng));
  }
  return d;
}

}  // namespace bosal::testing

#endif  // BOSAL_TESTS_ORACLES_HPP
