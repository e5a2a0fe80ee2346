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

#ifndef BOSAL_GP_HPP
#define BOSAL_GP_HPP

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace bosal {

/// Matérn kernel hyperparameters. nu must be one of 0.5, 1.5, 2.5 (the
/// smoothness values with closed forms); 2.5 is the default. jitter is the
/// diagonal noise added to the kernel matrix for numerical stability.
struct GpHyperparams {
  double sigma2 = 1.0;
  double lengthscale = 12.0;
  double nu = 2.5;
  double jitter = 1e-6;

  void validate() const;
};

/// One occlusion query location: window centre (u = column, v = row) and
/// window size s, all in pixels.
struct OcclusionPoint {
  int u = 0;
  int v = 0;
  int s = 0;

  friend bool operator==(const OcclusionPoint&, const OcclusionPoint&) = default;

  Eigen::Vector3d coords() const {
    return {static_cast<double>(u), static_cast<double>(v),
            static_cast<double>(s)};
  }
};

/// Observation set D = {x_i, y_i}: input triples over (u, v, s) and scalar
/// responses. Points are stored as reals; the engines feed integral pixel
/// coordinates.
struct TrainingSet {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> responses;

  void add(const Eigen::Vector3d& x, double y) {
    points.push_back(x);
    responses.push_back(y);
  }
  void add(const OcclusionPoint& x, double y) { add(x.coords(), y); }
  std::size_t size() const { return points.size(); }
};

class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Isotropic Matérn covariance of two points at Euclidean distance r:
///   nu = 0.5:  sigma2 * exp(-r/l)
///   nu = 1.5:  sigma2 * (1 + sqrt(3) r/l) * exp(-sqrt(3) r/l)
///   nu = 2.5:  sigma2 * (1 + sqrt(5) r/l + 5 r^2/(3 l^2)) * exp(-sqrt(5) r/l)
/// Total function: k(x, x) = sigma2 exactly and k decays to 0 as r grows.
double matern_kernel(double r, const GpHyperparams& hp);
double matern_kernel(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                     const GpHyperparams& hp);

/// Exact zero-mean GP regressor state: the (deduplicated) training set, the
/// lower Cholesky factor L of K + jitter*I and the weights alpha solving
/// (K + jitter*I) alpha = y.
struct GpModel {
  TrainingSet training;
  GpHyperparams hp;
  Eigen::MatrixXd chol;            // lower triangular L
  Eigen::VectorXd alpha;
  double effective_jitter = 0.0;   // after any escalation
  Eigen::MatrixXd train_coords;    // N x 3 row per training point
};

/// Posterior at a batch of query points.
struct PosteriorPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // sqrt(max(var, 0)), elementwise >= 0
};

/// Fits the GP: builds K, factorizes K + jitter*I and solves for alpha.
/// Exact duplicates with bit-equal responses are deduplicated; duplicates
/// with differing responses throw std::invalid_argument. If the Cholesky
/// factorization fails the jitter is escalated by x10 up to 3 retries before
/// a FitError is raised.
GpModel fit(const TrainingSet& training, const GpHyperparams& hp);

/// Standard GP posterior under a zero-mean prior:
///   mean = K*' alpha,   var = k(x*, x*) - |L^-1 K*|^2 columnwise.
/// `queries` is an M x 3 matrix, one row per point.
PosteriorPrediction predict(const GpModel& model,
                            const Eigen::MatrixXd& queries);
PosteriorPrediction predict(const GpModel& model,
                            const std::vector<OcclusionPoint>& queries);

/// Log marginal likelihood of the data under hp:
///   -1/2 y' alpha - sum log diag(L) - N/2 log(2 pi).
double log_marginal_likelihood(const TrainingSet& training,
                               const GpHyperparams& hp);

/// Grid search over (sigma2, lengthscale) maximizing the log marginal
/// likelihood; nu and jitter are taken from `base`. Grid points whose fit
/// fails are skipped; FitError if every point fails.
GpHyperparams grid_search_hp(const TrainingSet& training,
                             const GpHyperparams& base,
                             std::span<const double> sigma2_grid,
                             std::span<const double> lengthscale_grid);

}  // namespace bosal

#endif  // BOSAL_GP_HPP
