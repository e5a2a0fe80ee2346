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

#include "bosal/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bosal {

CandidateGrid::CandidateGrid(int width, int height, std::vector<int> sizes,
                             int stride)
    : width_(width), height_(height), stride_(stride),
      sizes_(std::move(sizes)) {
  if (width_ <= 0 || height_ <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  if (stride_ <= 0) {
    throw std::invalid_argument("stride must be positive");
  }
  if (sizes_.empty()) {
    throw std::invalid_argument("size set must be non-empty");
  }
  for (const int s : sizes_) {
    if (s <= 0) {
      throw std::invalid_argument("window sizes must be positive");
    }
  }
  cols_ = (width_ + stride_ - 1) / stride_;
  rows_ = (height_ + stride_ - 1) / stride_;
  count_ = static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_) *
           sizes_.size();
}

OcclusionPoint CandidateGrid::at(std::size_t index) const {
  if (index >= count_) {
    throw std::out_of_range("candidate index out of range");
  }
  const std::size_t n_sizes = sizes_.size();
  const std::size_t size_idx = index % n_sizes;
  const std::size_t cell = index / n_sizes;
  const std::size_t col = cell % static_cast<std::size_t>(cols_);
  const std::size_t row = cell / static_cast<std::size_t>(cols_);
  return {static_cast<int>(col) * stride_, static_cast<int>(row) * stride_,
          sizes_[size_idx]};
}

std::optional<std::size_t> CandidateGrid::index_of(
    const OcclusionPoint& p) const {
  if (p.u < 0 || p.u >= width_ || p.v < 0 || p.v >= height_) {
    return std::nullopt;
  }
  if (p.u % stride_ != 0 || p.v % stride_ != 0) {
    return std::nullopt;
  }
  const auto it = std::find(sizes_.begin(), sizes_.end(), p.s);
  if (it == sizes_.end()) {
    return std::nullopt;
  }
  const std::size_t size_idx =
      static_cast<std::size_t>(std::distance(sizes_.begin(), it));
  const std::size_t cell =
      static_cast<std::size_t>(p.v / stride_) *
          static_cast<std::size_t>(cols_) +
      static_cast<std::size_t>(p.u / stride_);
  return cell * sizes_.size() + size_idx;
}

Eigen::MatrixXd CandidateGrid::coords() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(count_), 3);
  for (std::size_t i = 0; i < count_; ++i) {
    const OcclusionPoint p = at(i);
    m(static_cast<Eigen::Index>(i), 0) = static_cast<double>(p.u);
    m(static_cast<Eigen::Index>(i), 1) = static_cast<double>(p.v);
    m(static_cast<Eigen::Index>(i), 2) = static_cast<double>(p.s);
  }
  return m;
}

void AcquisitionConfig::validate() const {
  const bool ok =
      (formula == EiFormula::standard && selection == SelectionRule::argmax) ||
      (formula == EiFormula::paper_literal &&
       selection == SelectionRule::argmin);
  if (!ok) {
    throw std::invalid_argument(
        "standard EI pairs with argmax, the literal variant with argmin");
  }
}

namespace {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

}  // namespace

double expected_improvement(double mean, double std, double y_best,
                            EiFormula formula) {
  if (std < 0.0 || !std::isfinite(std)) {
    throw std::invalid_argument("std must be non-negative and finite");
  }
  if (std == 0.0) {
    return 0.0;
  }
  const double z = (mean - y_best) / std;
  if (formula == EiFormula::standard) {
    const double value = (mean - y_best) * normal_cdf(z) + std * normal_pdf(z);
    return std::max(value, 0.0);
  }
  return (mean - y_best) * normal_cdf(z) - std * normal_pdf(z);
}

std::optional<Selection> select_next(const PosteriorPrediction& posterior,
                                     const CandidateGrid& grid,
                                     const TrainingSet& training,
                                     double y_best,
                                     const AcquisitionConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(posterior.mean.size()) != grid.size() ||
      static_cast<std::size_t>(posterior.std.size()) != grid.size()) {
    throw std::invalid_argument("posterior does not cover the grid");
  }

  std::vector<bool> sampled(grid.size(), false);
  for (const auto& x : training.points) {
    const OcclusionPoint p{static_cast<int>(x[0]), static_cast<int>(x[1]),
                           static_cast<int>(x[2])};
    if (p.coords() != x) {
      continue;  // off-integer points can never collide with the grid
    }
    if (const auto idx = grid.index_of(p)) {
      sampled[*idx] = true;
    }
  }

  std::optional<Selection> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (sampled[i]) {
      continue;
    }
    const double value =
        expected_improvement(posterior.mean[static_cast<Eigen::Index>(i)],
                             posterior.std[static_cast<Eigen::Index>(i)],
                             y_best, config.formula);
    const bool better =
        !best.has_value() ||
        (config.selection == SelectionRule::argmax
             ? value > best->acquisition_value
             : value < best->acquisition_value);
    if (better) {
      best = Selection{grid.at(i), i, value, y_best};
    }
  }
  return best;
}

}  // namespace bosal
