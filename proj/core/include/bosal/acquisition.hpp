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

#ifndef BOSAL_ACQUISITION_HPP
#define BOSAL_ACQUISITION_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "bosal/gp.hpp"

namespace bosal {

/// Discrete search domain Q: window centres on a stride grid over the image
/// crossed with the window-size set. Candidate order is row-major over
/// (v, u) with the size index innermost; indices are the tie-break order.
class CandidateGrid {
public:
  CandidateGrid(int width, int height, std::vector<int> sizes, int stride = 1);

  std::size_t size() const { return count_; }
  OcclusionPoint at(std::size_t index) const;

  /// Index of an exactly representable candidate, std::nullopt when the
  /// point is off-grid (misaligned centre or unknown size).
  std::optional<std::size_t> index_of(const OcclusionPoint& p) const;

  /// All candidates as an M x 3 matrix in index order, ready for predict().
  Eigen::MatrixXd coords() const;

  int width() const { return width_; }
  int height() const { return height_; }
  int stride() const { return stride_; }
  int cols() const { return cols_; }
  int rows() const { return rows_; }
  const std::vector<int>& sizes() const { return sizes_; }

private:
  int width_;
  int height_;
  int stride_;
  int cols_;
  int rows_;
  std::vector<int> sizes_;
  std::size_t count_;
};

/// The standard formula is the established Expected Improvement; the
/// paper-literal variant flips the sign of the density term and pairs with
/// argmin selection. Lowest index wins ties in either mode.
enum class EiFormula { standard, paper_literal };
enum class SelectionRule { argmax, argmin };

struct AcquisitionConfig {
  EiFormula formula = EiFormula::standard;
  SelectionRule selection = SelectionRule::argmax;

  /// Enforces the pairing standard<->argmax, paper_literal<->argmin.
  void validate() const;

  static AcquisitionConfig standard() { return {}; }
  static AcquisitionConfig paper_literal() {
    return {EiFormula::paper_literal, SelectionRule::argmin};
  }
};

/// Expected Improvement of a Gaussian posterior N(mean, std^2) over the
/// incumbent y_best, with Z = (mean - y_best)/std:
///   standard:      (mean - y_best) Phi(Z) + std phi(Z)
///   paper_literal: (mean - y_best) Phi(Z) - std phi(Z)
/// Both return exactly 0 when std = 0. Throws std::invalid_argument for
/// std < 0.
double expected_improvement(double mean, double std, double y_best,
                            EiFormula formula = EiFormula::standard);

struct Selection {
  OcclusionPoint point;
  std::size_t index = 0;
  double acquisition_value = 0.0;
  double y_best = 0.0;  // max of the observed responses
};

/// Scores every candidate and returns the acquisition optimizer, skipping
/// candidates already present in `training` (matched by exact coordinates).
/// `y_best` is the incumbent used inside the EI formula and must be on the
/// same scale as the posterior. Returns std::nullopt when every candidate
/// has been sampled (exhaustion). The posterior must cover exactly the
/// grid's candidates, in index order.
std::optional<Selection> select_next(const PosteriorPrediction& posterior,
                                     const CandidateGrid& grid,
                                     const TrainingSet& training,
                                     double y_best,
                                     const AcquisitionConfig& config = {});

}  // namespace bosal

#endif  // BOSAL_ACQUISITION_HPP
