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

#include "bosal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bosal/bo.hpp"

namespace bosal {

RatioResult saliency_ratio(const SaliencyMap& map, const BoundingBox& box) {
  box.validate_within(map.width(), map.height());
  RatioResult out;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double v = map.at(x, y);
      if (v < 0.0 || !std::isfinite(v)) {
        throw std::invalid_argument(
            "saliency ratio needs a non-negative finite map");
      }
      out.total_mass += v;
      if (box.contains(x, y)) {
        out.inside_mass += v;
      }
    }
  }
  if (out.total_mass == 0.0) {
    out.degenerate = true;
    out.r_sal = 0.0;
  } else {
    out.r_sal = out.inside_mass / out.total_mass;
  }
  return out;
}

SaliencyMap random_baseline(const ModelHandle& model, const Image& image,
                            int budget, const std::vector<int>& sizes,
                            std::uint64_t seed, double fill,
                            int prediction_stride) {
  if (budget < 1) {
    throw std::invalid_argument("budget must be positive");
  }
  const CandidateGrid grid(image.width(), image.height(), sizes,
                           prediction_stride);
  if (static_cast<std::size_t>(budget) > grid.size()) {
    throw std::invalid_argument("budget exceeds the candidate count");
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::vector<bool> drawn(grid.size(), false);
  TrainingSet training;
  for (int i = 0; i < budget; ++i) {
    std::size_t idx = pick(rng);
    while (drawn[idx]) {
      idx = pick(rng);
    }
    drawn[idx] = true;
    const OcclusionPoint p = grid.at(idx);
    const Image occluded = blank_window(image, p.u, p.v, p.s, fill);
    training.add(p, delta(model, image, occluded).y);
  }

  const RescaledResponses scaled = rescale_responses(training.responses);
  const TrainingSet ts{training.points, scaled.values};
  const GpModel gp = fit(ts, GpHyperparams{});
  return extract_saliency(gp, image.width(), image.height(), sizes,
                          prediction_stride, Reduction::mean_over_s,
                          scaled.scale);
}

namespace {

// Midpoint-interpolated median of sorted[lo, hi).
double median_of(const std::vector<double>& sorted, std::size_t lo,
                 std::size_t hi) {
  const std::size_t n = hi - lo;
  const std::size_t mid = lo + n / 2;
  if (n % 2 == 1) {
    return sorted[mid];
  }
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

}  // namespace

DistributionSummary summarize(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("cannot summarize an empty list");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  DistributionSummary out;
  out.min = sorted.front();
  out.max = sorted.back();
  out.mean = 0.0;
  for (const double v : sorted) {
    out.mean += v;
  }
  out.mean /= static_cast<double>(n);

  // Tukey hinges: halves include the median element when n is odd.
  const std::size_t half = n / 2 + (n % 2);
  out.q1 = median_of(sorted, 0, half);
  out.q3 = median_of(sorted, n - half, n);

  const double fence = out.q1 - 1.5 * (out.q3 - out.q1);
  for (const double v : sorted) {
    if (v < fence) {
      out.outliers.push_back(v);
    }
  }
  return out;
}

}  // namespace bosal
