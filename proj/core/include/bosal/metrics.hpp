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

#ifndef BOSAL_METRICS_HPP
#define BOSAL_METRICS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "bosal/image.hpp"
#include "bosal/model.hpp"

namespace bosal {

struct RatioResult {
  double r_sal = 0.0;      // inside_mass / total_mass, in [0, 1]
  double inside_mass = 0.0;
  double total_mass = 0.0;
  bool degenerate = false;  // total mass was zero; r_sal defined as 0
};

/// Saliency ratio: mass of the (non-negative) map inside the box over the
/// total mass. 1 = all mass inside the box, 0 = none. Throws
/// std::invalid_argument if the map has negative values (normalize first) or
/// the box does not fit the map.
RatioResult saliency_ratio(const SaliencyMap& map, const BoundingBox& box);

/// Control for the acquisition function: draws `budget` uniform candidates
/// without replacement from the same (u, v, s) grid the sampling engine
/// uses, fits the same GP once and extracts the map identically. Isolates
/// what Expected Improvement contributes over blind sampling.
SaliencyMap random_baseline(const ModelHandle& model, const Image& image,
                            int budget, const std::vector<int>& sizes,
                            std::uint64_t seed, double fill = kDefaultFill,
                            int prediction_stride = 4);

/// Five-number summary: min, first quartile, arithmetic mean, third
/// quartile, max. Quartiles are Tukey hinges (the median-inclusive halves
/// for odd n) with midpoint interpolation inside each half. Outliers are
/// the values below q1 - 1.5*(q3 - q1); only the low side is flagged.
struct DistributionSummary {
  double min = 0.0;
  double q1 = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::vector<double> outliers;
};

DistributionSummary summarize(std::span<const double> values);

}  // namespace bosal

#endif  // BOSAL_METRICS_HPP
