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

#ifndef BOSAL_EXHAUSTIVE_HPP
#define BOSAL_EXHAUSTIVE_HPP

#include <cstdint>
#include <vector>

#include "bosal/image.hpp"
#include "bosal/model.hpp"

namespace bosal {

/// center_assign: the mean response over s lives at the window centre (the
/// coarse grid is bilinearly upsampled when stride > 1). window_spread: each
/// window adds y/s^2 to every pixel it covers and pixels are divided by the
/// number of windows that covered them.
enum class Accumulation { center_assign, window_spread };

struct SweepConfig {
  std::vector<int> sizes;
  int stride = 1;
  double fill = kDefaultFill;
  Accumulation accumulation = Accumulation::center_assign;

  void validate() const;
};

struct SweepResult {
  SaliencyMap map;  // raw y aggregation; not normalized
  std::uint64_t occlusion_queries = 0;
  std::uint64_t total_queries = 0;  // occlusion_queries + 1 base score
};

/// The sliding-window baseline: occludes every grid centre at the given
/// stride with every window size and records y = f(X) - f(X_hat).
/// Issues exactly ceil(W/stride) * ceil(H/stride) * |sizes| occlusion
/// queries plus one base query. Model failures propagate and partial
/// results are discarded.
SweepResult run_exhaustive(const ModelHandle& model, const Image& image,
                           const SweepConfig& config);

/// Stride whose sweep query count is closest to `budget` (ties resolve to
/// the smaller stride). Used for budget-matched comparisons.
int stride_for_budget(int width, int height, std::size_t n_sizes,
                      std::uint64_t budget);

}  // namespace bosal

#endif  // BOSAL_EXHAUSTIVE_HPP
