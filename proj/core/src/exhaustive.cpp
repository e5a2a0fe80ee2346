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

#include "bosal/exhaustive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bosal {

void SweepConfig::validate() const {
  if (sizes.empty()) {
    throw std::invalid_argument("size set must be non-empty");
  }
  for (const int s : sizes) {
    if (s < 1) {
      throw std::invalid_argument("window sizes must be positive");
    }
  }
  if (stride < 1) {
    throw std::invalid_argument("stride must be positive");
  }
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw std::invalid_argument("fill must lie in [0, 1]");
  }
}

namespace {

struct WindowBounds {
  int x0, x1, y0, y1;  // half-open, clipped to the raster
};

// Same anchoring as blank_window: floor(s/2) pixels before the centre.
WindowBounds window_bounds(int u, int v, int s, int width, int height) {
  WindowBounds b;
  b.x0 = std::max(0, u - s / 2);
  b.x1 = std::min(width, u - s / 2 + s);
  b.y0 = std::max(0, v - s / 2);
  b.y1 = std::min(height, v - s / 2 + s);
  return b;
}

}  // namespace

SweepResult run_exhaustive(const ModelHandle& model, const Image& image,
                           const SweepConfig& config) {
  config.validate();
  const int width = image.width();
  const int height = image.height();
  const int channels = image.channels();
  for (const int s : config.sizes) {
    if (s > std::max(width, height)) {
      throw std::invalid_argument("window size exceeds both image dimensions");
    }
  }
  const int cols = (width + config.stride - 1) / config.stride;
  const int rows = (height + config.stride - 1) / config.stride;
  const std::size_t n_sizes = config.sizes.size();

  // One scratch raster, mutated per query (fill, score, restore): the sweep
  // issues hundreds of thousands of queries and must not copy the image for
  // each one.
  Image scratch = image;
  const int max_size = *std::max_element(config.sizes.begin(),
                                         config.sizes.end());
  std::vector<double> saved(static_cast<std::size_t>(max_size) * max_size *
                            channels);

  SaliencyMap coarse(cols, rows);
  std::vector<double> spread;
  std::vector<double> coverage;
  if (config.accumulation == Accumulation::window_spread) {
    spread.assign(static_cast<std::size_t>(width) * height, 0.0);
    coverage.assign(static_cast<std::size_t>(width) * height, 0.0);
  }

  SweepResult result{SaliencyMap(width, height), 0, 0};
  for (int row = 0; row < rows; ++row) {
    const int v = row * config.stride;
    for (int col = 0; col < cols; ++col) {
      const int u = col * config.stride;
      double sum = 0.0;
      for (const int s : config.sizes) {
        const WindowBounds b = window_bounds(u, v, s, width, height);
        std::size_t k = 0;
        for (int y = b.y0; y < b.y1; ++y) {
          for (int x = b.x0; x < b.x1; ++x) {
            for (int c = 0; c < channels; ++c) {
              saved[k++] = scratch.at(x, y, c);
              scratch.at(x, y, c) = config.fill;
            }
          }
        }
        const ScoreDelta d = delta(model, image, scratch);
        k = 0;
        for (int y = b.y0; y < b.y1; ++y) {
          for (int x = b.x0; x < b.x1; ++x) {
            for (int c = 0; c < channels; ++c) {
              scratch.at(x, y, c) = saved[k++];
            }
          }
        }
        ++result.occlusion_queries;
        if (config.accumulation == Accumulation::center_assign) {
          sum += d.y;
        } else {
          const double share = d.y / (static_cast<double>(s) * s);
          for (int y = b.y0; y < b.y1; ++y) {
            for (int x = b.x0; x < b.x1; ++x) {
              const std::size_t i = static_cast<std::size_t>(y) * width + x;
              spread[i] += share;
              coverage[i] += 1.0;
            }
          }
        }
      }
      if (config.accumulation == Accumulation::center_assign) {
        coarse.at(col, row) = sum / static_cast<double>(n_sizes);
      }
    }
  }

  if (config.accumulation == Accumulation::center_assign) {
    result.map = upsample_bilinear(coarse, width, height, config.stride);
  } else {
    SaliencyMap map(width, height);
    for (std::size_t i = 0; i < spread.size(); ++i) {
      map.values()[i] = coverage[i] > 0.0 ? spread[i] / coverage[i] : 0.0;
    }
    result.map = std::move(map);
  }
  result.total_queries = result.occlusion_queries + 1;
  return result;
}

int stride_for_budget(int width, int height, std::size_t n_sizes,
                      std::uint64_t budget) {
  if (width < 1 || height < 1 || n_sizes < 1) {
    throw std::invalid_argument("grid dimensions and size count must be "
                                "positive");
  }
  int best_stride = 1;
  std::uint64_t best_gap = std::numeric_limits<std::uint64_t>::max();
  const int limit = std::max(width, height);
  for (int stride = 1; stride <= limit; ++stride) {
    const std::uint64_t count =
        static_cast<std::uint64_t>((width + stride - 1) / stride) *
        static_cast<std::uint64_t>((height + stride - 1) / stride) * n_sizes;
    const std::uint64_t gap = count > budget ? count - budget : budget - count;
    if (gap < best_gap) {
      best_gap = gap;
      best_stride = stride;
    }
  }
  return best_stride;
}

}  // namespace bosal
