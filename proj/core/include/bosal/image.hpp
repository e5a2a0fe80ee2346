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

#ifndef BOSAL_IMAGE_HPP
#define BOSAL_IMAGE_HPP

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace bosal {

/// Canonical blanking colour: the 8-bit constant 128 on the [0, 1] pixel scale.
inline constexpr double kDefaultFill = 128.0 / 255.0;

/// Row-major H x W x C raster with real-valued pixels in [0, 1].
/// Channels is 1 (grayscale) or 3 (RGB). Instances are treated as immutable
/// once handed to the engines; operations on images return copies.
class Image {
public:
  Image(int width, int height, int channels);
  Image(int width, int height, int channels, std::vector<double> data);

  static Image constant(int width, int height, int channels, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  double at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

private:
  int width_;
  int height_;
  int channels_;
  std::vector<double> data_;
};

/// Axis-aligned region with top-left corner (x0, y0) and extent w x h.
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  bool contains(int x, int y) const {
    return x >= x0 && x < x0 + w && y >= y0 && y < y0 + h;
  }
  long long area() const { return static_cast<long long>(w) * h; }

  /// Throws std::invalid_argument unless w, h > 0 and the box lies inside
  /// a width x height raster.
  void validate_within(int width, int height) const;
};

/// Per-pixel scalar field over a W x H grid. Values are unconstrained reals
/// until passed through normalize_map.
class SaliencyMap {
public:
  SaliencyMap(int width, int height);
  SaliencyMap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }

  double at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  double& at(int x, int y) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

private:
  int width_;
  int height_;
  std::vector<double> values_;
};

/// Returns a copy of `image` with the s x s square centred at (u, v) set to
/// `fill` on every channel. u is the column index, v the row index. Even
/// sizes anchor floor(s/2) pixels before the centre and s - floor(s/2) after,
/// on both axes. The window is clipped at the borders; pixels outside the
/// clipped window are untouched.
///
/// Throws std::domain_error if (u, v) is outside the image, s < 1, or fill
/// is outside [0, 1].
Image blank_window(const Image& image, int u, int v, int s,
                   double fill = kDefaultFill);

/// Clamps negative values to zero, then rescales linearly so the maximum is
/// exactly 1. An all-zero (or all-negative) input maps to an all-zero output.
SaliencyMap normalize_map(const SaliencyMap& map);

/// Bilinearly interpolates a coarse grid whose samples sit at pixel positions
/// (j*stride, i*stride) up to a full out_width x out_height map. Positions
/// beyond the last sample are clamped (constant extension).
SaliencyMap upsample_bilinear(const SaliencyMap& coarse, int out_width,
                              int out_height, int stride);

/// Pixel position (x, y) of the largest value, first occurrence in row-major
/// order on ties.
std::pair<int, int> argmax_pixel(const SaliencyMap& map);

/// Deterministic uniform-noise image for synthetic experiments. When
/// exclude_value >= 0, samples closer than 1e-9 to it are redrawn so that no
/// pixel reads as "blanked" to the synthetic oracles.
Image uniform_random_image(int width, int height, int channels,
                           std::uint64_t seed, double exclude_value = -1.0);

}  // namespace bosal

#endif  // BOSAL_IMAGE_HPP
