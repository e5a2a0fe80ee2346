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

#include "bosal/image.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace bosal {

namespace {

void check_dims(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(width) + "x" +
                                std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("channels must be 1 or 3, got " +
                                std::to_string(channels));
  }
}

}  // namespace

Image::Image(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels),
      data_(std::move(data)) {
  check_dims(width, height, channels);
  const std::size_t expected =
      static_cast<std::size_t>(width) * height * channels;
  if (data_.size() != expected) {
    throw std::invalid_argument(
        "image data length " + std::to_string(data_.size()) +
        " does not match " + std::to_string(expected));
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("pixel values must lie in [0, 1]");
    }
  }
}

Image Image::constant(int width, int height, int channels, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("pixel values must lie in [0, 1]");
  }
  Image img(width, height, channels);
  std::fill(img.data_.begin(), img.data_.end(), value);
  return img;
}

void BoundingBox::validate_within(int width, int height) const {
  if (w <= 0 || h <= 0) {
    throw std::invalid_argument("bounding box extent must be positive");
  }
  if (x0 < 0 || y0 < 0 || x0 + w > width || y0 + h > height) {
    throw std::invalid_argument(
        "bounding box [" + std::to_string(x0) + "," + std::to_string(y0) +
        " " + std::to_string(w) + "x" + std::to_string(h) +
        "] exceeds image bounds " + std::to_string(width) + "x" +
        std::to_string(height));
  }
}

SaliencyMap::SaliencyMap(int width, int height)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("saliency map dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(width) * height, 0.0);
}

SaliencyMap::SaliencyMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("saliency map dimensions must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("saliency map value count does not match");
  }
}

Image blank_window(const Image& image, int u, int v, int s, double fill) {
  if (u < 0 || u >= image.width() || v < 0 || v >= image.height()) {
    throw std::domain_error("window centre (" + std::to_string(u) + "," +
                            std::to_string(v) + ") outside image");
  }
  if (s < 1) {
    throw std::domain_error("window size must be >= 1");
  }
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw std::domain_error("fill value must lie in [0, 1]");
  }

  // floor(s/2) pixels before the centre, s - floor(s/2) after, then clip.
  const int x0 = std::max(0, u - s / 2);
  const int x1 = std::min(image.width(), u - s / 2 + s);
  const int y0 = std::max(0, v - s / 2);
  const int y1 = std::min(image.height(), v - s / 2 + s);

  Image out = image;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < out.channels(); ++c) {
        out.at(x, y, c) = fill;
      }
    }
  }
  return out;
}

SaliencyMap normalize_map(const SaliencyMap& map) {
  SaliencyMap out = map;
  double max_value = 0.0;
  for (double& v : out.values()) {
    v = std::max(v, 0.0);
    max_value = std::max(max_value, v);
  }
  if (max_value > 0.0) {
    for (double& v : out.values()) {
      v /= max_value;
    }
  }
  return out;
}

SaliencyMap upsample_bilinear(const SaliencyMap& coarse, int out_width,
                              int out_height, int stride) {
  if (stride < 1) {
    throw std::invalid_argument("stride must be >= 1");
  }
  if (stride == 1 && coarse.width() == out_width &&
      coarse.height() == out_height) {
    return coarse;
  }
  SaliencyMap out(out_width, out_height);
  const int cw = coarse.width();
  const int ch = coarse.height();
  for (int y = 0; y < out_height; ++y) {
    const double gy = static_cast<double>(y) / stride;
    const int i0 = std::min(static_cast<int>(gy), ch - 1);
    const int i1 = std::min(i0 + 1, ch - 1);
    const double ty = std::min(gy - i0, 1.0);
    for (int x = 0; x < out_width; ++x) {
      const double gx = static_cast<double>(x) / stride;
      const int j0 = std::min(static_cast<int>(gx), cw - 1);
      const int j1 = std::min(j0 + 1, cw - 1);
      const double tx = std::min(gx - j0, 1.0);
      const double top =
          (1.0 - tx) * coarse.at(j0, i0) + tx * coarse.at(j1, i0);
      const double bottom =
          (1.0 - tx) * coarse.at(j0, i1) + tx * coarse.at(j1, i1);
      out.at(x, y) = (1.0 - ty) * top + ty * bottom;
    }
  }
  return out;
}

std::pair<int, int> argmax_pixel(const SaliencyMap& map) {
  int best_x = 0;
  int best_y = 0;
  double best = map.at(0, 0);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (map.at(x, y) > best) {
        best = map.at(x, y);
        best_x = x;
        best_y = y;
      }
    }
  }
  return {best_x, best_y};
}

Image uniform_random_image(int width, int height, int channels,
                           std::uint64_t seed, double exclude_value) {
  Image img(width, height, channels);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& v : img.data()) {
    double x = dist(rng);
    while (exclude_value >= 0.0 && std::abs(x - exclude_value) < 1e-9) {
      x = dist(rng);
    }
    v = x;
  }
  return img;
}

}  // namespace bosal
