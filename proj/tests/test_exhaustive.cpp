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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "bosal/exhaustive.hpp"
#include "bosal/model.hpp"
#include "doctest.h"

using bosal::Accumulation;
using bosal::BoundingBox;
using bosal::Image;
using bosal::ModelHandle;
using bosal::SweepConfig;

namespace {

SweepConfig config_for(std::vector<int> sizes, int stride,
                       Accumulation acc = Accumulation::center_assign) {
  SweepConfig cfg;
  cfg.sizes = std::move(sizes);
  cfg.stride = stride;
  cfg.accumulation = acc;
  return cfg;
}

}  // namespace

TEST_CASE("query count is ceil(W/stride) * ceil(H/stride) * |sizes| + 1") {
  const ModelHandle model =
      bosal::make_synthetic_box(4, 4, BoundingBox{0, 0, 2, 2});
  const Image image =
      bosal::uniform_random_image(4, 4, 1, 1, bosal::kDefaultFill);
  const auto result =
      bosal::run_exhaustive(model, image, config_for({2, 3}, 2));
  CHECK(result.occlusion_queries == 8);
  CHECK(result.total_queries == 9);
  CHECK(model.query_count() == 9);

  // Ragged division rounds up.
  const ModelHandle model5 =
      bosal::make_synthetic_box(5, 3, BoundingBox{0, 0, 2, 2});
  const Image image5 =
      bosal::uniform_random_image(5, 3, 1, 2, bosal::kDefaultFill);
  const auto ragged =
      bosal::run_exhaustive(model5, image5, config_for({2}, 2));
  CHECK(ragged.occlusion_queries == 3 * 2 * 1);
}

TEST_CASE("the input image is not modified by the sweep") {
  const ModelHandle model =
      bosal::make_synthetic_box(16, 16, BoundingBox{4, 4, 8, 8});
  const Image image =
      bosal::uniform_random_image(16, 16, 1, 3, bosal::kDefaultFill);
  const std::vector<double> before = image.data();
  bosal::run_exhaustive(model, image, config_for({4, 8}, 2));
  CHECK(image.data() == before);
}

TEST_CASE("center assignment is exactly zero outside the dilated box") {
  const BoundingBox box{8, 8, 8, 8};
  const ModelHandle model = bosal::make_synthetic_box(32, 32, box);
  const Image image =
      bosal::uniform_random_image(32, 32, 1, 4, bosal::kDefaultFill);
  const auto result =
      bosal::run_exhaustive(model, image, config_for({4}, 1));
  REQUIRE(result.map.width() == 32);
  const int reach = 2;  // ceil(4/2)
  for (int v = 0; v < 32; ++v) {
    for (int u = 0; u < 32; ++u) {
      const bool inside_dilation =
          u >= box.x0 - reach && u < box.x0 + box.w + reach &&
          v >= box.y0 - reach && v < box.y0 + box.h + reach;
      if (!inside_dilation) {
        CHECK(result.map.at(u, v) == 0.0);
      }
    }
  }
}

TEST_CASE("fully covering windows record the whole base drop") {
  // Only the centre (12, 12) makes a size-8 window cover the 8x8 box.
  const BoundingBox box{8, 8, 8, 8};
  const ModelHandle model = bosal::make_synthetic_box(32, 32, box);
  const Image image =
      bosal::uniform_random_image(32, 32, 1, 5, bosal::kDefaultFill);
  const auto result =
      bosal::run_exhaustive(model, image, config_for({8}, 1));
  CHECK(result.map.at(12, 12) == 1.0);
  CHECK(result.map.at(0, 0) == 0.0);
}

TEST_CASE("strided center assignment upsamples to full resolution") {
  const BoundingBox box{8, 8, 16, 16};
  const ModelHandle model = bosal::make_synthetic_box(32, 32, box);
  const Image image =
      bosal::uniform_random_image(32, 32, 1, 6, bosal::kDefaultFill);
  const auto result =
      bosal::run_exhaustive(model, image, config_for({8, 16}, 4));
  CHECK(result.map.width() == 32);
  CHECK(result.map.height() == 32);
  CHECK(result.occlusion_queries == 8 * 8 * 2);
  // The box centre region carries the peak.
  const auto [ax, ay] = bosal::argmax_pixel(result.map);
  CHECK(box.contains(ax, ay));
}

TEST_CASE("window spreading divides by per-pixel coverage") {
  const BoundingBox box{8, 8, 8, 8};
  const ModelHandle model = bosal::make_synthetic_box(32, 32, box);
  const Image image =
      bosal::uniform_random_image(32, 32, 1, 7, bosal::kDefaultFill);
  const auto result = bosal::run_exhaustive(
      model, image, config_for({8}, 1, Accumulation::window_spread));
  // Pixels never covered by a box-overlapping window stay zero; the box
  // interior accumulates positive mass; nothing goes negative.
  CHECK(result.map.at(0, 0) == 0.0);
  CHECK(result.map.at(12, 12) > 0.0);
  for (const double v : result.map.values()) {
    CHECK(v >= 0.0);
  }
  const auto [ax, ay] = bosal::argmax_pixel(result.map);
  CHECK(box.contains(ax, ay));
}

TEST_CASE("sweep configuration validation") {
  SweepConfig cfg = config_for({4}, 1);
  CHECK_NOTHROW(cfg.validate());
  cfg.sizes = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = config_for({0}, 1);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = config_for({4}, 0);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = config_for({4}, 1);
  cfg.fill = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  // Oversized windows are rejected against the image.
  const ModelHandle model =
      bosal::make_synthetic_box(16, 16, BoundingBox{4, 4, 8, 8});
  const Image image =
      bosal::uniform_random_image(16, 16, 1, 8, bosal::kDefaultFill);
  CHECK_THROWS_AS(
      bosal::run_exhaustive(model, image, config_for({32}, 1)),
      std::invalid_argument);
}

TEST_CASE("model failures propagate out of the sweep") {
  const std::string stub = std::string(TEST_DATA_DIR) + "/stub_model.py";
  const ModelHandle model =
      bosal::make_subprocess_model({"python3", stub, "die"}, "t");
  const Image image =
      bosal::uniform_random_image(8, 8, 1, 9, bosal::kDefaultFill);
  CHECK_THROWS_AS(bosal::run_exhaustive(model, image, config_for({4}, 4)),
                  bosal::QueryError);
}

TEST_CASE("stride_for_budget matches counts and prefers smaller strides") {
  // 128x128, 3 sizes: stride 16 gives 192 queries, the closest to 200.
  CHECK(bosal::stride_for_budget(128, 128, 3, 200) == 16);
  // Large budgets saturate at stride 1.
  CHECK(bosal::stride_for_budget(32, 32, 2, 1u << 20) == 1);
  // Tiny budgets collapse the grid to a single centre per size.
  CHECK(bosal::stride_for_budget(128, 128, 3, 1) == 128);
  // Strides 4 through 7 all give 4 queries on 8x8; the smallest stride
  // hitting the best distance wins.
  CHECK(bosal::stride_for_budget(8, 8, 1, 4) == 4);
  CHECK(bosal::stride_for_budget(8, 8, 1, 6) == 4);
}
