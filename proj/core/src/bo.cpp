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

#include "bosal/bo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

namespace bosal {

void BoConfig::validate() const {
  if (iterations < 0) {
    throw std::invalid_argument("iterations must be non-negative");
  }
  if (n_init < 1) {
    throw std::invalid_argument("n_init must be at least 1");
  }
  if (sizes.empty()) {
    throw std::invalid_argument("size set must be non-empty");
  }
  for (const int s : sizes) {
    if (s < 1) {
      throw std::invalid_argument("window sizes must be positive");
    }
  }
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw std::invalid_argument("fill must lie in [0, 1]");
  }
  if (prediction_stride < 1) {
    throw std::invalid_argument("prediction stride must be positive");
  }
  hp.validate();
  acquisition.validate();
}

RescaledResponses rescale_responses(std::span<const double> y) {
  double peak = 0.0;
  for (const double v : y) {
    peak = std::max(peak, std::abs(v));
  }
  RescaledResponses out;
  out.scale = std::max(peak, 1e-8);
  out.values.reserve(y.size());
  for (const double v : y) {
    out.values.push_back(v / out.scale);
  }
  return out;
}

std::pair<SaliencyMap, BoTrace> run(const ModelHandle& model,
                                    const Image& image,
                                    const BoConfig& config) {
  config.validate();
  const int max_dim = std::max(image.width(), image.height());
  for (const int s : config.sizes) {
    if (s > max_dim) {
      throw std::invalid_argument("window size exceeds both image dimensions");
    }
  }
  const CandidateGrid grid(image.width(), image.height(), config.sizes,
                           config.prediction_stride);
  if (static_cast<std::size_t>(config.n_init) > grid.size()) {
    throw std::invalid_argument("n_init exceeds the candidate count");
  }

  BoTrace trace;
  TrainingSet training;       // raw-unit responses
  std::vector<double> raw;
  double y_best_raw = -std::numeric_limits<double>::infinity();

  const auto observe = [&](const OcclusionPoint& p, bool is_init, double acq,
                           double scale, double fit_seconds) {
    const Image occluded = blank_window(image, p.u, p.v, p.s, config.fill);
    ScoreDelta d;
    try {
      d = delta(model, image, occluded);
    } catch (const QueryError& e) {
      trace.model_queries = trace.records.size() + 1;
      throw BoRunError(e, trace);
    }
    trace.base_score = d.base_score;
    y_best_raw = std::max(y_best_raw, d.y);
    training.add(p, d.y);
    raw.push_back(d.y);
    BoRecord rec;
    rec.index = static_cast<int>(trace.records.size());
    rec.is_init = is_init;
    rec.point = p;
    rec.y = d.y;
    rec.y_best = y_best_raw;
    rec.acquisition_value = acq;
    rec.response_scale = scale;
    rec.fit_seconds = fit_seconds;
    trace.records.push_back(rec);
  };

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::vector<bool> drawn(grid.size(), false);
  for (int i = 0; i < config.n_init; ++i) {
    std::size_t idx = pick(rng);
    while (drawn[idx]) {
      idx = pick(rng);
    }
    drawn[idx] = true;
    observe(grid.at(idx), true, 0.0, 1.0, 0.0);
  }

  const Eigen::MatrixXd grid_coords = grid.coords();
  std::vector<double> y_best_history;  // raw y_best after each non-init pick
  for (int iter = 0; iter < config.iterations; ++iter) {
    const RescaledResponses scaled = rescale_responses(raw);
    TrainingSet ts{training.points, scaled.values};
    const auto t0 = std::chrono::steady_clock::now();
    const GpModel gp = fit(ts, config.hp);
    const double fit_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const PosteriorPrediction posterior = predict(gp, grid_coords);
    const double y_best_scaled =
        *std::max_element(scaled.values.begin(), scaled.values.end());
    const auto sel = select_next(posterior, grid, ts, y_best_scaled,
                                 config.acquisition);
    if (!sel) {
      trace.exhausted_candidates = true;
      break;
    }
    observe(sel->point, false, sel->acquisition_value, scaled.scale,
            fit_seconds);
    y_best_history.push_back(y_best_raw);
    if (config.stop_on_convergence && y_best_history.size() >= 100) {
      const std::size_t t = y_best_history.size();
      if (y_best_history[t - 1] - y_best_history[t - 51] <= 1e-4) {
        trace.converged_early = true;
        break;
      }
    }
  }

  // Final refit over everything observed so the map reflects all queries.
  const RescaledResponses scaled = rescale_responses(raw);
  const TrainingSet ts{training.points, scaled.values};
  const GpModel gp = fit(ts, config.hp);
  trace.response_scale = scaled.scale;
  trace.model_queries = trace.records.size() + 1;  // + the cached base query
  SaliencyMap map =
      extract_saliency(gp, image.width(), image.height(), config.sizes,
                       config.prediction_stride, config.reduction,
                       scaled.scale);
  return {std::move(map), std::move(trace)};
}

SaliencyMap extract_saliency(const GpModel& gp, int width, int height,
                             const std::vector<int>& sizes,
                             int prediction_stride, Reduction reduction,
                             double response_scale) {
  const CandidateGrid grid(width, height, sizes, prediction_stride);
  const PosteriorPrediction post = predict(gp, grid.coords());
  const int cols = grid.cols();
  const int rows = grid.rows();
  const std::size_t n_sizes = sizes.size();
  SaliencyMap coarse(cols, rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t base =
          (static_cast<std::size_t>(r) * cols + c) * n_sizes;
      double v;
      if (reduction == Reduction::mean_over_s) {
        v = 0.0;
        for (std::size_t k = 0; k < n_sizes; ++k) {
          v += post.mean[static_cast<Eigen::Index>(base + k)];
        }
        v /= static_cast<double>(n_sizes);
      } else {
        v = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n_sizes; ++k) {
          v = std::max(v, post.mean[static_cast<Eigen::Index>(base + k)]);
        }
      }
      coarse.at(c, r) = v * response_scale;
    }
  }
  const SaliencyMap full =
      upsample_bilinear(coarse, width, height, prediction_stride);
  return normalize_map(full);
}

std::string trace_to_jsonl(const BoTrace& trace) {
  std::string out;
  for (const auto& r : trace.records) {
    const nlohmann::json j{{"acq", r.acquisition_value},
                           {"i", r.index},
                           {"phase", r.is_init ? "init" : "bo"},
                           {"s", r.point.s},
                           {"scale", r.response_scale},
                           {"u", r.point.u},
                           {"v", r.point.v},
                           {"y", r.y},
                           {"y_best", r.y_best}};
    out += j.dump();
    out += '\n';
  }
  const nlohmann::json summary{
      {"base_score", trace.base_score},
      {"converged_early", trace.converged_early},
      {"exhausted_candidates", trace.exhausted_candidates},
      {"model_queries", trace.model_queries},
      {"records", trace.records.size()},
      {"response_scale", trace.response_scale}};
  out += summary.dump();
  out += '\n';
  return out;
}

void save_trace_jsonl(const BoTrace& trace,
                      const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  file << trace_to_jsonl(trace);
  file.flush();
  if (!file) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

}  // namespace bosal
