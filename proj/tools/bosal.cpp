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
//
// bosal: occlusion saliency maps for black-box scorers.
//
// Commands: bayes (sample-efficient saliency), exhaustive (sliding-window
// baseline), random-baseline (uniform-sampling control), eval (r_sal over a
// manifest), render (CSV map -> raster), bench (built-in synthetic suite).
// Exit codes: 0 success, 1 usage error, 2 model-adapter failure. Errors are
// one JSON line on stderr.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bosal/bo.hpp"
#include "bosal/exhaustive.hpp"
#include "bosal/image_io.hpp"
#include "bosal/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<int> parse_int_csv(const std::string& text) {
  std::vector<int> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    std::size_t pos = 0;
    const int v = std::stoi(item, &pos);
    if (pos != item.size()) {
      throw std::invalid_argument("bad integer list element: " + item);
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw std::invalid_argument("empty integer list");
  }
  return out;
}

// Fill values above 1 are read on the 0-255 byte scale.
double resolve_fill(double raw) {
  if (raw < 0.0 || raw > 255.0) {
    throw std::invalid_argument("fill must lie in [0, 1] or [0, 255]");
  }
  return raw > 1.0 ? raw / 255.0 : raw;
}

std::chrono::seconds adapter_timeout() {
  const char* env = std::getenv("SALIENCY_MODEL_TIMEOUT_SECS");
  if (env == nullptr) {
    return std::chrono::seconds(30);
  }
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) {
    throw std::invalid_argument(
        "SALIENCY_MODEL_TIMEOUT_SECS must be a positive integer");
  }
  return std::chrono::seconds(v);
}

void check_overwrite(const std::vector<fs::path>& files, bool force) {
  if (force) {
    return;
  }
  for (const auto& f : files) {
    if (fs::exists(f)) {
      throw std::runtime_error("refusing to overwrite " + f.string() +
                               " (use --force)");
    }
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  file << text;
  file.flush();
  if (!file) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

bosal::Reduction parse_reduction(const std::string& name) {
  if (name == "mean") {
    return bosal::Reduction::mean_over_s;
  }
  if (name == "max") {
    return bosal::Reduction::max_over_s;
  }
  throw std::invalid_argument("reduction must be mean or max");
}

bosal::AcquisitionConfig parse_formula(const std::string& name) {
  if (name == "standard") {
    return bosal::AcquisitionConfig::standard();
  }
  if (name == "paper") {
    return bosal::AcquisitionConfig::paper_literal();
  }
  throw std::invalid_argument("formula must be standard or paper");
}

bosal::Accumulation parse_accumulation(const std::string& name) {
  if (name == "center") {
    return bosal::Accumulation::center_assign;
  }
  if (name == "spread") {
    return bosal::Accumulation::window_spread;
  }
  throw std::invalid_argument("accumulation must be center or spread");
}

bosal::Colormap parse_colormap(const std::string& name) {
  if (name == "gray") {
    return bosal::Colormap::gray;
  }
  if (name == "viridis") {
    return bosal::Colormap::viridis;
  }
  throw std::invalid_argument("colormap must be gray or viridis");
}

json load_config_file(const std::string& path) {
  if (path.empty()) {
    return json::object();
  }
  std::ifstream file(path);
  if (!file) {
    throw std::invalid_argument("cannot read config file " + path);
  }
  json cfg;
  try {
    file >> cfg;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config file: ") + e.what());
  }
  if (!cfg.is_object()) {
    throw std::invalid_argument("config file must hold a JSON object");
  }
  return cfg;
}

// Flat-JSON config merge; command-line flags win over file values.
template <typename T>
void merge_config(const json& cfg, const char* key, const CLI::Option* opt,
                  T& var) {
  if (opt->count() == 0 && cfg.contains(key)) {
    try {
      var = cfg.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument(std::string("config key '") + key +
                                  "' has the wrong type");
    }
  }
}

json fivenum_json(const bosal::DistributionSummary& s) {
  return json{{"max", s.max},     {"mean", s.mean},
              {"min", s.min},     {"outliers", s.outliers},
              {"q1", s.q1},       {"q3", s.q3}};
}

struct ManifestRow {
  fs::path image;
  bosal::BoundingBox box;
  std::string target;
};

// CSV manifest: image path, x0, y0, w, h, target class. A first line whose
// second field is not an integer is treated as a header. Relative image
// paths resolve against the manifest's directory.
std::vector<ManifestRow> load_manifest(const fs::path& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::invalid_argument("cannot read manifest " + path.string());
  }
  std::vector<ManifestRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream stream(line);
    std::string item;
    while (std::getline(stream, item, ',')) {
      fields.push_back(item);
    }
    if (first) {
      first = false;
      try {
        (void)std::stoi(fields.at(1));
      } catch (...) {
        continue;  // header line
      }
    }
    if (fields.size() != 6) {
      throw std::invalid_argument("manifest row needs 6 fields: " + line);
    }
    ManifestRow row;
    row.image = fs::path(fields[0]);
    if (row.image.is_relative()) {
      row.image = path.parent_path() / row.image;
    }
    row.box = {std::stoi(fields[1]), std::stoi(fields[2]),
               std::stoi(fields[3]), std::stoi(fields[4])};
    row.target = fields[5];
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::invalid_argument("manifest has no rows");
  }
  return rows;
}

// ---------------------------------------------------------------------------
// bayes

struct BayesOpts {
  std::string image;
  std::string model;
  std::string target;
  std::string out;
  std::string config;
  std::string sizes_text;
  std::string reduction = "mean";
  std::string formula = "standard";
  std::string colormap = "gray";
  int iterations = 200;
  int n_init = 5;
  int prediction_stride = 4;
  double fill = 128.0;
  std::uint64_t seed = 0;
  bool force = false;
  const CLI::Option* iterations_opt = nullptr;
  const CLI::Option* n_init_opt = nullptr;
  const CLI::Option* stride_opt = nullptr;
  const CLI::Option* fill_opt = nullptr;
  const CLI::Option* seed_opt = nullptr;
  const CLI::Option* sizes_opt = nullptr;
  const CLI::Option* reduction_opt = nullptr;
  const CLI::Option* formula_opt = nullptr;
};

void run_bayes(const BayesOpts& o) {
  const json cfg = load_config_file(o.config);
  int iterations = o.iterations;
  int n_init = o.n_init;
  int prediction_stride = o.prediction_stride;
  double fill_raw = o.fill;
  std::uint64_t seed = o.seed;
  std::string reduction = o.reduction;
  std::string formula = o.formula;
  merge_config(cfg, "iterations", o.iterations_opt, iterations);
  merge_config(cfg, "n_init", o.n_init_opt, n_init);
  merge_config(cfg, "prediction_stride", o.stride_opt, prediction_stride);
  merge_config(cfg, "fill", o.fill_opt, fill_raw);
  merge_config(cfg, "seed", o.seed_opt, seed);
  merge_config(cfg, "reduction", o.reduction_opt, reduction);
  merge_config(cfg, "formula", o.formula_opt, formula);
  std::vector<int> sizes = {50, 64, 78, 92, 107, 121, 135, 150};
  if (o.sizes_opt->count() > 0) {
    sizes = parse_int_csv(o.sizes_text);
  } else if (cfg.contains("sizes")) {
    sizes = cfg.at("sizes").get<std::vector<int>>();
  }

  bosal::BoConfig bo;
  bo.iterations = iterations;
  bo.n_init = n_init;
  bo.sizes = sizes;
  bo.fill = resolve_fill(fill_raw);
  bo.prediction_stride = prediction_stride;
  bo.reduction = parse_reduction(reduction);
  bo.seed = seed;
  bo.acquisition = parse_formula(formula);
  bo.validate();

  const bosal::Image image = bosal::load_image(o.image);
  const auto timeout = adapter_timeout();
  const bosal::ModelHandle model = bosal::parse_model_spec(
      o.model, image.width(), image.height(), o.target, bo.fill, timeout);

  const fs::path out(o.out);
  const fs::path map_csv = out / "map.csv";
  const fs::path map_png = out / "map.png";
  const fs::path trace_path = out / "trace.jsonl";
  const fs::path run_path = out / "run.json";
  check_overwrite({map_csv, map_png, trace_path, run_path}, o.force);
  fs::create_directories(out);

  const json resolved{{"command", "bayes"},
                      {"fill", bo.fill},
                      {"formula", formula},
                      {"image", o.image},
                      {"iterations", bo.iterations},
                      {"model", o.model},
                      {"n_init", bo.n_init},
                      {"prediction_stride", bo.prediction_stride},
                      {"reduction", reduction},
                      {"seed", bo.seed},
                      {"sizes", bo.sizes},
                      {"target", o.target},
                      {"timeout_secs", timeout.count()}};
  write_text_file(run_path, resolved.dump(2) + "\n");

  bosal::SaliencyMap map(1, 1);
  bosal::BoTrace trace;
  try {
    std::tie(map, trace) = bosal::run(model, image, bo);
  } catch (const bosal::BoRunError& e) {
    bosal::save_trace_jsonl(e.partial_trace, trace_path);
    throw;
  }
  bosal::save_map_csv(map, map_csv);
  bosal::save_heatmap(map, map_png, parse_colormap(o.colormap));
  bosal::save_trace_jsonl(trace, trace_path);

  const json summary{{"base_score", trace.base_score},
                     {"model_queries", trace.model_queries},
                     {"out", o.out},
                     {"records", trace.records.size()}};
  std::cout << summary.dump() << "\n";
}

// ---------------------------------------------------------------------------
// exhaustive

struct ExhaustiveOpts {
  std::string image;
  std::string model;
  std::string target;
  std::string out;
  std::string config;
  std::string sizes_text;
  std::string accumulation = "center";
  std::string colormap = "gray";
  int stride = 1;
  double fill = 128.0;
  bool force = false;
  const CLI::Option* stride_opt = nullptr;
  const CLI::Option* fill_opt = nullptr;
  const CLI::Option* sizes_opt = nullptr;
  const CLI::Option* accumulation_opt = nullptr;
};

void run_exhaustive_cmd(const ExhaustiveOpts& o) {
  const json cfg = load_config_file(o.config);
  int stride = o.stride;
  double fill_raw = o.fill;
  std::string accumulation = o.accumulation;
  merge_config(cfg, "stride", o.stride_opt, stride);
  merge_config(cfg, "fill", o.fill_opt, fill_raw);
  merge_config(cfg, "accumulation", o.accumulation_opt, accumulation);
  std::vector<int> sizes = {50, 64, 78, 92, 107, 121, 135, 150};
  if (o.sizes_opt->count() > 0) {
    sizes = parse_int_csv(o.sizes_text);
  } else if (cfg.contains("sizes")) {
    sizes = cfg.at("sizes").get<std::vector<int>>();
  }

  bosal::SweepConfig sweep;
  sweep.sizes = sizes;
  sweep.stride = stride;
  sweep.fill = resolve_fill(fill_raw);
  sweep.accumulation = parse_accumulation(accumulation);
  sweep.validate();

  const bosal::Image image = bosal::load_image(o.image);
  const auto timeout = adapter_timeout();
  const bosal::ModelHandle model = bosal::parse_model_spec(
      o.model, image.width(), image.height(), o.target, sweep.fill, timeout);

  const fs::path out(o.out);
  const fs::path map_csv = out / "map.csv";
  const fs::path map_png = out / "map.png";
  const fs::path run_path = out / "run.json";
  check_overwrite({map_csv, map_png, run_path}, o.force);
  fs::create_directories(out);

  const json resolved{{"accumulation", accumulation},
                      {"command", "exhaustive"},
                      {"fill", sweep.fill},
                      {"image", o.image},
                      {"model", o.model},
                      {"sizes", sweep.sizes},
                      {"stride", sweep.stride},
                      {"target", o.target},
                      {"timeout_secs", timeout.count()}};
  write_text_file(run_path, resolved.dump(2) + "\n");

  const bosal::SweepResult result = bosal::run_exhaustive(model, image, sweep);
  bosal::save_map_csv(result.map, map_csv);  // raw values; PNG is normalized
  bosal::save_heatmap(result.map, map_png, parse_colormap(o.colormap));

  const json summary{{"occlusion_queries", result.occlusion_queries},
                     {"out", o.out},
                     {"total_queries", result.total_queries}};
  std::cout << summary.dump() << "\n";
}

// ---------------------------------------------------------------------------
// random-baseline

struct RandomOpts {
  std::string image;
  std::string model;
  std::string target;
  std::string out;
  std::string config;
  std::string sizes_text;
  std::string colormap = "gray";
  int budget = 200;
  int prediction_stride = 4;
  double fill = 128.0;
  std::uint64_t seed = 0;
  bool force = false;
  const CLI::Option* budget_opt = nullptr;
  const CLI::Option* stride_opt = nullptr;
  const CLI::Option* fill_opt = nullptr;
  const CLI::Option* seed_opt = nullptr;
  const CLI::Option* sizes_opt = nullptr;
};

void run_random(const RandomOpts& o) {
  const json cfg = load_config_file(o.config);
  int budget = o.budget;
  int prediction_stride = o.prediction_stride;
  double fill_raw = o.fill;
  std::uint64_t seed = o.seed;
  merge_config(cfg, "budget", o.budget_opt, budget);
  merge_config(cfg, "prediction_stride", o.stride_opt, prediction_stride);
  merge_config(cfg, "fill", o.fill_opt, fill_raw);
  merge_config(cfg, "seed", o.seed_opt, seed);
  std::vector<int> sizes = {50, 64, 78, 92, 107, 121, 135, 150};
  if (o.sizes_opt->count() > 0) {
    sizes = parse_int_csv(o.sizes_text);
  } else if (cfg.contains("sizes")) {
    sizes = cfg.at("sizes").get<std::vector<int>>();
  }
  const double fill = resolve_fill(fill_raw);

  const bosal::Image image = bosal::load_image(o.image);
  const auto timeout = adapter_timeout();
  const bosal::ModelHandle model = bosal::parse_model_spec(
      o.model, image.width(), image.height(), o.target, fill, timeout);

  const fs::path out(o.out);
  const fs::path map_csv = out / "map.csv";
  const fs::path map_png = out / "map.png";
  const fs::path run_path = out / "run.json";
  check_overwrite({map_csv, map_png, run_path}, o.force);
  fs::create_directories(out);

  const json resolved{{"budget", budget},
                      {"command", "random-baseline"},
                      {"fill", fill},
                      {"image", o.image},
                      {"model", o.model},
                      {"prediction_stride", prediction_stride},
                      {"seed", seed},
                      {"sizes", sizes},
                      {"target", o.target},
                      {"timeout_secs", timeout.count()}};
  write_text_file(run_path, resolved.dump(2) + "\n");

  const bosal::SaliencyMap map = bosal::random_baseline(
      model, image, budget, sizes, seed, fill, prediction_stride);
  bosal::save_map_csv(map, map_csv);
  bosal::save_heatmap(map, map_png, parse_colormap(o.colormap));

  const json summary{{"model_queries", model.query_count()},
                     {"out", o.out}};
  std::cout << summary.dump() << "\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string manifest;
  std::string out;
  std::string maps_dir;
  std::string model;
  std::string method = "bayes";
  std::string config;
  std::string sizes_text;
  std::string reduction = "mean";
  std::string formula = "standard";
  int iterations = 200;
  int n_init = 5;
  int budget = 200;
  int stride = 1;
  int prediction_stride = 4;
  double fill = 128.0;
  std::uint64_t seed = 0;
  bool force = false;
  const CLI::Option* sizes_opt = nullptr;
};

bosal::SaliencyMap eval_row_map(const EvalOpts& o, const ManifestRow& row,
                                const bosal::Image& image,
                                const std::vector<int>& sizes, double fill,
                                std::chrono::seconds timeout) {
  bosal::ModelHandle model = [&] {
    if (o.model == "synthetic:manifest-box") {
      return bosal::make_synthetic_box(image.width(), image.height(), row.box,
                                       fill, row.target);
    }
    return bosal::parse_model_spec(o.model, image.width(), image.height(),
                                   row.target, fill, timeout);
  }();
  if (o.method == "bayes") {
    bosal::BoConfig bo;
    bo.iterations = o.iterations;
    bo.n_init = o.n_init;
    bo.sizes = sizes;
    bo.fill = fill;
    bo.prediction_stride = o.prediction_stride;
    bo.reduction = parse_reduction(o.reduction);
    bo.seed = o.seed;
    bo.acquisition = parse_formula(o.formula);
    return bosal::run(model, image, bo).first;
  }
  if (o.method == "exhaustive") {
    bosal::SweepConfig sweep;
    sweep.sizes = sizes;
    sweep.stride = o.stride;
    sweep.fill = fill;
    return bosal::run_exhaustive(model, image, sweep).map;
  }
  if (o.method == "random") {
    return bosal::random_baseline(model, image, o.budget, sizes, o.seed, fill,
                                  o.prediction_stride);
  }
  throw std::invalid_argument("method must be bayes, exhaustive or random");
}

void run_eval(const EvalOpts& o) {
  if (o.maps_dir.empty() && o.model.empty()) {
    throw std::invalid_argument("eval needs --maps-dir or --model");
  }
  std::vector<int> sizes = {50, 64, 78, 92, 107, 121, 135, 150};
  if (o.sizes_opt->count() > 0) {
    sizes = parse_int_csv(o.sizes_text);
  }
  const double fill = resolve_fill(o.fill);
  const auto timeout = adapter_timeout();
  const std::vector<ManifestRow> rows = load_manifest(o.manifest);

  const fs::path out(o.out);
  const fs::path csv_path = out / "eval.csv";
  const fs::path json_path = out / "eval.json";
  check_overwrite({csv_path, json_path}, o.force);
  fs::create_directories(out);

  std::string csv =
      "image,x0,y0,w,h,target,r_sal,inside_mass,total_mass,degenerate\n";
  std::vector<double> ratios;
  int degenerate = 0;
  for (const auto& row : rows) {
    bosal::SaliencyMap map(1, 1);
    if (!o.maps_dir.empty()) {
      const fs::path map_path =
          fs::path(o.maps_dir) / (row.image.stem().string() + ".csv");
      map = bosal::load_map_csv(map_path);
    } else {
      const bosal::Image image = bosal::load_image(row.image);
      map = eval_row_map(o, row, image, sizes, fill, timeout);
    }
    // r_sal presumes a non-negative mass map; raw sweeps can be signed.
    const bosal::RatioResult r =
        bosal::saliency_ratio(bosal::normalize_map(map), row.box);
    ratios.push_back(r.r_sal);
    degenerate += r.degenerate ? 1 : 0;
    csv += row.image.filename().string() + "," + std::to_string(row.box.x0) +
           "," + std::to_string(row.box.y0) + "," + std::to_string(row.box.w) +
           "," + std::to_string(row.box.h) + "," + row.target + "," +
           format_double(r.r_sal) + "," + format_double(r.inside_mass) + "," +
           format_double(r.total_mass) + "," +
           (r.degenerate ? "1" : "0") + "\n";
  }
  write_text_file(csv_path, csv);

  const bosal::DistributionSummary summary = bosal::summarize(ratios);
  const json report{{"count", rows.size()},
                    {"degenerate", degenerate},
                    {"r_sal", fivenum_json(summary)}};
  write_text_file(json_path, report.dump(2) + "\n");
  std::cout << report.dump() << "\n";
}

// ---------------------------------------------------------------------------
// render

struct RenderOpts {
  std::string map;
  std::string out;
  std::string colormap = "gray";
  bool force = false;
};

void run_render(const RenderOpts& o) {
  const bosal::SaliencyMap map = bosal::load_map_csv(o.map);
  check_overwrite({fs::path(o.out)}, o.force);
  if (fs::path(o.out).has_parent_path()) {
    fs::create_directories(fs::path(o.out).parent_path());
  }
  bosal::save_heatmap(map, o.out, parse_colormap(o.colormap));
  const json summary{{"height", map.height()},
                     {"out", o.out},
                     {"width", map.width()}};
  std::cout << summary.dump() << "\n";
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
  std::string out;
  std::string sizes_text = "16,32,48";
  std::string formula = "standard";
  std::string reduction = "mean";
  int seeds = 20;
  int budget = 200;
  int n_init = 5;
  int image_size = 128;
  int box_size = 40;
  int prediction_stride = 4;
  double fill = 128.0;
  std::uint64_t seed = 0;
  bool force = false;
};

std::string fivenum_row(const char* name,
                        const bosal::DistributionSummary& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%-11s %8.4f %8.4f %8.4f %8.4f %8.4f %9zu\n", name, s.min,
                s.q1, s.mean, s.q3, s.max, s.outliers.size());
  return buf;
}

void run_bench(const BenchOpts& o) {
  if (o.seeds < 1) {
    throw std::invalid_argument("--seeds must be positive");
  }
  if (o.box_size < 1 || o.box_size > o.image_size) {
    throw std::invalid_argument("--box-size must fit inside --image-size");
  }
  const std::vector<int> sizes = parse_int_csv(o.sizes_text);
  const double fill = resolve_fill(o.fill);
  if (o.budget <= o.n_init) {
    throw std::invalid_argument("--budget must exceed --init");
  }
  const int width = o.image_size;
  const int exh_stride =
      bosal::stride_for_budget(width, width, sizes.size(),
                               static_cast<std::uint64_t>(o.budget));

  const fs::path out(o.out);
  const fs::path summary_csv_path = out / "summary.csv";
  const fs::path summary_json_path = out / "summary.json";
  const fs::path run_path = out / "run.json";
  std::vector<fs::path> outputs = {summary_csv_path, summary_json_path,
                                   run_path};
  for (int k = 0; k < o.seeds; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "seed_%03d", k);
    outputs.push_back(out / name);
  }
  check_overwrite(outputs, o.force);
  fs::create_directories(out);

  const json resolved{{"box_size", o.box_size},
                      {"budget", o.budget},
                      {"command", "bench"},
                      {"fill", fill},
                      {"formula", o.formula},
                      {"image_size", o.image_size},
                      {"n_init", o.n_init},
                      {"prediction_stride", o.prediction_stride},
                      {"reduction", o.reduction},
                      {"seed", o.seed},
                      {"seeds", o.seeds},
                      {"sizes", sizes}};
  write_text_file(run_path, resolved.dump(2) + "\n");

  std::string csv =
      "seed,r_sal_bo,r_sal_random,r_sal_exhaustive,bo_argmax_in_box,"
      "bo_queries,random_queries,exhaustive_queries\n";
  std::vector<double> r_bo, r_rand, r_exh;
  int wins = 0;
  int argmax_hits = 0;
  std::uint64_t exh_occlusion = 0;

  for (int k = 0; k < o.seeds; ++k) {
    const std::uint64_t sk = o.seed + static_cast<std::uint64_t>(k);
    // Instance stream decorrelated from the per-method sampling streams.
    std::mt19937_64 inst_rng(0x9E3779B97F4A7C15ULL ^
                             (sk * 0xBF58476D1CE4E5B9ULL));
    std::uniform_int_distribution<int> place(0, width - o.box_size);
    const bosal::BoundingBox box{place(inst_rng), place(inst_rng),
                                 o.box_size, o.box_size};
    const std::uint64_t image_seed = inst_rng();
    const bosal::Image image =
        bosal::uniform_random_image(width, width, 1, image_seed, fill);

    char name[32];
    std::snprintf(name, sizeof(name), "seed_%03d", k);
    const fs::path seed_dir = out / name;
    fs::create_directories(seed_dir);

    // Sample-efficient saliency.
    const bosal::ModelHandle model_bo =
        bosal::make_synthetic_box(width, width, box, fill);
    bosal::BoConfig bo;
    bo.iterations = o.budget - o.n_init;
    bo.n_init = o.n_init;
    bo.sizes = sizes;
    bo.fill = fill;
    bo.prediction_stride = o.prediction_stride;
    bo.reduction = parse_reduction(o.reduction);
    bo.seed = sk;
    bo.acquisition = parse_formula(o.formula);
    const auto [map_bo, trace] = bosal::run(model_bo, image, bo);

    // Uniform-sampling control at the same budget.
    const bosal::ModelHandle model_rand =
        bosal::make_synthetic_box(width, width, box, fill);
    const bosal::SaliencyMap map_rand =
        bosal::random_baseline(model_rand, image, o.budget, sizes, sk, fill,
                               o.prediction_stride);

    // Sliding-window sweep at the nearest matching budget.
    const bosal::ModelHandle model_exh =
        bosal::make_synthetic_box(width, width, box, fill);
    bosal::SweepConfig sweep;
    sweep.sizes = sizes;
    sweep.stride = exh_stride;
    sweep.fill = fill;
    const bosal::SweepResult exh = bosal::run_exhaustive(model_exh, image,
                                                         sweep);
    exh_occlusion = exh.occlusion_queries;
    const bosal::SaliencyMap map_exh = bosal::normalize_map(exh.map);

    const double rb = bosal::saliency_ratio(map_bo, box).r_sal;
    const double rr = bosal::saliency_ratio(map_rand, box).r_sal;
    const double re = bosal::saliency_ratio(map_exh, box).r_sal;
    r_bo.push_back(rb);
    r_rand.push_back(rr);
    r_exh.push_back(re);
    wins += rb > rr ? 1 : 0;
    const auto [ax, ay] = bosal::argmax_pixel(map_bo);
    const bool hit = box.contains(ax, ay);
    argmax_hits += hit ? 1 : 0;

    bosal::save_image(image, seed_dir / "image.png");
    bosal::save_map_csv(map_bo, seed_dir / "bo_map.csv");
    bosal::save_heatmap(map_bo, seed_dir / "bo_map.png");
    bosal::save_trace_jsonl(trace, seed_dir / "bo_trace.jsonl");
    bosal::save_map_csv(map_rand, seed_dir / "random_map.csv");
    bosal::save_heatmap(map_rand, seed_dir / "random_map.png");
    bosal::save_map_csv(exh.map, seed_dir / "exhaustive_map.csv");
    bosal::save_heatmap(exh.map, seed_dir / "exhaustive_map.png");
    const json instance{{"box", {{"h", box.h}, {"w", box.w},
                                 {"x0", box.x0}, {"y0", box.y0}}},
                        {"bo_argmax_in_box", hit},
                        {"image_seed", image_seed},
                        {"r_sal_bo", rb},
                        {"r_sal_exhaustive", re},
                        {"r_sal_random", rr},
                        {"seed", sk}};
    write_text_file(seed_dir / "instance.json", instance.dump(2) + "\n");

    csv += std::to_string(k) + "," + format_double(rb) + "," +
           format_double(rr) + "," + format_double(re) + "," +
           (hit ? "1" : "0") + "," + std::to_string(trace.model_queries) +
           "," + std::to_string(model_rand.query_count()) + "," +
           std::to_string(exh.total_queries) + "\n";
  }
  write_text_file(summary_csv_path, csv);

  const bosal::DistributionSummary s_bo = bosal::summarize(r_bo);
  const bosal::DistributionSummary s_rand = bosal::summarize(r_rand);
  const bosal::DistributionSummary s_exh = bosal::summarize(r_exh);
  const json report{{"argmax_in_box", argmax_hits},
                    {"bo", fivenum_json(s_bo)},
                    {"bo_wins_vs_random", wins},
                    {"box_size", o.box_size},
                    {"budget", o.budget},
                    {"exhaustive", fivenum_json(s_exh)},
                    {"exhaustive_occlusion_queries", exh_occlusion},
                    {"exhaustive_stride", exh_stride},
                    {"image_size", o.image_size},
                    {"prediction_stride", o.prediction_stride},
                    {"random", fivenum_json(s_rand)},
                    {"seed", o.seed},
                    {"seeds", o.seeds},
                    {"sizes", sizes}};
  write_text_file(summary_json_path, report.dump(2) + "\n");

  std::string table;
  table += "r_sal           min       q1     mean       q3      max  outliers\n";
  table += fivenum_row("bayes", s_bo);
  table += fivenum_row("random", s_rand);
  table += fivenum_row("exhaustive", s_exh);
  char tail[160];
  std::snprintf(tail, sizeof(tail),
                "bayes wins vs random: %d/%d; argmax in box: %d/%d; "
                "exhaustive stride %d (%llu occlusion queries)\n",
                wins, o.seeds, argmax_hits, o.seeds, exh_stride,
                static_cast<unsigned long long>(exh_occlusion));
  table += tail;
  std::cout << table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occlusion saliency maps for black-box scorers"};
  app.require_subcommand(1);
  std::function<void()> selected;

  BayesOpts bayes;
  CLI::App* cb = app.add_subcommand(
      "bayes", "sample-efficient saliency via a GP surrogate");
  cb->add_option("--image", bayes.image, "input raster (PNG/PPM/PGM)")
      ->required();
  cb->add_option("--model", bayes.model,
                 "model spec: synthetic:<spec> | cmd:<argv> | url:<url>")
      ->required();
  cb->add_option("--target", bayes.target, "target class label");
  bayes.iterations_opt =
      cb->add_option("--iterations", bayes.iterations, "acquisition steps");
  bayes.n_init_opt =
      cb->add_option("--init", bayes.n_init, "random initial samples");
  bayes.sizes_opt =
      cb->add_option("--sizes", bayes.sizes_text, "window sizes, comma list");
  bayes.fill_opt = cb->add_option(
      "--fill", bayes.fill, "blanking value ([0,1] or byte scale)");
  bayes.stride_opt = cb->add_option("--prediction-stride",
                                    bayes.prediction_stride,
                                    "candidate/render grid stride");
  bayes.reduction_opt =
      cb->add_option("--reduction", bayes.reduction, "mean | max");
  bayes.seed_opt = cb->add_option("--seed", bayes.seed, "RNG seed");
  bayes.formula_opt =
      cb->add_option("--formula", bayes.formula, "standard | paper");
  cb->add_option("--colormap", bayes.colormap, "gray | viridis");
  cb->add_option("--out", bayes.out, "output directory")->required();
  cb->add_option("--config", bayes.config, "flat JSON config file");
  cb->add_flag("--force", bayes.force, "overwrite existing outputs");
  cb->callback([&] { selected = [&] { run_bayes(bayes); }; });

  ExhaustiveOpts exh;
  CLI::App* ce = app.add_subcommand("exhaustive",
                                    "sliding-window occlusion baseline");
  ce->add_option("--image", exh.image, "input raster (PNG/PPM/PGM)")
      ->required();
  ce->add_option("--model", exh.model,
                 "model spec: synthetic:<spec> | cmd:<argv> | url:<url>")
      ->required();
  ce->add_option("--target", exh.target, "target class label");
  exh.sizes_opt =
      ce->add_option("--sizes", exh.sizes_text, "window sizes, comma list");
  exh.stride_opt = ce->add_option("--stride", exh.stride, "grid stride");
  exh.fill_opt = ce->add_option("--fill", exh.fill,
                                "blanking value ([0,1] or byte scale)");
  exh.accumulation_opt = ce->add_option("--accumulation", exh.accumulation,
                                        "center | spread");
  ce->add_option("--colormap", exh.colormap, "gray | viridis");
  ce->add_option("--out", exh.out, "output directory")->required();
  ce->add_option("--config", exh.config, "flat JSON config file");
  ce->add_flag("--force", exh.force, "overwrite existing outputs");
  ce->callback([&] { selected = [&] { run_exhaustive_cmd(exh); }; });

  RandomOpts rnd;
  CLI::App* cr = app.add_subcommand("random-baseline",
                                    "uniform-sampling control");
  cr->add_option("--image", rnd.image, "input raster (PNG/PPM/PGM)")
      ->required();
  cr->add_option("--model", rnd.model,
                 "model spec: synthetic:<spec> | cmd:<argv> | url:<url>")
      ->required();
  cr->add_option("--target", rnd.target, "target class label");
  rnd.budget_opt = cr->add_option("--budget", rnd.budget, "occlusion queries");
  rnd.sizes_opt =
      cr->add_option("--sizes", rnd.sizes_text, "window sizes, comma list");
  rnd.fill_opt = cr->add_option("--fill", rnd.fill,
                                "blanking value ([0,1] or byte scale)");
  rnd.stride_opt = cr->add_option("--prediction-stride",
                                  rnd.prediction_stride,
                                  "candidate/render grid stride");
  rnd.seed_opt = cr->add_option("--seed", rnd.seed, "RNG seed");
  cr->add_option("--colormap", rnd.colormap, "gray | viridis");
  cr->add_option("--out", rnd.out, "output directory")->required();
  cr->add_option("--config", rnd.config, "flat JSON config file");
  cr->add_flag("--force", rnd.force, "overwrite existing outputs");
  cr->callback([&] { selected = [&] { run_random(rnd); }; });

  EvalOpts ev;
  CLI::App* cv = app.add_subcommand("eval", "r_sal over a CSV manifest");
  cv->add_option("--manifest", ev.manifest,
                 "CSV: image,x0,y0,w,h,target per row")
      ->required();
  cv->add_option("--maps-dir", ev.maps_dir,
                 "directory of precomputed <image-stem>.csv maps");
  cv->add_option("--model", ev.model,
                 "model spec (synthetic:manifest-box binds each row's box)");
  cv->add_option("--method", ev.method, "bayes | exhaustive | random");
  cv->add_option("--iterations", ev.iterations, "bayes acquisition steps");
  cv->add_option("--init", ev.n_init, "bayes random initial samples");
  cv->add_option("--budget", ev.budget, "random-baseline budget");
  cv->add_option("--stride", ev.stride, "exhaustive grid stride");
  ev.sizes_opt =
      cv->add_option("--sizes", ev.sizes_text, "window sizes, comma list");
  cv->add_option("--fill", ev.fill, "blanking value ([0,1] or byte scale)");
  cv->add_option("--prediction-stride", ev.prediction_stride,
                 "candidate/render grid stride");
  cv->add_option("--reduction", ev.reduction, "mean | max");
  cv->add_option("--seed", ev.seed, "RNG seed");
  cv->add_option("--formula", ev.formula, "standard | paper");
  cv->add_option("--out", ev.out, "output directory")->required();
  cv->add_flag("--force", ev.force, "overwrite existing outputs");
  cv->callback([&] { selected = [&] { run_eval(ev); }; });

  RenderOpts rd;
  CLI::App* cd = app.add_subcommand("render", "CSV map to raster heatmap");
  cd->add_option("--map", rd.map, "saliency map CSV")->required();
  cd->add_option("--out", rd.out, "output raster path")->required();
  cd->add_option("--colormap", rd.colormap, "gray | viridis");
  cd->add_flag("--force", rd.force, "overwrite existing outputs");
  cd->callback([&] { selected = [&] { run_render(rd); }; });

  BenchOpts bn;
  CLI::App* cn = app.add_subcommand("bench", "built-in synthetic suite");
  cn->add_option("--seeds", bn.seeds, "number of synthetic instances");
  cn->add_option("--seed", bn.seed, "base RNG seed");
  cn->add_option("--budget", bn.budget, "occlusion queries per method");
  cn->add_option("--init", bn.n_init, "random initial samples");
  cn->add_option("--image-size", bn.image_size, "square image edge");
  cn->add_option("--box-size", bn.box_size, "planted box edge");
  cn->add_option("--sizes", bn.sizes_text, "window sizes, comma list");
  cn->add_option("--fill", bn.fill, "blanking value ([0,1] or byte scale)");
  cn->add_option("--prediction-stride", bn.prediction_stride,
                 "candidate/render grid stride");
  cn->add_option("--formula", bn.formula, "standard | paper");
  cn->add_option("--reduction", bn.reduction, "mean | max");
  cn->add_option("--out", bn.out, "output directory")->required();
  cn->add_flag("--force", bn.force, "overwrite existing outputs");
  cn->callback([&] { selected = [&] { run_bench(bn); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help and friends
    }
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }

  try {
    selected();
    return 0;
  } catch (const bosal::QueryError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "model"}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
    return 1;
  }
}
