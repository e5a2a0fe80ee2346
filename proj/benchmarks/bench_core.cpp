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

#include <benchmark/benchmark.h>

#include <random>

#include "bosal/acquisition.hpp"
#include "bosal/exhaustive.hpp"
#include "bosal/gp.hpp"
#include "bosal/image.hpp"
#include "bosal/model.hpp"

namespace {

bosal::TrainingSet random_training(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 224.0);
  std::uniform_real_distribution<double> resp(-1.0, 1.0);
  bosal::TrainingSet data;
  for (std::size_t i = 0; i < n; ++i) {
    data.add(Eigen::Vector3d(coord(rng), coord(rng), coord(rng)), resp(rng));
  }
  return data;
}

void BM_MaternKernel(benchmark::State& state) {
  const bosal::GpHyperparams hp;
  double r = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bosal::matern_kernel(r, hp));
    r += 0.001;
  }
}
BENCHMARK(BM_MaternKernel);

void BM_GpFit(benchmark::State& state) {
  const bosal::GpHyperparams hp;
  const bosal::TrainingSet data =
      random_training(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bosal::fit(data, hp));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GpFit)->RangeMultiplier(2)->Range(25, 200)->Complexity();

void BM_GpPredict(benchmark::State& state) {
  const bosal::GpHyperparams hp;
  const bosal::GpModel model = bosal::fit(random_training(200, 2), hp);
  const bosal::CandidateGrid grid(224, 224, {50, 64, 78, 92, 107, 121, 135,
                                             150}, 4);
  const Eigen::MatrixXd queries = grid.coords();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bosal::predict(model, queries));
  }
  state.SetItemsProcessed(state.iterations() * queries.rows());
}
BENCHMARK(BM_GpPredict);

void BM_ExpectedImprovement(benchmark::State& state) {
  double mean = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bosal::expected_improvement(mean, 0.5, 0.2));
    mean += 1e-6;
  }
}
BENCHMARK(BM_ExpectedImprovement);

void BM_BlankWindow(benchmark::State& state) {
  const bosal::Image image = bosal::uniform_random_image(224, 224, 3, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bosal::blank_window(image, 112, 112, 64));
  }
}
BENCHMARK(BM_BlankWindow);

void BM_ExhaustiveSweep(benchmark::State& state) {
  const bosal::Image image = bosal::uniform_random_image(64, 64, 1, 4);
  const bosal::ModelHandle model =
      bosal::make_synthetic_box(64, 64, {24, 24, 16, 16});
  bosal::SweepConfig config;
  config.sizes = {16, 32};
  config.stride = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(bosal::run_exhaustive(model, image, config));
  }
}
BENCHMARK(BM_ExhaustiveSweep)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
