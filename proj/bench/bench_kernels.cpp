// Copyright 2026 The hdmerge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference versus OpenMP kernels.

#include "hdmerge/pipeline.hpp"
#include "hdmerge/statistics.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace
{

using hdmerge::Execution;

std::vector<double> samples(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(20.0, 4.0);
  std::vector<double> x(n);
  for (auto & v : x) {
    v = d(rng);
  }
  return x;
}

std::vector<hdmerge::IndicatorRow> indicator_rows(std::size_t n)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<hdmerge::IndicatorRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto & r = rows[i];
    r.scenario.location_id = 2 + static_cast<int>(i % 3);
    r.scenario.threshold = 100.0 + 50.0 * static_cast<double>(i % 3);
    r.scenario.result.label = hdmerge::kScenarioLabels[(i / 3) % 8];
    r.indicators.merging_speed = 15.0 + 10.0 * u(rng);
    r.indicators.merging_distance = 150.0 * u(rng);
    r.indicators.duration = 1.0 + 4.0 * u(rng);
    r.indicators.min_ttc_lead = 2.0 + 20.0 * u(rng);
    r.indicators.min_ttc_rear = 2.0 + 20.0 * u(rng);
  }
  return rows;
}

template <Execution E>
void BM_KdeOnGrid(benchmark::State & state)
{
  const auto x = samples(static_cast<std::size_t>(state.range(0)), 1);
  const auto grid = hdmerge::uniform_grid(0.0, 40.0, 512);
  const double h = hdmerge::silverman_bandwidth(x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hdmerge::kde_on_grid(x, h, grid, E));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 512);
}
BENCHMARK_TEMPLATE(BM_KdeOnGrid, Execution::serial)->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK_TEMPLATE(BM_KdeOnGrid, Execution::parallel)->Arg(1000)->Arg(10000)->UseRealTime();

template <Execution E>
void BM_DivergenceMatrices(benchmark::State & state)
{
  const auto rows = indicator_rows(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hdmerge::divergence_matrices(rows, {}, E));
  }
}
BENCHMARK_TEMPLATE(BM_DivergenceMatrices, Execution::serial)->Arg(2400)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_DivergenceMatrices, Execution::parallel)->Arg(2400)->Unit(benchmark::kMillisecond)->UseRealTime();

template <Execution E>
void BM_SyntheticPipeline(benchmark::State & state)
{
  hdmerge::RunConfig config;
  config.synthetic_events = static_cast<int>(state.range(0));
  config.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hdmerge::run_pipeline(config, hdmerge::kStageAll, E));
  }
}
BENCHMARK_TEMPLATE(BM_SyntheticPipeline, Execution::serial)->Arg(100)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_SyntheticPipeline, Execution::parallel)->Arg(100)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
