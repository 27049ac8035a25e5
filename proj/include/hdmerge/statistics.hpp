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

#ifndef HDMERGE__STATISTICS_HPP_
#define HDMERGE__STATISTICS_HPP_

#include "hdmerge/execution.hpp"
#include "hdmerge/indicators.hpp"
#include "hdmerge/neighbor_scenario.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hdmerge
{

/// Quantile of sorted data by linear interpolation between closest ranks:
/// h = (n - 1) p, q = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
double quantile_linear(std::span<const double> sorted, double p);

struct SampleSummary
{
  std::size_t n{0};
  double mean{0.0};
  double min{0.0};
  double q1{0.0};
  double median{0.0};
  double q3{0.0};
  double max{0.0};
  double iqr{0.0};
  double fence_multiplier{3.0};
  double lower_fence{0.0};
  double upper_fence{0.0};
  double whisker_low{0.0};   ///< smallest non-outlier value
  double whisker_high{0.0};  ///< largest non-outlier value
  double filtered_mean{0.0};  ///< mean of non-outlier values
  std::vector<double> outlier_values;  ///< ascending
};

/// Quartiles, Tukey fences [q1 - M iqr, q3 + M iqr] and the outliers beyond them.
SampleSummary summarize(std::span<const double> samples, double fence_multiplier = 3.0);

struct KdeSettings
{
  std::size_t grid_points{512};
  double grid_padding{3.0};    ///< bandwidths beyond the pooled sample range
  std::size_t min_samples{5};
  double density_floor{1e-12};
};

/// h = 1.06 sigma n^(-1/5) with sigma = min(std, iqr / 1.349), floored at
/// 1e-6 max(range, |center|, 1).
double silverman_bandwidth(std::span<const double> samples);

struct DensityEstimate
{
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth{0.0};
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

/// Gaussian KDE evaluated on `grid` and rescaled so its trapezoidal integral is 1.
DensityEstimate kde_on_grid(
  std::span<const double> samples, double bandwidth, std::span<const double> grid,
  Execution execution = Execution::parallel);

/// Gaussian KDE on its own range +- padding bandwidths. Empty below the minimum sample count.
std::optional<DensityEstimate> kde(
  std::span<const double> samples, const KdeSettings & settings = {},
  Execution execution = Execution::parallel);

double trapezoid(std::span<const double> grid, std::span<const double> values);

/// Base-2 Jensen-Shannon divergence of two densities sampled on the same grid.
double js_from_densities(
  std::span<const double> grid, std::span<const double> f, std::span<const double> g,
  double floor = 1e-12);

/// KDE both sides on the pooled grid and integrate the base-2 Jensen-Shannon divergence. Empty when either side is short.
std::optional<double> js_divergence(
  std::span<const double> f_samples, std::span<const double> g_samples,
  const KdeSettings & settings = {}, Execution execution = Execution::parallel);

struct DivergenceMatrix
{
  std::string location;  ///< location id or "all"
  std::string vehicle_class;
  double threshold{0.0};
  std::string indicator;
  std::array<std::size_t, 8> n{};
  std::array<std::array<std::optional<double>, 8>, 8> js;  ///< empty = masked
};

struct DivergenceOptions
{
  std::vector<std::string> classes{"car"};
  KdeSettings kde;
};

/// One matrix per (location incl. "all", class, threshold, indicator) over all eight labels.
std::vector<DivergenceMatrix> divergence_matrices(
  std::span<const IndicatorRow> rows, const DivergenceOptions & options = {},
  Execution execution = Execution::parallel);

struct SummaryRow
{
  std::string location;
  std::string vehicle_class;
  double threshold{0.0};
  std::string scenario;  ///< label or "all"
  std::string indicator;
  SampleSummary summary;
};

/// SampleSummary for every (location, class, threshold, scenario, indicator) group, with "all"
/// rollups for location, class and scenario. Groups without finite samples are omitted.
std::vector<SummaryRow> summary_table(
  std::span<const IndicatorRow> rows, double fence_multiplier = 3.0);

std::string serialize_summary(std::span<const SummaryRow> rows);
std::string serialize_divergence(std::span<const DivergenceMatrix> matrices);

}  // namespace hdmerge

#endif  // HDMERGE__STATISTICS_HPP_
