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

#include "hdmerge/statistics.hpp"

#include "hdmerge/csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

namespace hdmerge
{

double quantile_linear(std::span<const double> sorted, double p)
{
  if (sorted.empty()) {
    throw DomainError("quantile of an empty sample");
  }
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) {
    return sorted.back();
  }
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

SampleSummary summarize(std::span<const double> samples, double fence_multiplier)
{
  if (samples.empty()) {
    throw DomainError("cannot summarize an empty sample");
  }
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  SampleSummary s;
  s.n = x.size();
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  s.min = x.front();
  s.max = x.back();
  s.q1 = quantile_linear(x, 0.25);
  s.median = quantile_linear(x, 0.5);
  s.q3 = quantile_linear(x, 0.75);
  s.iqr = s.q3 - s.q1;
  s.fence_multiplier = fence_multiplier;
  s.lower_fence = s.q1 - fence_multiplier * s.iqr;
  s.upper_fence = s.q3 + fence_multiplier * s.iqr;
  double inlier_sum = 0.0;
  std::size_t inliers = 0;
  s.whisker_low = s.max;
  s.whisker_high = s.min;
  for (const double v : x) {
    if (v < s.lower_fence || v > s.upper_fence) {
      s.outlier_values.push_back(v);
    } else {
      inlier_sum += v;
      ++inliers;
      s.whisker_low = std::min(s.whisker_low, v);
      s.whisker_high = std::max(s.whisker_high, v);
    }
  }
  s.filtered_mean = inliers > 0 ? inlier_sum / static_cast<double>(inliers) : s.mean;
  return s;
}

double silverman_bandwidth(std::span<const double> samples)
{
  if (samples.empty()) {
    throw DomainError("bandwidth of an empty sample");
  }
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : x) {
    ss += (v - mean) * (v - mean);
  }
  const double sd = x.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double iqr = quantile_linear(x, 0.75) - quantile_linear(x, 0.25);
  const double sigma = iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;
  const double range = x.back() - x.front();
  const double floor = 1e-6 * std::max({range, std::abs(mean), 1.0});
  return std::max(1.06 * sigma * std::pow(n, -0.2), floor);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count)
{
  if (count < 2 || !(hi > lo)) {
    throw DomainError("grid needs two or more points over a non-empty interval");
  }
  std::vector<double> g(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = lo + step * static_cast<double>(i);
  }
  g.back() = hi;
  return g;
}

double trapezoid(std::span<const double> grid, std::span<const double> values)
{
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    total += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
  }
  return total;
}

DensityEstimate kde_on_grid(
  std::span<const double> samples, double bandwidth, std::span<const double> grid,
  Execution execution)
{
  if (samples.empty() || !(bandwidth > 0.0)) {
    throw DomainError("kde needs samples and a positive bandwidth");
  }
  DensityEstimate d;
  d.grid.assign(grid.begin(), grid.end());
  d.values.assign(grid.size(), 0.0);
  d.bandwidth = bandwidth;
  const double inv_h = 1.0 / bandwidth;
  const double norm =
    1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  const auto m = static_cast<std::ptrdiff_t>(grid.size());
  auto eval = [&](std::ptrdiff_t i) {
    const double x = grid[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (const double xi : samples) {
      const double z = (x - xi) * inv_h;
      acc += std::exp(-0.5 * z * z);
    }
    d.values[static_cast<std::size_t>(i)] = acc * norm;
  };
  if (execution == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      eval(i);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      eval(i);
    }
  }
  const double mass = trapezoid(d.grid, d.values);
  if (mass > 0.0) {
    for (auto & v : d.values) {
      v /= mass;
    }
  }
  return d;
}

std::optional<DensityEstimate> kde(
  std::span<const double> samples, const KdeSettings & settings, Execution execution)
{
  if (samples.size() < settings.min_samples) {
    return std::nullopt;
  }
  const double h = silverman_bandwidth(samples);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const auto grid =
    uniform_grid(*lo - settings.grid_padding * h, *hi + settings.grid_padding * h, settings.grid_points);
  return kde_on_grid(samples, h, grid, execution);
}

double js_from_densities(
  std::span<const double> grid, std::span<const double> f, std::span<const double> g, double floor)
{
  std::vector<double> integrand(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double fi = std::max(f[i], floor);
    const double gi = std::max(g[i], floor);
    const double m = 0.5 * (fi + gi);
    integrand[i] = 0.5 * f[i] * std::log2(fi / m) + 0.5 * g[i] * std::log2(gi / m);
  }
  return std::clamp(trapezoid(grid, integrand), 0.0, 1.0);
}

std::optional<double> js_divergence(
  std::span<const double> f_samples, std::span<const double> g_samples,
  const KdeSettings & settings, Execution execution)
{
  if (f_samples.size() < settings.min_samples || g_samples.size() < settings.min_samples) {
    return std::nullopt;
  }
  const double hf = silverman_bandwidth(f_samples);
  const double hg = silverman_bandwidth(g_samples);
  const double h = std::max(hf, hg);
  const auto [flo, fhi] = std::minmax_element(f_samples.begin(), f_samples.end());
  const auto [glo, ghi] = std::minmax_element(g_samples.begin(), g_samples.end());
  const double lo = std::min(*flo, *glo) - settings.grid_padding * h;
  const double hi = std::max(*fhi, *ghi) + settings.grid_padding * h;
  const auto grid = uniform_grid(lo, hi, settings.grid_points);
  const auto f = kde_on_grid(f_samples, hf, grid, execution);
  const auto g = kde_on_grid(g_samples, hg, grid, execution);
  return js_from_densities(grid, f.values, g.values, settings.density_floor);
}

namespace
{

using GroupKey = std::tuple<std::string, std::string, double, std::string>;

// Location order: numeric ids ascending, then "all".
bool location_less(const std::string & a, const std::string & b)
{
  if ((a == "all") != (b == "all")) {
    return b == "all";
  }
  return a.size() != b.size() ? a.size() < b.size() : a < b;
}

}  // namespace

std::vector<DivergenceMatrix> divergence_matrices(
  std::span<const IndicatorRow> rows, const DivergenceOptions & options, Execution execution)
{
  std::map<GroupKey, std::array<std::vector<double>, 8>> groups;
  for (const auto & r : rows) {
    const auto cls = std::string(to_string(r.scenario.vehicle_class));
    if (std::find(options.classes.begin(), options.classes.end(), cls) == options.classes.end()) {
      continue;
    }
    const auto label = static_cast<std::size_t>(r.scenario.result.label);
    for (const auto & loc : {std::to_string(r.scenario.location_id), std::string("all")}) {
      for (const auto * name : kIndicatorNames) {
        auto & bucket = groups[{loc, cls, r.scenario.threshold, name}];
        if (const auto v = indicator_value(r.indicators, name)) {
          bucket[label].push_back(*v);
        }
      }
    }
  }
  std::vector<std::pair<GroupKey, std::array<std::vector<double>, 8>>> ordered(
    groups.begin(), groups.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto & x, const auto & y) {
    const auto & [l1, c1, t1, i1] = x.first;
    const auto & [l2, c2, t2, i2] = y.first;
    if (l1 != l2) {
      return location_less(l1, l2);
    }
    return std::tie(c1, t1, i1) < std::tie(c2, t2, i2);
  });

  std::vector<DivergenceMatrix> out(ordered.size());
  auto compute = [&](std::ptrdiff_t gi) {
    const auto & [key, samples] = ordered[static_cast<std::size_t>(gi)];
    auto & m = out[static_cast<std::size_t>(gi)];
    std::tie(m.location, m.vehicle_class, m.threshold, m.indicator) = key;
    for (std::size_t i = 0; i < 8; ++i) {
      m.n[i] = samples[i].size();
    }
    for (std::size_t i = 0; i < 8; ++i) {
      if (m.n[i] >= options.kde.min_samples) {
        m.js[i][i] = 0.0;
      }
      for (std::size_t j = i + 1; j < 8; ++j) {
        const auto v = js_divergence(samples[i], samples[j], options.kde, Execution::serial);
        m.js[i][j] = v;
        m.js[j][i] = v;
      }
    }
  };
  const auto count = static_cast<std::ptrdiff_t>(ordered.size());
  if (execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t gi = 0; gi < count; ++gi) {
      compute(gi);
    }
  } else {
    for (std::ptrdiff_t gi = 0; gi < count; ++gi) {
      compute(gi);
    }
  }
  return out;
}

std::vector<SummaryRow> summary_table(std::span<const IndicatorRow> rows, double fence_multiplier)
{
  using Key = std::tuple<std::string, std::string, double, std::string, std::string>;
  std::map<Key, std::vector<double>> groups;
  for (const auto & r : rows) {
    const auto cls = std::string(to_string(r.scenario.vehicle_class));
    const auto label = std::string(to_string(r.scenario.result.label));
    for (const auto & loc : {std::to_string(r.scenario.location_id), std::string("all")}) {
      for (const auto & c : {cls, std::string("all")}) {
        for (const auto & s : {label, std::string("all")}) {
          for (const auto * name : kIndicatorNames) {
            if (const auto v = indicator_value(r.indicators, name)) {
              groups[{loc, c, r.scenario.threshold, s, name}].push_back(*v);
            }
          }
        }
      }
    }
  }
  std::vector<std::pair<Key, std::vector<double>>> ordered(groups.begin(), groups.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto & x, const auto & y) {
    const auto & [l1, c1, t1, s1, i1] = x.first;
    const auto & [l2, c2, t2, s2, i2] = y.first;
    if (l1 != l2) {
      return location_less(l1, l2);
    }
    return std::tie(c1, t1, s1, i1) < std::tie(c2, t2, s2, i2);
  });
  std::vector<SummaryRow> out;
  out.reserve(ordered.size());
  for (const auto & [key, values] : ordered) {
    SummaryRow row;
    std::tie(row.location, row.vehicle_class, row.threshold, row.scenario, row.indicator) = key;
    row.summary = summarize(values, fence_multiplier);
    out.push_back(std::move(row));
  }
  return out;
}

std::string serialize_summary(std::span<const SummaryRow> rows)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"location", "class", "threshold", "scenario", "indicator", "n", "mean", "filtered_mean", "min",
     "q1", "median", "q3", "max", "iqr", "fence_multiplier", "lower_fence", "upper_fence",
     "whisker_low", "whisker_high", "n_outliers", "outliers"});
  for (const auto & r : rows) {
    const auto & s = r.summary;
    std::string outliers;
    for (std::size_t i = 0; i < s.outlier_values.size(); ++i) {
      outliers += (i ? ";" : "") + csv::format_double(s.outlier_values[i]);
    }
    w.row(
      {r.location, r.vehicle_class, csv::format_double(r.threshold), r.scenario, r.indicator,
       std::to_string(s.n), csv::format_double(s.mean), csv::format_double(s.filtered_mean),
       csv::format_double(s.min), csv::format_double(s.q1), csv::format_double(s.median),
       csv::format_double(s.q3), csv::format_double(s.max), csv::format_double(s.iqr),
       csv::format_double(s.fence_multiplier), csv::format_double(s.lower_fence),
       csv::format_double(s.upper_fence), csv::format_double(s.whisker_low),
       csv::format_double(s.whisker_high), std::to_string(s.outlier_values.size()), outliers});
  }
  return out.str();
}

std::string serialize_divergence(std::span<const DivergenceMatrix> matrices)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"location", "class", "threshold", "indicator", "scenario_i", "scenario_j", "js", "n_i", "n_j",
     "masked"});
  for (const auto & m : matrices) {
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) {
        const auto & v = m.js[i][j];
        w.row(
          {m.location, m.vehicle_class, csv::format_double(m.threshold), m.indicator,
           std::string(to_string(kScenarioLabels[i])), std::string(to_string(kScenarioLabels[j])),
           v ? csv::format_double(*v) : std::string{}, std::to_string(m.n[i]),
           std::to_string(m.n[j]), v ? "0" : "1"});
      }
    }
  }
  return out.str();
}

}  // namespace hdmerge
