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

#include "hdmerge/errors.hpp"
#include "hdmerge/statistics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hdmerge;

namespace
{

std::vector<double> normal_samples(std::size_t n, double mean, double sd, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> x(n);
  for (auto & v : x) {
    v = dist(rng);
  }
  return x;
}

IndicatorRow row(ScenarioLabel label, double speed)
{
  IndicatorRow r;
  r.scenario.location_id = 90;
  r.scenario.threshold = 100.0;
  r.scenario.result.label = label;
  r.indicators.merging_speed = speed;
  return r;
}

}  // namespace

TEST(Quantiles, LinearInterpolation)
{
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(quantile_linear(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_linear(x, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_linear(x, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_linear(x, 1.0), 4.0);
}

TEST(Summary, FlagsFarOutlier)
{
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 100};
  const auto s = summarize(x, 3.0);
  EXPECT_DOUBLE_EQ(s.q1, 3.25);
  EXPECT_DOUBLE_EQ(s.q3, 7.75);
  ASSERT_EQ(s.outlier_values.size(), 1u);
  EXPECT_EQ(s.outlier_values[0], 100.0);
  EXPECT_EQ(s.whisker_high, 9.0);
  EXPECT_DOUBLE_EQ(s.filtered_mean, 5.0);
  EXPECT_DOUBLE_EQ(s.mean, 14.5);
}

TEST(Summary, ConstantSample)
{
  const std::vector<double> x(7, 2.5);
  const auto s = summarize(x);
  EXPECT_EQ(s.iqr, 0.0);
  EXPECT_TRUE(s.outlier_values.empty());
  EXPECT_EQ(s.filtered_mean, 2.5);
}

TEST(Summary, SingleSample)
{
  const std::vector<double> x = {4.0};
  const auto s = summarize(x);
  EXPECT_EQ(s.n, 1u);
  EXPECT_EQ(s.median, 4.0);
  EXPECT_EQ(s.whisker_low, 4.0);
  EXPECT_EQ(s.whisker_high, 4.0);
}

TEST(Summary, EmptyThrows) { EXPECT_THROW(summarize(std::vector<double>{}), DomainError); }

TEST(Kde, StandardNormalPeak)
{
  const auto x = normal_samples(4000, 0.0, 1.0, 1);
  const std::vector<double> grid = {0.0};
  const auto d = kde_on_grid(x, silverman_bandwidth(x), grid);
  EXPECT_NEAR(d.values[0], 1.0 / std::sqrt(2.0 * M_PI), 0.02);
}

TEST(Kde, IntegratesToOne)
{
  const auto x = normal_samples(500, 3.0, 2.0, 2);
  const auto d = kde(x);
  ASSERT_TRUE(d);
  EXPECT_NEAR(trapezoid(d->grid, d->values), 1.0, 1e-6);
}

TEST(Kde, SmallSampleIsMasked)
{
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  EXPECT_FALSE(kde(x));
}

TEST(Kde, ConstantSampleStillNormalized)
{
  const std::vector<double> x(20, 7.0);
  const double h = silverman_bandwidth(x);
  EXPECT_GT(h, 0.0);
  const auto d = kde(x);
  ASSERT_TRUE(d);
  EXPECT_NEAR(trapezoid(d->grid, d->values), 1.0, 1e-6);
}

TEST(Kde, SerialMatchesParallel)
{
  const auto x = normal_samples(300, 0.0, 1.0, 3);
  const auto grid = uniform_grid(-4.0, 4.0, 257);
  const double h = silverman_bandwidth(x);
  EXPECT_EQ(kde_on_grid(x, h, grid, Execution::serial).values, kde_on_grid(x, h, grid, Execution::parallel).values);
}

TEST(JsDivergence, IdenticalSamplesNearZero)
{
  const auto x = normal_samples(200, 0.0, 1.0, 4);
  EXPECT_LT(*js_divergence(x, x), 1e-6);
}

TEST(JsDivergence, DisjointSamplesNearOne)
{
  const auto x = normal_samples(200, 0.0, 0.1, 5);
  const auto y = normal_samples(200, 100.0, 0.1, 6);
  EXPECT_NEAR(*js_divergence(x, y), 1.0, 1e-3);
}

TEST(JsDivergence, SymmetricAndMonotone)
{
  const auto x = normal_samples(300, 0.0, 1.0, 7);
  double previous = -1.0;
  for (const double shift : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const auto y = normal_samples(300, shift, 1.0, 8);
    const double a = *js_divergence(x, y);
    EXPECT_NEAR(a, *js_divergence(y, x), 1e-12);
    EXPECT_GT(a, previous);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    previous = a;
  }
}

TEST(JsDivergence, MaskedBelowMinimumCount)
{
  const auto x = normal_samples(50, 0.0, 1.0, 9);
  const std::vector<double> y = {1.0, 2.0};
  EXPECT_FALSE(js_divergence(x, y));
}

TEST(Divergence, ShiftedGroupStandsOut)
{
  std::vector<IndicatorRow> rows;
  const auto a = normal_samples(60, 20.0, 1.0, 10);
  const auto b = normal_samples(60, 20.2, 1.0, 11);
  const auto e = normal_samples(60, 26.0, 1.0, 12);
  for (std::size_t i = 0; i < 60; ++i) {
    rows.push_back(row(ScenarioLabel::A, a[i]));
    rows.push_back(row(ScenarioLabel::B, b[i]));
    rows.push_back(row(ScenarioLabel::E, e[i]));
  }
  rows.push_back(row(ScenarioLabel::C, 20.0));
  const auto matrices = divergence_matrices(rows);
  const DivergenceMatrix * speed = nullptr;
  for (const auto & m : matrices) {
    if (m.location == "90" && m.indicator == "merging_speed") {
      speed = &m;
    }
  }
  ASSERT_NE(speed, nullptr);
  const auto idx = [](ScenarioLabel l) { return static_cast<std::size_t>(l); };
  const double ab = *speed->js[idx(ScenarioLabel::A)][idx(ScenarioLabel::B)];
  const double ae = *speed->js[idx(ScenarioLabel::A)][idx(ScenarioLabel::E)];
  const double be = *speed->js[idx(ScenarioLabel::B)][idx(ScenarioLabel::E)];
  EXPECT_GT(ae, 5.0 * ab);
  EXPECT_GT(be, 5.0 * ab);
  EXPECT_EQ(*speed->js[idx(ScenarioLabel::A)][idx(ScenarioLabel::A)], 0.0);
  EXPECT_FALSE(speed->js[idx(ScenarioLabel::A)][idx(ScenarioLabel::C)]);
  EXPECT_FALSE(speed->js[idx(ScenarioLabel::C)][idx(ScenarioLabel::C)]);
  EXPECT_EQ(speed->n[idx(ScenarioLabel::C)], 1u);
}

TEST(Divergence, SerialMatchesParallel)
{
  std::vector<IndicatorRow> rows;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(10.0, 30.0);
  for (int i = 0; i < 400; ++i) {
    auto r = row(kScenarioLabels[static_cast<std::size_t>(i % 8)], u(rng));
    r.indicators.duration = u(rng) / 5.0;
    r.scenario.threshold = i % 2 == 0 ? 100.0 : 150.0;
    rows.push_back(r);
  }
  const auto s = divergence_matrices(rows, {}, Execution::serial);
  const auto p = divergence_matrices(rows, {}, Execution::parallel);
  ASSERT_EQ(s.size(), p.size());
  EXPECT_EQ(serialize_divergence(s), serialize_divergence(p));
}

TEST(Divergence, ExcludedClassesAreSkipped)
{
  std::vector<IndicatorRow> rows;
  for (int i = 0; i < 20; ++i) {
    auto r = row(ScenarioLabel::A, 20.0 + i);
    r.scenario.vehicle_class = VehicleClass::truck;
    rows.push_back(r);
  }
  EXPECT_TRUE(divergence_matrices(rows).empty());
}
