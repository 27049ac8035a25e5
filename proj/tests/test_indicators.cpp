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
#include "hdmerge/indicators.hpp"
#include "toy_context.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace hdmerge;
using hdmerge::testing::straight_merge;
using hdmerge::testing::toy_context;

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Time to collision from a central difference of the center distance.
double ttc_oracle(const Vec2 & p_i, const Vec2 & v_i, const Vec2 & p_j, const Vec2 & v_j)
{
  auto dist = [&](double t) { return norm((p_i + v_i * t) - (p_j + v_j * t)); };
  const double h = 1e-6;
  const double rate = (dist(h) - dist(-h)) / (2.0 * h);
  return rate < 0.0 ? -dist(0.0) / rate : kInf;
}

Vec2 rigid(const Vec2 & p, double angle, const Vec2 & shift)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return Vec2{c * p.x - s * p.y, s * p.x + c * p.y} + shift;
}

Vec2 rotate(const Vec2 & v, double angle) { return rigid(v, angle, {}); }

MergingEvent event_with(FrameIndex t_D, FrameIndex t_F, std::optional<FrameIndex> t_H = {})
{
  MergingEvent e;
  e.t_B = 0;
  e.t_D = t_D;
  e.t_F = t_F;
  e.t_H = t_H;
  return e;
}

}  // namespace

TEST(Ttc1d, ClosingFollower) { EXPECT_DOUBLE_EQ(ttc_1d(20.0, 10.0, 5.0), 4.0); }

TEST(Ttc1d, NotClosingIsInfinite)
{
  EXPECT_EQ(ttc_1d(20.0, 10.0, 10.0), kInf);
  EXPECT_EQ(ttc_1d(20.0, 10.0, 12.0), kInf);
}

TEST(Ttc1d, OverlapThrows) { EXPECT_THROW(ttc_1d(-1.0, 10.0, 5.0), DomainError); }

TEST(Ttc2d, CollinearMatchesOneDimensional)
{
  EXPECT_NEAR(ttc_2d({0.0, 0.0}, {10.0, 0.0}, {20.0, 0.0}, {5.0, 0.0}), 4.0, 1e-12);
}

TEST(Ttc2d, ObliqueApproach)
{
  const Vec2 p_i{0.0, 0.0};
  const Vec2 v_i{20.0, 0.0};
  const Vec2 p_j{30.0, 3.5};
  const Vec2 v_j{10.0, 0.0};
  const double value = ttc_2d(p_i, v_i, p_j, v_j);
  EXPECT_NEAR(value, (30.0 * 30.0 + 3.5 * 3.5) / 300.0, 1e-12);
  EXPECT_NEAR(value, ttc_oracle(p_i, v_i, p_j, v_j), 1e-3);
}

TEST(Ttc2d, SeparatingIsInfinite)
{
  EXPECT_EQ(ttc_2d({0.0, 0.0}, {10.0, 0.0}, {30.0, 3.5}, {10.0, 0.0}), kInf);
  EXPECT_EQ(ttc_2d({0.0, 0.0}, {10.0, 0.0}, {30.0, 3.5}, {15.0, 1.0}), kInf);
}

TEST(Ttc2d, CoincidentThrows)
{
  EXPECT_THROW(ttc_2d({1.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}), DomainError);
}

TEST(Ttc2d, RandomPairsMatchOracleAndRigidMotion)
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(-60.0, 60.0);
  std::uniform_real_distribution<double> vel(-30.0, 30.0);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int n = 0; n < 200; ++n) {
    const Vec2 p_i{pos(rng), pos(rng)};
    const Vec2 p_j{pos(rng), pos(rng)};
    const Vec2 v_i{vel(rng), vel(rng)};
    const Vec2 v_j{vel(rng), vel(rng)};
    const double value = ttc_2d(p_i, v_i, p_j, v_j);
    const double oracle = ttc_oracle(p_i, v_i, p_j, v_j);
    if (std::isinf(oracle)) {
      EXPECT_TRUE(std::isinf(value));
    } else {
      EXPECT_NEAR(value, oracle, 1e-3 * std::max(1.0, oracle));
    }
    const double a = ang(rng);
    const Vec2 shift{pos(rng), pos(rng)};
    const double moved = ttc_2d(rigid(p_i, a, shift), rotate(v_i, a), rigid(p_j, a, shift), rotate(v_j, a));
    if (std::isinf(value)) {
      EXPECT_TRUE(std::isinf(moved));
    } else {
      EXPECT_NEAR(moved, value, 1e-9 * std::max(1.0, value));
    }
  }
}

TEST(LateralFit, RecoversQuintic)
{
  const std::array<double, 6> c = {0.3, -1.2, 2.5, 4.0, -3.5, 1.1};
  std::vector<double> u;
  std::vector<double> y;
  for (int k = 0; k <= 50; ++k) {
    const double x = k / 50.0;
    u.push_back(x);
    y.push_back(c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * (c[4] + x * c[5])))));
  }
  const auto fit = fit_quintic(u, y, 2.0);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(fit.coefficients[i], c[i], 1e-6);
  }
  EXPECT_LT(fit.rms_residual, 1e-9);
  const double slope = c[1] + 2 * c[2] * 0.5 + 3 * c[3] * 0.25 + 4 * c[4] * 0.125 + 5 * c[5] * 0.0625;
  EXPECT_NEAR(fit.speed(0.5), slope / 2.0, 1e-6);
}

TEST(LateralFit, ConstantSignalHasNoMotion)
{
  std::vector<double> u;
  std::vector<double> y;
  for (int k = 0; k <= 20; ++k) {
    u.push_back(k / 20.0);
    y.push_back(-1.75);
  }
  const auto fit = fit_quintic(u, y, 1.0);
  EXPECT_NEAR(max_abs_derivative_u(fit, 1), 0.0, 1e-9);
  EXPECT_NEAR(max_abs_derivative_u(fit, 2), 0.0, 1e-9);
}

TEST(LateralFit, LinearDriftHasConstantSpeed)
{
  std::vector<double> u;
  std::vector<double> y;
  for (int k = 0; k <= 20; ++k) {
    u.push_back(k / 20.0);
    y.push_back(-2.0 + 3.5 * (k / 20.0));
  }
  const auto fit = fit_quintic(u, y, 2.5);
  EXPECT_NEAR(max_abs_derivative_u(fit, 1) / 2.5, 1.4, 1e-6);
  EXPECT_NEAR(max_abs_derivative_u(fit, 2), 0.0, 1e-6);
}

TEST(LateralFit, TooFewSamplesThrows)
{
  const std::vector<double> u = {0.0, 0.5, 1.0};
  const std::vector<double> y = {0.0, 1.0, 2.0};
  EXPECT_ANY_THROW(fit_quintic(u, y, 1.0));
}

TEST(Scalars, DistanceRatio)
{
  MergingAreaLayout layout;
  layout.merge_window_length = 160.32;
  EXPECT_DOUBLE_EQ(distance_ratio(80.16, layout), 0.5);
  EXPECT_DOUBLE_EQ(distance_ratio(0.0, layout), 0.0);
  EXPECT_DOUBLE_EQ(distance_ratio(160.32, layout), 1.0);
  EXPECT_THROW(distance_ratio(170.0, layout), IntegrityError);
  EXPECT_THROW(distance_ratio(-3.0, layout), IntegrityError);
}

TEST(Scalars, Durations)
{
  EXPECT_NEAR(*merging_duration(event_with(100, 200), 0.04), 4.0, 1e-12);
  EXPECT_NEAR(*merging_duration(event_with(100, 101), 0.04), 0.04, 1e-12);
  MergingEvent no_d = event_with(0, 10);
  no_d.t_D.reset();
  EXPECT_FALSE(merging_duration(no_d, 0.04));
  EXPECT_NEAR(*consecutive_lc_duration(event_with(50, 100, 200), 0.04), 4.0, 1e-12);
  EXPECT_FALSE(consecutive_lc_duration(event_with(50, 100), 0.04));
}

TEST(Scalars, MergingDistanceAtConstantSpeed)
{
  // 20 m/s; enters the merge window at frame 88 and crosses 3 s later.
  const auto scene = synth::generate(straight_merge(163));
  Diagnostics diag;
  const auto result = extract_events(scene.recording, toy_context(), ExtractionParams{}, diag);
  ASSERT_EQ(result.events.size(), 1u);
  const auto & e = result.events[0];
  ASSERT_EQ(e.t_D, FrameIndex{88});
  const auto d = merging_distance(e, scene.recording.tracks[0], toy_context());
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 60.0, 0.5);
  EXPECT_NEAR(*merging_duration(e, 0.04), 3.0, 1e-12);
}

TEST(Headways, GapOverSpeed)
{
  Recording rec;
  rec.meta.recording_id = 1;
  rec.meta.location_id = synth::kLocationId;
  rec.meta.timestep = 0.04;
  for (const TrackId id : {1, 2, 3}) {
    Track t;
    t.meta.track_id = id;
    TrackFrame f;
    f.frame = 10;
    f.center = {300.0 + 10.0 * id, 3.5};
    f.velocity = {id == 1 ? 15.0 : (id == 3 ? 0.0 : 20.0), 0.0};
    t.frames.push_back(f);
    t.meta.first_frame = t.meta.last_frame = 10;
    rec.tracks.push_back(t);
  }
  const RecordingIndex index(rec, toy_context());
  MergingEvent e;
  e.track_id = 1;
  e.t_B = 10;
  e.t_F = 10;
  NeighborTimeline timeline;
  NeighborSnapshot snap;
  snap.frame = 10;
  snap.lead_id = 2;
  snap.lead_gap = 30.0;
  snap.rear_id = 3;
  snap.rear_gap = 12.0;
  timeline.snapshots.push_back(snap);
  const auto h = headways(e, timeline, index);
  EXPECT_DOUBLE_EQ(*h.lead_dhw, 30.0);
  EXPECT_DOUBLE_EQ(*h.lead_thw, 2.0);
  EXPECT_DOUBLE_EQ(*h.rear_dhw, 12.0);
  EXPECT_EQ(*h.rear_thw, kInf);
}

TEST(Headways, TimeHeadwayFromGap)
{
  auto spec = straight_merge(120);
  spec.ego.length = 4.0;
  synth::VehicleSpec lead;
  lead.id = 2;
  lead.length = 4.0;
  lead.lane = 1;
  lead.v0 = 20.0;
  lead.x0 = 190.0 + 44.0;
  lead.last_frame = spec.ego.last_frame;
  spec.others.push_back(lead);
  spec.lead = synth::RoleSpec{2, 40.0, false};
  spec.target_label = ScenarioLabel::B;
  const auto scene = synth::generate(spec);
  Diagnostics diag;
  const auto e = extract_events(scene.recording, toy_context(), ExtractionParams{}, diag).events.at(0);
  const RecordingIndex index(scene.recording, toy_context());
  const auto timeline = match_neighbors(e, index, 100.0);
  const auto h = headways(e, timeline, index);
  ASSERT_TRUE(h.lead_dhw);
  EXPECT_NEAR(*h.lead_dhw, 40.0, 1e-6);
  EXPECT_NEAR(*h.lead_thw, 40.0 / scene.recording.tracks[0].at(e.t_F)->speed(), 1e-9);
  EXPECT_FALSE(h.rear_dhw);
  const auto ttc = min_ttc(e, timeline, index);
  EXPECT_TRUE(std::isinf(ttc.rear));
}

TEST(Indicators, MatchGeneratorOnRandomBatch)
{
  const auto scenes = synth::generate_batch(48, 11);
  for (const auto & s : scenes) {
    Diagnostics diag;
    const auto result = extract_events(s.recording, toy_context(), ExtractionParams{}, diag);
    ASSERT_EQ(result.events.size(), 1u);
    const auto & e = result.events[0];
    const RecordingIndex index(s.recording, toy_context());
    for (const auto & t : s.truth.thresholds) {
      const auto set = compute_indicators(e, match_neighbors(e, index, t.threshold), index);
      EXPECT_NEAR(set.merging_speed, s.truth.merging_speed, 1e-9);
      EXPECT_EQ(set.duration.has_value(), s.truth.duration.has_value());
      if (set.duration && s.truth.duration) {
        EXPECT_NEAR(*set.duration, *s.truth.duration, 1e-9);
      }
      if (set.merging_distance && s.truth.merging_distance) {
        EXPECT_NEAR(*set.merging_distance, *s.truth.merging_distance, 1e-6);
      }
      auto same = [](double a, double b) { return (std::isinf(a) && std::isinf(b)) || std::abs(a - b) < 1e-6; };
      EXPECT_TRUE(same(set.min_ttc_lead, t.min_ttc_lead)) << s.truth.event_id;
      EXPECT_TRUE(same(set.min_ttc_rear, t.min_ttc_rear)) << s.truth.event_id;
      EXPECT_EQ(set.headways.lead_dhw.has_value(), t.lead_dhw.has_value());
      if (set.headways.lead_dhw && t.lead_dhw) {
        EXPECT_NEAR(*set.headways.lead_dhw, *t.lead_dhw, 1e-6);
      }
    }
  }
}

TEST(Indicators, SerializeParseRoundTrip)
{
  IndicatorRow row;
  row.scenario.event_id = "4-9";
  row.scenario.recording_id = 4;
  row.scenario.track_id = 9;
  row.scenario.threshold = 100.0;
  row.scenario.result.label = ScenarioLabel::C;
  row.indicators.merging_speed = 21.5;
  row.indicators.merging_distance = 50.25;
  row.indicators.min_ttc_lead = kInf;
  row.indicators.min_ttc_rear = 3.25;
  row.indicators.headways.lead_dhw = 12.0;
  const std::vector<IndicatorRow> rows = {row};
  const auto back = parse_indicators(serialize_indicators(rows));
  ASSERT_EQ(back.size(), 1u);
  for (const auto * name : kIndicatorNames) {
    const auto a = indicator_value(row.indicators, name);
    const auto b = indicator_value(back[0].indicators, name);
    ASSERT_EQ(a.has_value(), b.has_value()) << name;
    if (a) {
      EXPECT_EQ(*a, *b) << name;
    }
  }
}
