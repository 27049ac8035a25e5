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
#include "hdmerge/macroscopic.hpp"
#include "toy_context.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hdmerge;
using hdmerge::testing::toy_context;

namespace
{

VehicleOccupancy steady(double s0, double speed, int frames, double dt, std::optional<double> after)
{
  VehicleOccupancy v;
  for (int k = 0; k < frames; ++k) {
    v.s.push_back(s0 + speed * dt * k);
    v.inside.push_back(1);
  }
  v.s_after = after;
  return v;
}

}  // namespace

TEST(Edie, SingleVehicleCrossingRegion)
{
  const std::vector<VehicleOccupancy> v = {steady(0.0, 20.0, 250, 0.04, 200.0)};
  const auto e = edie_from_occupancy(v, 200.0, 250, 0.04);
  EXPECT_NEAR(e.area, 2000.0, 1e-9);
  EXPECT_NEAR(e.total_distance, 200.0, 1e-9);
  EXPECT_NEAR(e.total_time, 10.0, 1e-9);
  EXPECT_NEAR(e.q, 0.1, 1e-12);
  EXPECT_NEAR(e.k, 0.005, 1e-12);
  ASSERT_TRUE(e.v);
  EXPECT_NEAR(*e.v, 20.0, 1e-9);
  EXPECT_EQ(e.n_vehicles, 1);
  EXPECT_NEAR(e.q_veh_per_hour(), 360.0, 1e-9);
  EXPECT_NEAR(e.k_veh_per_km(), 5.0, 1e-9);
  EXPECT_NEAR(*e.v_km_per_hour(), 72.0, 1e-9);
}

TEST(Edie, EmptyRegion)
{
  const auto e = edie_from_occupancy({}, 100.0, 50, 0.04);
  EXPECT_EQ(e.q, 0.0);
  EXPECT_EQ(e.k, 0.0);
  EXPECT_FALSE(e.v);
  EXPECT_EQ(e.n_vehicles, 0);
}

TEST(Edie, VehicleOutsideCountsNothing)
{
  VehicleOccupancy v = steady(0.0, 20.0, 10, 0.04, {});
  std::fill(v.inside.begin(), v.inside.end(), 0);
  const std::vector<VehicleOccupancy> vs = {v};
  const auto e = edie_from_occupancy(vs, 100.0, 10, 0.04);
  EXPECT_EQ(e.n_vehicles, 0);
  EXPECT_EQ(e.total_distance, 0.0);
}

TEST(Edie, PartialPresenceAndMultipleVehicles)
{
  VehicleOccupancy a = steady(0.0, 10.0, 100, 0.04, 40.0);
  for (int k = 50; k < 100; ++k) {
    a.inside[static_cast<std::size_t>(k)] = 0;
  }
  const std::vector<VehicleOccupancy> vs = {a, steady(0.0, 25.0, 100, 0.04, 100.0), steady(5.0, 5.0, 100, 0.04, {})};
  const auto e = edie_from_occupancy(vs, 100.0, 100, 0.04);
  EXPECT_NEAR(e.total_distance, 20.0 + 100.0 + 20.0, 1e-9);
  EXPECT_NEAR(e.total_time, 2.0 + 4.0 + 4.0, 1e-9);
  EXPECT_EQ(e.n_vehicles, 3);
  EXPECT_NEAR(e.q, e.k * *e.v, 1e-12);
}

TEST(Edie, RejectsDegenerateRegion)
{
  EXPECT_THROW(edie_from_occupancy({}, 0.0, 10, 0.04), DomainError);
  EXPECT_THROW(edie_from_occupancy({}, 10.0, 0, 0.04), DomainError);
}

TEST(Edie, PlatoonMatchesSteadyState)
{
  const double speed = 25.0;
  const double headway = 2.0;
  const auto rec = synth::platoon_recording(speed, headway, 60.0);
  const RecordingIndex index(rec, toy_context());
  const auto & layout = toy_context().layout;
  for (const int area : {4, 5}) {
    SpaceTimeRegion r;
    r.area_bits = area == 4 ? kArea4 : kArea5;
    r.length = layout.area_length[static_cast<std::size_t>(area)];
    r.t0 = 100;
    r.t1 = 1400;
    r.timestep = rec.meta.timestep;
    const auto e = edie_estimate(index, r);
    EXPECT_NEAR(e.q, 1.0 / headway, 0.02 / headway) << area;
    EXPECT_NEAR(e.k, 1.0 / (speed * headway), 0.02 / (speed * headway)) << area;
    ASSERT_TRUE(e.v);
    EXPECT_NEAR(*e.v, speed, 1e-9) << area;
    EXPECT_NEAR(e.q, e.k * *e.v, 1e-12) << area;
  }
}

TEST(Edie, EventMacroMatchesGenerator)
{
  const auto scenes = synth::generate_batch(24, 21);
  for (const auto & s : scenes) {
    Diagnostics diag;
    const auto e = extract_events(s.recording, toy_context(), ExtractionParams{}, diag).events.at(0);
    const RecordingIndex index(s.recording, toy_context());
    const auto m = event_macro(e, index);
    for (const auto & [est, truth] :
         {std::pair{m.upstream_estimate, s.truth.upstream}, std::pair{m.downstream_estimate, s.truth.downstream}}) {
      EXPECT_NEAR(est.q, truth.q, 1e-9 * std::max(1.0, truth.q));
      EXPECT_NEAR(est.k, truth.k, 1e-9 * std::max(1.0, truth.k));
      EXPECT_EQ(est.n_vehicles, truth.n_vehicles);
      EXPECT_EQ(est.v.has_value(), truth.v.has_value());
    }
  }
}
