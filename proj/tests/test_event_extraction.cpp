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

#include "hdmerge/event_extraction.hpp"
#include "hdmerge/map_model.hpp"
#include "toy_context.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace hdmerge;
using hdmerge::testing::straight_merge;
using hdmerge::testing::toy_context;

namespace
{

Track lanelet_track(std::initializer_list<std::optional<ElementId>> lanelets)
{
  Track t;
  t.meta.track_id = 1;
  FrameIndex f = 0;
  for (const auto & id : lanelets) {
    TrackFrame fr;
    fr.frame = f++;
    fr.lanelet_id = id;
    t.frames.push_back(fr);
  }
  t.meta.last_frame = f - 1;
  return t;
}

MergingAreaLayout location2()
{
  return layout_from_config(
    load_layout_config(std::string(HDMERGE_SOURCE_DIR) + "/conf/exid_layout.conf").locations.at(2));
}

ExtractionResult extract(const Recording & rec, Diagnostics & diag)
{
  return extract_events(rec, toy_context(), ExtractionParams{}, diag);
}

}  // namespace

TEST(Route, OnRampPath)
{
  EXPECT_EQ(classify_route(lanelet_track({1495, 1500, 1500, 1503, 1503, 1502, 1502}), location2()), RouteClass::on_ramp_merging);
}

TEST(Route, MainlineOnly)
{
  EXPECT_EQ(classify_route(lanelet_track({1489, 1493, 1499, 1502}), location2()), RouteClass::mainline);
}

TEST(Route, NoAssignments)
{
  EXPECT_EQ(classify_route(lanelet_track({std::nullopt, std::nullopt}), location2()), RouteClass::other);
}

TEST(KeyPositions, CrossingFrameIsMergeFrame)
{
  const auto scene = synth::generate(straight_merge(120));
  Diagnostics diag;
  const auto result = extract(scene.recording, diag);
  ASSERT_EQ(result.events.size(), 1u);
  const auto & e = result.events[0];
  EXPECT_EQ(e.t_F, 120);
  EXPECT_EQ(e.t_B, scene.truth.t_B);
  EXPECT_EQ(e.t_D, scene.truth.t_D);
  EXPECT_EQ(e.t_E, scene.truth.t_E);
  EXPECT_EQ(e.t_G, scene.truth.t_G);
  EXPECT_FALSE(e.t_H);
  EXPECT_FALSE(e.crossed_solid);
  EXPECT_TRUE(diag.empty());
}

TEST(KeyPositions, MergeFromAreaOneCrossesSolidLine)
{
  const auto scene = synth::generate(straight_merge(30));
  Diagnostics diag;
  const auto result = extract(scene.recording, diag);
  ASSERT_EQ(result.events.size(), 1u);
  EXPECT_TRUE(result.events[0].crossed_solid);
  EXPECT_FALSE(result.events[0].t_D);
  EXPECT_TRUE(scene.truth.crossed_solid);
}

TEST(KeyPositions, SecondLaneChangeGivesH)
{
  auto spec = straight_merge(120);
  spec.ego.lane_changes.push_back({250, 3.0});
  spec.ego.last_frame = 330;
  spec.frame_count = 331;
  const auto scene = synth::generate(spec);
  Diagnostics diag;
  const auto result = extract(scene.recording, diag);
  ASSERT_EQ(result.events.size(), 1u);
  EXPECT_EQ(result.events[0].t_H, FrameIndex{250});
}

TEST(KeyPositions, TrackStartingInsideWindowIsRejected)
{
  auto scene = synth::generate(straight_merge(120));
  auto & ego = scene.recording.tracks[0];
  while (ego.frames.front().center.x <= 265.0) {
    ego.frames.erase(ego.frames.begin());
  }
  ego.meta.first_frame = ego.frames.front().frame;
  Diagnostics diag;
  const auto result = extract(scene.recording, diag);
  EXPECT_TRUE(result.events.empty());
  ASSERT_EQ(result.rejections.size(), 1u);
  EXPECT_EQ(result.rejections[0].reason, "missing_position_b");
}

TEST(KeyPositions, MatchesGeneratorOnRandomBatch)
{
  const auto scenes = synth::generate_batch(64, 99);
  for (const auto & s : scenes) {
    Diagnostics diag;
    const auto result = extract(s.recording, diag);
    ASSERT_EQ(result.events.size(), 1u) << s.truth.event_id;
    const auto & e = result.events[0];
    EXPECT_EQ(e.id(), s.truth.event_id);
    EXPECT_EQ(e.t_B, s.truth.t_B);
    EXPECT_EQ(e.t_D, s.truth.t_D);
    EXPECT_EQ(e.t_E, s.truth.t_E);
    EXPECT_EQ(e.t_F, s.truth.t_F);
    EXPECT_EQ(e.t_G, s.truth.t_G);
    EXPECT_EQ(e.t_H, s.truth.t_H);
    EXPECT_TRUE(diag.empty()) << s.truth.event_id << ": " << diag.items()[0].message;
  }
}

TEST(SolidLineCounts, EmptyInputGivesZeros)
{
  const std::vector<int> locs = {2, 5};
  const auto rows = count_solid_line_merges({}, locs);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto & r : rows) {
    EXPECT_EQ(r.count, 0);
  }
}

TEST(SolidLineCounts, CountsPerClass)
{
  std::vector<MergingEvent> events(4);
  for (int i = 0; i < 3; ++i) {
    events[i].location_id = 5;
    events[i].vehicle_class = VehicleClass::truck;
    events[i].crossed_solid = true;
  }
  events[3].location_id = 5;
  const std::vector<int> locs = {5};
  for (const auto & r : count_solid_line_merges(events, locs)) {
    EXPECT_EQ(r.count, r.vehicle_class == VehicleClass::truck ? 3 : 0);
  }
}

TEST(Events, SerializeParseRoundTrip)
{
  const auto scenes = synth::generate_batch(8, 5);
  std::vector<MergingEvent> events;
  for (const auto & s : scenes) {
    Diagnostics diag;
    for (auto & e : extract(s.recording, diag).events) {
      events.push_back(e);
    }
  }
  EXPECT_EQ(parse_events(serialize_events(events)), events);
}
