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
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hdmerge;
using hdmerge::testing::straight_merge;
using hdmerge::testing::toy_context;

namespace fs = std::filesystem;

namespace
{

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string & name)
{
  const auto dir = fs::temp_directory_path() / ("hdmerge_test_synthetic_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// A faster, decelerating mainline vehicle draws level with the ego and ends up just ahead of it.
synth::ScenarioSpec overtaking_lead()
{
  auto spec = straight_merge(120);
  spec.ego.last_frame = 130;
  spec.frame_count = 131;
  synth::VehicleSpec x;
  x.id = 2;
  x.lane = 1;
  x.x0 = 185.0;
  x.v0 = 30.0;
  x.a = -3.0;
  x.last_frame = 130;
  synth::VehicleSpec y;
  y.id = 3;
  y.lane = 1;
  y.x0 = 150.0;
  y.v0 = 20.0;
  y.last_frame = 130;
  spec.others = {x, y};
  spec.lead = synth::RoleSpec{2, 3.94, true};
  spec.rear = synth::RoleSpec{3, 35.5, false};
  spec.target_label = ScenarioLabel::F;
  return spec;
}

}  // namespace

TEST(Synthetic, SameSeedSameBytes)
{
  const auto a = synth::generate_batch(16, 7);
  const auto b = synth::generate_batch(16, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(serialize_tracks(a[i].recording), serialize_tracks(b[i].recording));
    EXPECT_EQ(serialize_tracks_meta(a[i].recording), serialize_tracks_meta(b[i].recording));
    EXPECT_EQ(synth::ground_truth_json(a[i].truth), synth::ground_truth_json(b[i].truth));
  }
  const auto c = synth::generate_batch(16, 8);
  EXPECT_NE(serialize_tracks(a[0].recording), serialize_tracks(c[0].recording));
}

TEST(Synthetic, CorpusWritesIdentically)
{
  const auto scenes = synth::generate_batch(6, 1);
  const auto d1 = scratch("w1");
  const auto d2 = scratch("w2");
  synth::write_corpus(d1, scenes);
  synth::write_corpus(d2, scenes);
  std::size_t files = 0;
  for (const auto & e : fs::recursive_directory_iterator(d1)) {
    if (e.is_regular_file()) {
      ++files;
      EXPECT_EQ(slurp(e.path()), slurp(d2 / fs::relative(e.path(), d1))) << e.path();
    }
  }
  EXPECT_EQ(files, 2u + 3u * scenes.size() + scenes.size());
}

TEST(Synthetic, CorpusPassesIngestAndExtractionWithoutWarnings)
{
  const auto scenes = synth::generate_batch(24, 2);
  const auto dir = scratch("closure");
  synth::write_corpus(dir, scenes);
  const auto map = load_lanelet2_file(dir / "maps" / "90_toy.osm");
  const auto cfg = load_layout_config(dir / "layout.conf");
  Diagnostics diag;
  auto layout = load_layout(map, cfg.locations.at(synth::kLocationId), cfg.length_tolerance, diag);
  const auto context = LocationContext::build(std::make_shared<const LaneletMap>(map), std::move(layout));
  const auto files = discover_recordings(dir / "data");
  ASSERT_EQ(files.size(), scenes.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto rec = load_recording(files[i], context.map.get());
    ASSERT_EQ(rec.tracks.size(), scenes[i].recording.tracks.size());
    const auto result = extract_events(rec, context, ExtractionParams{}, diag);
    ASSERT_EQ(result.events.size(), 1u);
    EXPECT_EQ(result.events[0].t_F, scenes[i].truth.t_F);
    EXPECT_EQ(result.events[0].t_D, scenes[i].truth.t_D);
  }
  EXPECT_TRUE(diag.empty()) << diag.items().front().message;
}

TEST(Synthetic, EgoMustStartOnRamp)
{
  auto spec = straight_merge(120);
  spec.ego.lane = 1;
  EXPECT_THROW(synth::generate(spec), ConfigError);
}

TEST(Synthetic, UnrealizableScheduleIsRejected)
{
  auto spec = straight_merge(120);
  synth::VehicleSpec far;
  far.id = 2;
  far.lane = 1;
  far.x0 = 500.0;
  far.last_frame = spec.ego.last_frame;
  spec.others.push_back(far);
  spec.lead = synth::RoleSpec{2, 20.0, false};
  spec.target_label = ScenarioLabel::B;
  EXPECT_THROW(synth::generate(spec), ConfigError);
}

TEST(Synthetic, StoppingVehicleIsRejected)
{
  auto spec = straight_merge(120);
  spec.ego.a = -5.0;
  EXPECT_THROW(synth::generate(spec), ConfigError);
}

TEST(Synthetic, OvertakingRearGivesFWithFiniteLeadTtc)
{
  const auto scene = synth::generate(overtaking_lead());
  ASSERT_FALSE(scene.truth.thresholds.empty());
  const auto & t = scene.truth.thresholds.front();
  EXPECT_EQ(t.label, ScenarioLabel::F);
  EXPECT_TRUE(std::isfinite(t.min_ttc_lead));
  EXPECT_GT(t.min_ttc_lead, 0.0);

  Diagnostics diag;
  const auto e = extract_events(scene.recording, toy_context(), ExtractionParams{}, diag).events.at(0);
  const RecordingIndex index(scene.recording, toy_context());
  const auto timeline = match_neighbors(e, index, t.threshold);
  EXPECT_EQ(classify_scenario(timeline).label, ScenarioLabel::F);
  EXPECT_NEAR(min_ttc(e, timeline, index).lead, t.min_ttc_lead, 1e-9);
}

TEST(Synthetic, RandomSpecsHitEveryLabel)
{
  for (const auto label : kScenarioLabels) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto scene = synth::generate(synth::random_spec(label, 1, 1000 + seed));
      EXPECT_EQ(scene.truth.thresholds.front().label, label);
      EXPECT_EQ(synth::schedule_label(scene.spec, 100.0), label);
    }
  }
}

TEST(Synthetic, BatchCyclesLabels)
{
  const auto scenes = synth::generate_batch(16, 4);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    EXPECT_EQ(scenes[i].truth.target_label, kScenarioLabels[i % 8]);
    EXPECT_EQ(scenes[i].recording.meta.recording_id, static_cast<int>(i) + 1);
  }
}

TEST(Synthetic, PlatoonHasSteadySpacing)
{
  const auto rec = synth::platoon_recording(20.0, 1.5, 10.0);
  ASSERT_GE(rec.tracks.size(), 2u);
  const FrameIndex f = std::max(rec.tracks[0].frames.front().frame, rec.tracks[1].frames.front().frame);
  const auto * a = rec.tracks[0].at(f);
  const auto * b = rec.tracks[1].at(f);
  ASSERT_TRUE(a && b);
  EXPECT_NEAR(a->center.x - b->center.x, 30.0, 1e-9);
}
