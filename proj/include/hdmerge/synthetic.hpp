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

#ifndef HDMERGE__SYNTHETIC_HPP_
#define HDMERGE__SYNTHETIC_HPP_

#include "hdmerge/map_model.hpp"
#include "hdmerge/neighbor_scenario.hpp"
#include "hdmerge/trajectory.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hdmerge::synth
{

/// Straight toy junction along +x. Lane centers: ramp y = 0, outer mainline y = 3.5, inner
/// mainline y = 7. Area 1 = [200, 260], Area 2 = [260, 560], Area 3 = [560, 600] on the ramp;
/// Area 4 = [0, 260] and Area 5 = [260, 600] on the outer lane; the map ends at x = 760.
inline constexpr int kLocationId = 90;
inline constexpr double kLaneWidth = 3.5;
inline constexpr double kMapEnd = 760.0;
inline constexpr double kArea1Start = 200.0;
inline constexpr double kArea2Start = 260.0;
inline constexpr double kArea5End = 600.0;
inline constexpr double kTimestep = 0.04;

LaneletMap toy_map();
LocationLayoutConfig toy_layout_config();
/// Layout file text for toy_layout_config().
std::string toy_layout_text();

/// x(t) = x0 + v0 t + a t^2 / 2 with t = frame * timestep, on a fixed lane unless lane changes
/// are given. Lane index: 0 ramp, 1 outer mainline, 2 inner mainline.
struct LaneChange
{
  FrameIndex crossing_frame{0};  ///< first frame on the new lane; the boundary is crossed half a
                                 ///< frame earlier
  double duration{3.0};          ///< seconds, minimum-jerk profile
};

struct VehicleSpec
{
  TrackId id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  double length{4.5};
  double width{1.8};
  int lane{1};
  double x0{0.0};
  double v0{20.0};
  double a{0.0};
  std::vector<LaneChange> lane_changes;  ///< each moves one lane to the left
  FrameIndex first_frame{0};
  FrameIndex last_frame{0};

  double x(double t) const { return x0 + v0 * t + 0.5 * a * t * t; }
  double vx(double t) const { return v0 + a * t; }
  double y(double t) const;
  double vy(double t) const;
  double ay(double t) const;
};

/// Authored neighbor role at t_F: bumper gap and whether the vehicle swapped sides during
/// [t_B, t_F) (rear to lead for the lead, lead to rear for the rear).
struct RoleSpec
{
  TrackId id{0};
  double gap{0.0};
  bool swap{false};
};

struct ScenarioSpec
{
  int recording_id{1};
  std::uint64_t seed{0};
  ScenarioLabel target_label{ScenarioLabel::A};
  VehicleSpec ego;
  std::vector<VehicleSpec> others;
  std::optional<RoleSpec> lead;
  std::optional<RoleSpec> rear;
  FrameIndex frame_count{0};
};

/// Label implied by an authored schedule at a threshold.
ScenarioLabel schedule_label(const ScenarioSpec & spec, double threshold);

struct EdieTruth
{
  double distance{0.0};
  double time{0.0};
  double q{0.0};
  double k{0.0};
  std::optional<double> v;
  int n_vehicles{0};
};

struct ThresholdTruth
{
  double threshold{0.0};
  ScenarioLabel label{ScenarioLabel::A};
  std::optional<TrackId> lead_id;
  std::optional<TrackId> rear_id;
  double min_ttc_lead{0.0};
  double min_ttc_rear{0.0};
  std::optional<double> lead_dhw;
  std::optional<double> lead_thw;
  std::optional<double> rear_dhw;
  std::optional<double> rear_thw;
};

struct GroundTruth
{
  std::string event_id;
  int recording_id{0};
  TrackId ego_id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  ScenarioLabel target_label{ScenarioLabel::A};
  FrameIndex t_B{0};
  std::optional<FrameIndex> t_D;
  std::optional<FrameIndex> t_E;
  FrameIndex t_F{0};
  std::optional<FrameIndex> t_G;
  std::optional<FrameIndex> t_H;
  bool crossed_solid{false};
  double merging_speed{0.0};
  std::optional<double> merging_distance;
  std::optional<double> distance_ratio;
  std::optional<double> duration;
  std::optional<double> consecutive_lc_duration;
  EdieTruth upstream;
  EdieTruth downstream;
  std::vector<ThresholdTruth> thresholds;
};

struct Scene
{
  ScenarioSpec spec;
  Recording recording;
  GroundTruth truth;
};

inline const std::vector<double> kDefaultThresholds = {100.0, 150.0, 200.0};

/// Samples the spec into a recording and evaluates the ground truth analytically. Throws
/// ConfigError when the kinematics do not realize the authored schedule.
Scene generate(const ScenarioSpec & spec, const std::vector<double> & thresholds = kDefaultThresholds);

struct RandomOptions
{
  double solid_merge_fraction{0.0};
  double second_lane_change_fraction{0.3};
  int max_background{2};
};

/// Random consistent spec whose label at 100 m equals `label`.
ScenarioSpec random_spec(
  ScenarioLabel label, int recording_id, std::uint64_t seed, const RandomOptions & options = {});

/// `count` scenes with labels cycling A..H (or drawn at random when `cycle_labels` is false).
std::vector<Scene> generate_batch(
  int count, std::uint64_t seed, bool cycle_labels = true, const RandomOptions & options = {},
  const std::vector<double> & thresholds = kDefaultThresholds);

/// Constant-speed platoon on the outer lane with a fixed time headway; flow = 1 / headway.
Recording platoon_recording(double speed, double headway_s, double duration_s, int recording_id = 1);

std::string ground_truth_json(const GroundTruth & truth);

/// Writes <dir>/maps/location90.osm, <dir>/layout.conf, recording CSVs under <dir>/data and
/// <dir>/truth/<recording>_ground_truth.json.
void write_corpus(const std::filesystem::path & dir, const std::vector<Scene> & scenes);

}  // namespace hdmerge::synth

#endif  // HDMERGE__SYNTHETIC_HPP_
