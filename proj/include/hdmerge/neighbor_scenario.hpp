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

#ifndef HDMERGE__NEIGHBOR_SCENARIO_HPP_
#define HDMERGE__NEIGHBOR_SCENARIO_HPP_

#include "hdmerge/event_extraction.hpp"
#include "hdmerge/recording_index.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hdmerge
{

enum class ScenarioLabel { A, B, C, D, E, F, G, H };

inline constexpr std::array<ScenarioLabel, 8> kScenarioLabels = {
  ScenarioLabel::A, ScenarioLabel::B, ScenarioLabel::C, ScenarioLabel::D,
  ScenarioLabel::E, ScenarioLabel::F, ScenarioLabel::G, ScenarioLabel::H};

std::string_view to_string(ScenarioLabel label);
ScenarioLabel scenario_label_from_string(std::string_view s);

struct NeighborSnapshot
{
  FrameIndex frame{0};
  std::optional<TrackId> lead_id;
  std::optional<TrackId> rear_id;
  std::vector<TrackId> alongside_ids;
  double lead_gap{0.0};  ///< bumper-to-bumper, meters; meaningful when lead_id is set
  double rear_gap{0.0};
};

struct NeighborTimeline
{
  std::string event_id;
  double distance_threshold{0.0};
  std::vector<NeighborSnapshot> snapshots;  ///< one per frame in [t_B, t_F]
};

enum class NeighborSource {
  automatic,  ///< dataset fields when the recording has them, geometry otherwise
  dataset,
  geometric,
};

/// Lead/rear/alongside vehicles on the outer mainline lane for every frame in [t_B, t_F].
NeighborTimeline match_neighbors(
  const MergingEvent & event, const RecordingIndex & index, double distance_threshold,
  NeighborSource source = NeighborSource::automatic);

struct ScenarioResult
{
  ScenarioLabel label{ScenarioLabel::A};
  std::optional<TrackId> lead_id;
  std::optional<TrackId> rear_id;
  bool rear_to_lead{false};
  bool lead_to_rear{false};
};

/// Scenario label from the roles at t_F and the role history over [t_B, t_F).
/// A lead that came from behind takes precedence over a rear that came from ahead.
ScenarioResult classify_scenario(const NeighborTimeline & timeline);

struct ScenarioAssignment
{
  std::string event_id;
  int recording_id{0};
  int location_id{0};
  TrackId track_id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  double threshold{0.0};
  ScenarioResult result;
};

struct ScenarioCountRow
{
  std::string location;  ///< location id or "all"
  std::string vehicle_class;  ///< class name or "all"
  double threshold{0.0};
  ScenarioLabel label{ScenarioLabel::A};
  int count{0};
  double share_percent{0.0};  ///< of all events in the same location, class and threshold
};

/// Long-format scenario counts: per (location, class), per location over all classes and an overall
/// total, each with all eight labels for every threshold.
std::vector<ScenarioCountRow> scenario_count_table(
  std::span<const ScenarioAssignment> assignments, std::span<const double> thresholds);

std::string serialize_scenarios(std::span<const ScenarioAssignment> assignments);
std::vector<ScenarioAssignment> parse_scenarios(std::string text);
std::string serialize_scenario_counts(std::span<const ScenarioCountRow> rows);

}  // namespace hdmerge

#endif  // HDMERGE__NEIGHBOR_SCENARIO_HPP_
