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

#ifndef HDMERGE__EVENT_EXTRACTION_HPP_
#define HDMERGE__EVENT_EXTRACTION_HPP_

#include "hdmerge/errors.hpp"
#include "hdmerge/location_context.hpp"
#include "hdmerge/trajectory.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hdmerge
{

enum class RouteClass { mainline, on_ramp_merging, off_ramp, other };

std::string_view to_string(RouteClass route);

struct MergingEvent
{
  int recording_id{0};
  int location_id{0};
  TrackId track_id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  FrameIndex t_B{0};
  std::optional<FrameIndex> t_D;
  std::optional<FrameIndex> t_E;
  FrameIndex t_F{0};
  std::optional<FrameIndex> t_G;
  std::optional<FrameIndex> t_H;
  bool crossed_solid{false};

  /// Stable key "<recording>-<track>".
  std::string id() const;
  bool operator==(const MergingEvent &) const = default;
};

struct Rejection
{
  int recording_id{0};
  int location_id{0};
  TrackId track_id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  std::string reason;  ///< missing_position_f, missing_position_b, inconsistent_positions
  std::string detail;
};

struct ExtractionParams
{
  int lookback{5};
  int offset_jump_tolerance{2};  ///< frames between lanelet switch and offset sign jump
  double min_lane_jump{1.0};     ///< meters; offset jump that marks a lateral lanelet switch
};

/// Outcome for one on-ramp track: exactly one of event / rejection is set.
struct KeyPositionResult
{
  std::optional<MergingEvent> event;
  std::optional<Rejection> rejection;
};

/// Route from the ordered sequence of assigned lanelets. Lanelets that are labeled both as ramp
/// (Areas 1-3) and mainline (Areas 4/5) carry no routing information and are skipped.
RouteClass classify_route(const Track & track, const MergingAreaLayout & layout);

/// Key positions of an on-ramp merge. `recording` supplies ids, timestep and field availability;
/// `track` must belong to it.
KeyPositionResult detect_key_positions(
  const Track & track, const Recording & recording, const LocationContext & context,
  const ExtractionParams & params, Diagnostics & diagnostics);

struct TrackRoute
{
  TrackId track_id{0};
  RouteClass route{RouteClass::other};
};

struct ExtractionResult
{
  std::vector<TrackRoute> routes;
  std::vector<MergingEvent> events;
  std::vector<Rejection> rejections;
};

ExtractionResult extract_events(
  const Recording & recording, const LocationContext & context, const ExtractionParams & params,
  Diagnostics & diagnostics);

struct SolidLineCount
{
  int location_id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  int count{0};
};

/// Crossed-solid events per location and class. Every location in `locations` gets a row for
/// car, truck and van even when zero; class `other` appears only when non-zero.
std::vector<SolidLineCount> count_solid_line_merges(
  std::span<const MergingEvent> events, std::span<const int> locations);

std::string serialize_events(std::span<const MergingEvent> events);
std::vector<MergingEvent> parse_events(std::string text);
std::string serialize_rejections(std::span<const Rejection> rejections);

}  // namespace hdmerge

#endif  // HDMERGE__EVENT_EXTRACTION_HPP_
