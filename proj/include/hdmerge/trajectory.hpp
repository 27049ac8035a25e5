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

#ifndef HDMERGE__TRAJECTORY_HPP_
#define HDMERGE__TRAJECTORY_HPP_

#include "hdmerge/errors.hpp"
#include "hdmerge/geometry.hpp"
#include "hdmerge/map_model.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hdmerge
{

using TrackId = std::int64_t;
using FrameIndex = std::int64_t;

enum class VehicleClass { car, truck, van, other };

std::string_view to_string(VehicleClass c);
VehicleClass vehicle_class_from_string(std::string_view s);

struct RecordingMeta
{
  int recording_id{0};
  int location_id{0};
  double frame_rate{25.0};
  double timestep{0.04};
  Vec2 origin_offset;
};

struct TrackMeta
{
  TrackId track_id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  double length{0.0};
  double width{0.0};
  FrameIndex first_frame{0};
  FrameIndex last_frame{0};
};

enum class NeighborSlot : std::size_t {
  lead,
  rear,
  left_lead,
  right_lead,
  left_alongside,
  right_alongside,
  left_rear,
  right_rear,
};
inline constexpr std::size_t kNeighborSlots = 8;

using NeighborIds = std::array<std::optional<TrackId>, kNeighborSlots>;

struct TrackFrame
{
  FrameIndex frame{0};
  Vec2 center;
  double heading_deg{0.0};  ///< dataset convention: degrees, counter-clockwise from +x
  Vec2 velocity;
  Vec2 acceleration;
  std::vector<ElementId> lanelet_candidates;  ///< full multi-valued cell
  std::vector<double> offset_candidates;      ///< aligned with lanelet_candidates when given
  std::optional<ElementId> lanelet_id;        ///< assigned lanelet (contains the center)
  double lat_lane_center_offset{0.0};         ///< NaN when unknown
  bool lane_change_flag{false};
  NeighborIds neighbors;

  double heading_rad() const;
  double speed() const { return norm(velocity); }
  std::optional<TrackId> neighbor(NeighborSlot slot) const
  {
    return neighbors[static_cast<std::size_t>(slot)];
  }
};

struct Track
{
  TrackMeta meta;
  std::vector<TrackFrame> frames;
  bool kinematics_flagged{false};  ///< derive_kinematics could not run (single frame)

  /// Frame record for an absolute frame index, or nullptr outside the track's lifetime.
  const TrackFrame * at(FrameIndex frame) const
  {
    if (frames.empty() || frame < frames.front().frame || frame > frames.back().frame) {
      return nullptr;
    }
    return &frames[static_cast<std::size_t>(frame - frames.front().frame)];
  }
};

/// Which optional dataset fields were present in the source CSV.
struct FieldAvailability
{
  bool heading{false};
  bool velocity{false};
  bool acceleration{false};
  bool lanelet{false};
  bool offset{false};
  bool lane_change{false};
  bool neighbors{false};
};

struct Recording
{
  RecordingMeta meta;
  std::vector<Track> tracks;  ///< sorted by track id
  FieldAvailability fields;

  const Track * find(TrackId id) const;
};

/// Parse an exiD-style recordingMeta/tracksMeta/tracks triple. When `map` is given it fills
/// lanelet assignment and lateral offset for rows that lack them and disambiguates multi-valued
/// lanelet cells by containment.
Recording parse_recording(
  std::string recording_csv, std::string tracks_meta_csv, std::string tracks_csv,
  const LaneletMap * map = nullptr);

struct RecordingFiles
{
  std::filesystem::path recording_meta;
  std::filesystem::path tracks_meta;
  std::filesystem::path tracks;
};

/// `<dir>/<id>_recordingMeta.csv` etc., sorted by recording id.
std::vector<RecordingFiles> discover_recordings(const std::filesystem::path & dir);

Recording load_recording(const RecordingFiles & files, const LaneletMap * map = nullptr);

/// Only reads the recordingMeta file.
RecordingMeta load_recording_meta(const std::filesystem::path & path);

/// Central differences interiorly, one-sided at the ends. Single-frame tracks are flagged and
/// left untouched.
void derive_kinematics(Track & track, double timestep);

std::string serialize_recording_meta(const RecordingMeta & meta);
std::string serialize_tracks_meta(const Recording & recording);
std::string serialize_tracks(const Recording & recording);
void write_recording(const std::filesystem::path & dir, const Recording & recording);

}  // namespace hdmerge

#endif  // HDMERGE__TRAJECTORY_HPP_
