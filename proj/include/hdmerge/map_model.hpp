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

#ifndef HDMERGE__MAP_MODEL_HPP_
#define HDMERGE__MAP_MODEL_HPP_

#include "hdmerge/errors.hpp"
#include "hdmerge/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hdmerge
{

using ElementId = std::int64_t;

struct MapPoint
{
  ElementId id{0};
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

enum class LineType { solid, dashed, virtual_line, other };

std::string_view to_string(LineType type);

struct LineString
{
  ElementId id{0};
  std::vector<ElementId> point_ids;
  LineType line_type{LineType::other};
};

/// Atomic drivable lane segment. Boundaries are stored resampled to a common vertex count
/// (max(vertex counts, 50)) and oriented along the direction of travel; the centerline is the
/// pointwise mean of the two.
struct Lanelet
{
  ElementId id{0};
  ElementId left_id{0};
  ElementId right_id{0};
  std::vector<Vec2> left;
  std::vector<Vec2> right;
  std::vector<Vec2> centerline;
  std::vector<double> centerline_arc;
  double length{0.0};
  Vec2 bbox_min;
  Vec2 bbox_max;
};

struct LanePosition
{
  ElementId lanelet_id{0};
  double s{0.0};               ///< arc length from the lanelet start
  double lateral_offset{0.0};  ///< positive toward the left boundary
};

/// Immutable after construction; safe for concurrent reads.
class LaneletMap
{
public:
  LaneletMap() = default;
  LaneletMap(
    std::map<ElementId, MapPoint> points, std::map<ElementId, LineString> linestrings,
    std::vector<std::pair<ElementId, std::pair<ElementId, ElementId>>> lanelet_bounds,
    bool georeferenced);

  const std::map<ElementId, MapPoint> & points() const { return points_; }
  const std::map<ElementId, LineString> & linestrings() const { return linestrings_; }
  const std::map<ElementId, Lanelet> & lanelets() const { return lanelets_; }

  bool has_lanelet(ElementId id) const { return lanelets_.count(id) > 0; }
  const Lanelet & lanelet(ElementId id) const;

  /// True when points came from projected lat/lon and still need the recording origin removed.
  bool georeferenced() const { return georeferenced_; }

  /// Copy with every point shifted by -offset (recording origin alignment).
  LaneletMap translated(const Vec2 & offset) const;

  /// Lanelet whose boundary strip contains (x, y) and whose tangent best matches heading
  /// (radians; NaN to ignore). Ties break toward the smaller |offset|, then lower id.
  std::optional<LanePosition> locate(double x, double y, double heading) const;

  /// Like locate() but restricted to the given candidate ids.
  std::optional<LanePosition> locate_among(
    std::span<const ElementId> candidates, double x, double y, double heading) const;

  /// Projection of (x, y) onto a specific lanelet's centerline, no containment check.
  LanePosition project(ElementId lanelet_id, double x, double y) const;

  bool contains(ElementId lanelet_id, double x, double y) const;

private:
  std::map<ElementId, MapPoint> points_;
  std::map<ElementId, LineString> linestrings_;
  std::map<ElementId, Lanelet> lanelets_;
  std::vector<std::pair<ElementId, std::pair<ElementId, ElementId>>> bounds_;
  bool georeferenced_{false};
};

/// Parse lanelet2 OSM XML. Node coordinates come from the `local_x`/`local_y`/`ele` tags when
/// present, otherwise lat/lon are projected to UTM.
LaneletMap parse_lanelet2(std::string_view xml);
LaneletMap load_lanelet2_file(const std::filesystem::path & path);

/// OSM XML with `local_x`/`local_y`/`ele` node tags; parse_lanelet2 reads it back losslessly.
std::string serialize_lanelet2(const LaneletMap & map);

/// WGS84 -> UTM easting/northing (zone picked from longitude).
Vec2 project_utm(double lat_deg, double lon_deg);

// ---------------------------------------------------------------------------------------------
// Merging-area layout

inline constexpr int kAreaCount = 5;

struct LocationLayoutConfig
{
  int location_id{0};
  std::array<std::vector<ElementId>, kAreaCount + 1> area_lanelets;   // index 1..5
  std::array<std::vector<double>, kAreaCount + 1> expected_lengths;   // optional, per lanelet
  std::vector<ElementId> inner_lanelets;
  std::vector<ElementId> exit_lanelets;
};

struct LayoutConfig
{
  double length_tolerance{0.15};
  std::map<int, LocationLayoutConfig> locations;
};

/// Key-value layout file: `location.<id>.area<k> = id,id,...`,
/// `location.<id>.area<k>.length = m,m,...`, `location.<id>.inner = ...`,
/// `location.<id>.exit = ...`, `length_tolerance = m`. '#' starts a comment.
LayoutConfig parse_layout_config(std::string_view text);
LayoutConfig load_layout_config(const std::filesystem::path & path);
std::string format_layout_config(const LayoutConfig & config);

enum AreaBit : unsigned {
  kArea1 = 1u << 1,
  kArea2 = 1u << 2,
  kArea3 = 1u << 3,
  kArea4 = 1u << 4,
  kArea5 = 1u << 5,
  kInner = 1u << 6,
  kExit = 1u << 7,
};

struct MergingAreaLayout
{
  int location_id{0};
  std::array<std::vector<ElementId>, kAreaCount + 1> area_lanelets;
  std::array<double, kAreaCount + 1> area_length{};
  std::vector<ElementId> inner_lanelets;
  std::vector<ElementId> exit_lanelets;
  double merge_window_length{0.0};

  /// Bitmask of AreaBit values the lanelet belongs to (0 when unlabeled).
  unsigned areas_of(ElementId lanelet_id) const;
  bool in_area(ElementId lanelet_id, int area) const;

  /// Ordered lanelet chain for a set of areas, e.g. {2, 3} or {4, 5}.
  std::vector<ElementId> chain(std::span<const int> areas) const;

  std::map<ElementId, unsigned> membership;
  std::map<ElementId, double> lanelet_length;
};

MergingAreaLayout load_layout(
  const LaneletMap & map, const LocationLayoutConfig & config, double length_tolerance,
  Diagnostics & diagnostics);

/// Layout built from the configured per-lanelet lengths alone (no map geometry).
MergingAreaLayout layout_from_config(const LocationLayoutConfig & config);

/// s plus the summed lengths of all upstream lanelets of the chain formed by `areas`.
double longitudinal_chain_coordinate(
  const MergingAreaLayout & layout, std::span<const int> areas, const LanePosition & position);

/// Continuous longitudinal axis through a lanelet chain, for projecting arbitrary points.
class ChainAxis
{
public:
  ChainAxis() = default;
  static ChainAxis from_centerlines(const LaneletMap & map, std::span<const ElementId> chain);
  static ChainAxis from_left_boundaries(const LaneletMap & map, std::span<const ElementId> chain);

  PolylineProjection project(const Vec2 & p) const;
  double length() const { return arc_.empty() ? 0.0 : arc_.back(); }
  bool empty() const { return points_.size() < 2; }

private:
  std::vector<Vec2> points_;
  std::vector<double> arc_;
};

}  // namespace hdmerge

#endif  // HDMERGE__MAP_MODEL_HPP_
