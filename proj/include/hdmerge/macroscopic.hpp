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

#ifndef HDMERGE__MACROSCOPIC_HPP_
#define HDMERGE__MACROSCOPIC_HPP_

#include "hdmerge/event_extraction.hpp"
#include "hdmerge/recording_index.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hdmerge
{

/// Space-time rectangle: a lanelet chain of length L over frames [t0, t1).
struct SpaceTimeRegion
{
  std::vector<ElementId> lanelet_chain;
  unsigned area_bits{0};  ///< membership test applied to each frame's assigned lanelet
  double length{0.0};
  FrameIndex t0{0};
  FrameIndex t1{0};
  double timestep{0.04};

  double duration() const { return static_cast<double>(t1 - t0) * timestep; }
  double area_measure() const { return length * duration(); }
};

struct EdieEstimate
{
  double total_distance{0.0};  ///< d(A), meters
  double total_time{0.0};      ///< t(A), seconds
  double area{0.0};            ///< |A|, m*s
  double q{0.0};               ///< veh/s
  double k{0.0};               ///< veh/m
  std::optional<double> v;     ///< m/s; empty when t(A) = 0
  int n_vehicles{0};

  double q_veh_per_hour() const { return q * 3600.0; }
  double k_veh_per_km() const { return k * 1000.0; }
  std::optional<double> v_km_per_hour() const
  {
    return v ? std::optional<double>(*v * 3.6) : std::nullopt;
  }
};

/// Per-frame presence of one vehicle over [t0, t1): chain coordinate and membership for each
/// frame, plus the coordinate one frame past the window when the vehicle still exists.
struct VehicleOccupancy
{
  std::vector<double> s;
  std::vector<char> inside;
  std::optional<double> s_after;
};

/// Edie flow, density and speed from per-frame occupancy. A frame inside the region contributes one timestep and
/// its forward chain displacement (backward at the end of a track).
EdieEstimate edie_from_occupancy(
  std::span<const VehicleOccupancy> vehicles, double length, FrameIndex frames, double timestep);

/// Edie estimate over every track of the indexed recording (any class, any route).
EdieEstimate edie_estimate(const RecordingIndex & index, const SpaceTimeRegion & region);

struct EventMacro
{
  std::string event_id;
  int recording_id{0};
  int location_id{0};
  TrackId track_id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  SpaceTimeRegion upstream;
  SpaceTimeRegion downstream;
  EdieEstimate upstream_estimate;
  EdieEstimate downstream_estimate;
};

/// Area 4 (upstream) and Area 5 (downstream) over [t_B, t_F).
EventMacro event_macro(const MergingEvent & event, const RecordingIndex & index);

std::string serialize_macro(std::span<const EventMacro> rows);

}  // namespace hdmerge

#endif  // HDMERGE__MACROSCOPIC_HPP_
