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

#include "hdmerge/macroscopic.hpp"

#include "hdmerge/csv.hpp"

#include <array>
#include <sstream>

namespace hdmerge
{

EdieEstimate edie_from_occupancy(
  std::span<const VehicleOccupancy> vehicles, double length, FrameIndex frames, double timestep)
{
  if (!(length > 0.0) || frames <= 0) {
    throw DomainError("space-time region must have positive length and duration");
  }
  EdieEstimate e;
  e.area = length * static_cast<double>(frames) * timestep;
  long long frames_inside = 0;
  for (const auto & veh : vehicles) {
    const std::size_t n = veh.s.size();
    bool any = false;
    std::size_t k = 0;
    while (k < n) {
      if (!veh.inside[k]) {
        ++k;
        continue;
      }
      const std::size_t start = k;
      while (k < n && veh.inside[k]) {
        ++k;
      }
      const std::size_t last = k - 1;
      double end;
      if (last + 1 < n) {
        end = veh.s[last + 1];
      } else if (veh.s_after) {
        end = *veh.s_after;
      } else if (last > 0) {
        end = veh.s[last] + (veh.s[last] - veh.s[last - 1]);
      } else {
        end = veh.s[last];
      }
      e.total_distance += end - veh.s[start];
      frames_inside += static_cast<long long>(k - start);
      any = true;
    }
    e.n_vehicles += any ? 1 : 0;
  }
  e.total_time = static_cast<double>(frames_inside) * timestep;
  e.q = e.total_distance / e.area;
  e.k = e.total_time / e.area;
  if (e.total_time > 0.0) {
    e.v = e.total_distance / e.total_time;
  }
  return e;
}

EdieEstimate edie_estimate(const RecordingIndex & index, const SpaceTimeRegion & region)
{
  const auto & tracks = index.recording().tracks;
  std::vector<VehicleOccupancy> occupancy;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto & frames = tracks[i].frames;
    const FrameIndex lo = std::max(region.t0, frames.front().frame);
    const FrameIndex hi = std::min(region.t1, frames.back().frame + 1);
    if (lo >= hi) {
      continue;
    }
    bool any = false;
    for (FrameIndex f = lo; f < hi && !any; ++f) {
      any = (index.mask(i, f) & region.area_bits) != 0u;
    }
    if (!any) {
      continue;
    }
    // Frames of the window before the track starts are simply outside.
    VehicleOccupancy occ;
    occ.s.reserve(static_cast<std::size_t>(hi - lo));
    for (FrameIndex f = lo; f < hi; ++f) {
      occ.s.push_back(index.chain_s(i, f));
      occ.inside.push_back((index.mask(i, f) & region.area_bits) != 0u);
    }
    if (hi <= frames.back().frame) {
      occ.s_after = index.chain_s(i, hi);
    }
    occupancy.push_back(std::move(occ));
  }
  return edie_from_occupancy(occupancy, region.length, region.t1 - region.t0, region.timestep);
}

EventMacro event_macro(const MergingEvent & event, const RecordingIndex & index)
{
  const auto & layout = index.context().layout;
  const double dt = index.recording().meta.timestep;
  EventMacro m;
  m.event_id = event.id();
  m.recording_id = event.recording_id;
  m.location_id = event.location_id;
  m.track_id = event.track_id;
  m.vehicle_class = event.vehicle_class;
  auto region = [&](int area, unsigned bit) {
    SpaceTimeRegion r;
    r.lanelet_chain = layout.area_lanelets[static_cast<std::size_t>(area)];
    r.area_bits = bit;
    r.length = layout.area_length[static_cast<std::size_t>(area)];
    r.t0 = event.t_B;
    r.t1 = event.t_F;
    r.timestep = dt;
    return r;
  };
  m.upstream = region(4, kArea4);
  m.downstream = region(5, kArea5);
  if (m.upstream.length > 0.0 && m.upstream.t1 > m.upstream.t0) {
    m.upstream_estimate = edie_estimate(index, m.upstream);
  }
  if (m.downstream.t1 > m.downstream.t0) {
    m.downstream_estimate = edie_estimate(index, m.downstream);
  }
  return m;
}

std::string serialize_macro(std::span<const EventMacro> rows)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"event_id", "recording_id", "location_id", "track_id", "class", "region", "length_m", "t0",
     "t1", "area_m_s", "distance_m", "time_s", "n_vehicles", "q_veh_s", "q_veh_h", "k_veh_m",
     "k_veh_km", "v_m_s", "v_km_h"});
  auto opt = [](const std::optional<double> & v) {
    return v ? csv::format_double(*v) : std::string{};
  };
  for (const auto & m : rows) {
    const std::array<std::pair<const char *, std::pair<const SpaceTimeRegion *, const EdieEstimate *>>, 2>
      parts = {{{"upstream", {&m.upstream, &m.upstream_estimate}},
                {"downstream", {&m.downstream, &m.downstream_estimate}}}};
    for (const auto & [name, p] : parts) {
      const auto & r = *p.first;
      const auto & e = *p.second;
      w.row(
        {m.event_id, std::to_string(m.recording_id), std::to_string(m.location_id),
         std::to_string(m.track_id), std::string(to_string(m.vehicle_class)), name,
         csv::format_double(r.length), std::to_string(r.t0), std::to_string(r.t1),
         csv::format_double(e.area), csv::format_double(e.total_distance),
         csv::format_double(e.total_time), std::to_string(e.n_vehicles), csv::format_double(e.q),
         csv::format_double(e.q_veh_per_hour()), csv::format_double(e.k),
         csv::format_double(e.k_veh_per_km()), opt(e.v), opt(e.v_km_per_hour())});
    }
  }
  return out.str();
}

}  // namespace hdmerge
