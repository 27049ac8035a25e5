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

#include "hdmerge/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace hdmerge
{

namespace
{

constexpr unsigned kRampBits = kArea1 | kArea2 | kArea3;
constexpr unsigned kMainBits = kArea4 | kArea5;

bool is_ramp(unsigned m) { return (m & kRampBits) && !(m & kMainBits); }

bool is_mainline(unsigned m) { return (m & (kMainBits | kInner)) && !(m & kRampBits); }

unsigned mask_of(const TrackFrame & f, const MergingAreaLayout & layout)
{
  return f.lanelet_id ? layout.areas_of(*f.lanelet_id) : 0u;
}

std::string opt_frame(const std::optional<FrameIndex> & f)
{
  return f ? std::to_string(*f) : std::string{};
}

std::optional<FrameIndex> parse_opt_frame(std::string_view cell, std::size_t line)
{
  return csv::parse_optional_int(cell, line);
}

}  // namespace

std::string_view to_string(RouteClass route)
{
  switch (route) {
    case RouteClass::mainline:
      return "mainline";
    case RouteClass::on_ramp_merging:
      return "on_ramp_merging";
    case RouteClass::off_ramp:
      return "off_ramp";
    case RouteClass::other:
      break;
  }
  return "other";
}

std::string MergingEvent::id() const
{
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%d-%lld", recording_id, static_cast<long long>(track_id));
  return buf;
}

RouteClass classify_route(const Track & track, const MergingAreaLayout & layout)
{
  bool seen_ramp = false;
  bool seen_main = false;
  bool seen_exit = false;
  bool ramp_then_main = false;
  bool main_then_exit = false;
  for (const auto & f : track.frames) {
    const unsigned m = mask_of(f, layout);
    if (m == 0u) {
      continue;
    }
    const bool exit = (m & kExit) != 0u;
    const bool ramp = !exit && is_ramp(m);
    const bool main = !exit && is_mainline(m);
    if (exit) {
      seen_exit = true;
      main_then_exit = main_then_exit || seen_main;
    } else if (ramp) {
      seen_ramp = true;
    } else if (main) {
      seen_main = true;
      ramp_then_main = ramp_then_main || seen_ramp;
    }
  }
  if (ramp_then_main) {
    return RouteClass::on_ramp_merging;
  }
  if (main_then_exit) {
    return RouteClass::off_ramp;
  }
  if (seen_main && !seen_ramp && !seen_exit) {
    return RouteClass::mainline;
  }
  return RouteClass::other;
}

KeyPositionResult detect_key_positions(
  const Track & track, const Recording & recording, const LocationContext & context,
  const ExtractionParams & params, Diagnostics & diagnostics)
{
  const auto & layout = context.layout;
  const auto & frames = track.frames;
  const auto n = static_cast<std::ptrdiff_t>(frames.size());
  const std::ptrdiff_t lookback = std::max(1, params.lookback);

  KeyPositionResult result;
  auto reject = [&](std::string reason, std::string detail) {
    result.rejection = Rejection{
      recording.meta.recording_id, recording.meta.location_id, track.meta.track_id,
      track.meta.vehicle_class, std::move(reason), std::move(detail)};
    return result;
  };

  std::vector<unsigned> masks(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    masks[i] = mask_of(frames[i], layout);
  }
  auto offset = [&](std::ptrdiff_t i) { return frames[static_cast<std::size_t>(i)].lat_lane_center_offset; };

  // F: first confirmed switch from a ramp lanelet onto the outer mainline.
  std::ptrdiff_t f_idx = -1;
  for (std::ptrdiff_t i = 1; i < n && f_idx < 0; ++i) {
    const unsigned m = masks[i];
    if (!((m & kMainBits) && !(m & kRampBits)) || !is_ramp(masks[i - 1])) {
      continue;
    }
    if (i < lookback) {
      continue;
    }
    bool confirmed = true;
    for (std::ptrdiff_t k = i - lookback; k < i; ++k) {
      confirmed = confirmed && is_ramp(masks[k]);
    }
    if (confirmed) {
      f_idx = i;
    }
  }
  if (f_idx < 0) {
    return reject("missing_position_f", "no confirmed ramp-to-mainline switch");
  }

  std::ptrdiff_t b_idx = -1;
  std::ptrdiff_t d_idx = -1;
  for (std::ptrdiff_t i = 0; i < f_idx; ++i) {
    if (b_idx < 0 && (masks[i] & kArea1)) {
      b_idx = i;
    }
    if (d_idx < 0 && (masks[i] & kArea2) && is_ramp(masks[i])) {
      d_idx = i;
    }
  }
  if (b_idx < 0) {
    return reject("missing_position_b", "track never assigned to an Area 1 lanelet before F");
  }
  const unsigned source = masks[f_idx - 1];
  const bool crossed_solid = d_idx < 0 || ((source & kArea1) && !(source & (kArea2 | kArea3)));
  if (!crossed_solid && b_idx > d_idx) {
    return reject("inconsistent_positions", "position B follows position D");
  }

  MergingEvent ev;
  ev.recording_id = recording.meta.recording_id;
  ev.location_id = recording.meta.location_id;
  ev.track_id = track.meta.track_id;
  ev.vehicle_class = track.meta.vehicle_class;
  const FrameIndex first = frames.front().frame;
  ev.t_B = first + b_idx;
  ev.t_F = first + f_idx;
  ev.crossed_solid = crossed_solid;
  if (!crossed_solid) {
    ev.t_D = first + d_idx;
  }

  // Cross-check against the sign jump of the lane-center offset.
  if (std::isfinite(offset(f_idx - 1)) && std::isfinite(offset(f_idx))) {
    const std::ptrdiff_t reach = 4 * lookback;
    std::ptrdiff_t nearest = -1;
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(1, f_idx - reach);
         i <= std::min(n - 1, f_idx + reach); ++i) {
      if (offset(i - 1) > 0.0 && offset(i) < 0.0 &&
          (nearest < 0 || std::abs(i - f_idx) < std::abs(nearest - f_idx))) {
        nearest = i;
      }
    }
    if (nearest < 0 || std::abs(nearest - f_idx) > params.offset_jump_tolerance) {
      diagnostics.warn(
        "extract", "offset_jump_disagreement",
        "event " + ev.id() + ": lanelet switch at frame " + std::to_string(ev.t_F) +
          (nearest < 0 ? std::string(" has no offset sign jump nearby")
                       : " but offset sign jump at frame " + std::to_string(first + nearest)));
    }
  }

  // E: start of the final strictly increasing offset run before F.
  {
    const std::ptrdiff_t floor_idx = crossed_solid ? b_idx : d_idx;
    std::ptrdiff_t e = f_idx - 1;
    while (e - 1 >= floor_idx && std::isfinite(offset(e)) && std::isfinite(offset(e - 1)) &&
           offset(e) > offset(e - 1)) {
      --e;
    }
    if (f_idx - 1 - e >= lookback) {
      ev.t_E = first + e;
    }
  }

  // G: whole body on the mainline side of the ramp boundary.
  if (!context.boundary_axis.empty()) {
    const double half_width = 0.5 * track.meta.width;
    for (std::ptrdiff_t i = f_idx; i < n; ++i) {
      if (context.boundary_offset(frames[static_cast<std::size_t>(i)].center) >= half_width) {
        ev.t_G = first + i;
        break;
      }
    }
  }

  // H: subsequent change from the outer to the inner mainline lane.
  if (!layout.inner_lanelets.empty()) {
    for (std::ptrdiff_t i = f_idx + 1; i < n && !ev.t_H; ++i) {
      if (!(masks[i] & kInner) || i - lookback < f_idx) {
        continue;
      }
      bool confirmed = true;
      for (std::ptrdiff_t k = i - lookback; k < i; ++k) {
        confirmed = confirmed && !(masks[k] & kInner) && frames[static_cast<std::size_t>(k)].lanelet_id;
      }
      if (confirmed) {
        ev.t_H = first + i;
      }
    }
  } else {
    const bool use_flags = recording.fields.lane_change;
    std::ptrdiff_t last_kept = f_idx;
    for (std::ptrdiff_t i = f_idx + 1; i < n; ++i) {
      const auto & prev = frames[static_cast<std::size_t>(i - 1)];
      const auto & cur = frames[static_cast<std::size_t>(i)];
      const bool switched = prev.lanelet_id && cur.lanelet_id && *prev.lanelet_id != *cur.lanelet_id;
      const double a = offset(i - 1);
      const double b = offset(i);
      if (!switched || !(a > 0.0 && b < 0.0 && a - b > params.min_lane_jump)) {
        continue;
      }
      if (use_flags) {
        bool flagged = false;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, i - lookback);
             k <= std::min(n - 1, i + lookback); ++k) {
          flagged = flagged || frames[static_cast<std::size_t>(k)].lane_change_flag;
        }
        if (!flagged) {
          continue;
        }
      }
      if (i - last_kept <= lookback) {
        last_kept = i;
        continue;
      }
      ev.t_H = first + i;
      break;
    }
  }

  result.event = ev;
  return result;
}

ExtractionResult extract_events(
  const Recording & recording, const LocationContext & context, const ExtractionParams & params,
  Diagnostics & diagnostics)
{
  ExtractionResult out;
  out.routes.reserve(recording.tracks.size());
  for (const auto & track : recording.tracks) {
    const auto route = classify_route(track, context.layout);
    out.routes.push_back({track.meta.track_id, route});
    if (route != RouteClass::on_ramp_merging) {
      continue;
    }
    auto r = detect_key_positions(track, recording, context, params, diagnostics);
    if (r.event) {
      out.events.push_back(std::move(*r.event));
    } else if (r.rejection) {
      out.rejections.push_back(std::move(*r.rejection));
    }
  }
  return out;
}

std::vector<SolidLineCount> count_solid_line_merges(
  std::span<const MergingEvent> events, std::span<const int> locations)
{
  std::map<std::pair<int, int>, int> counts;
  for (const int loc : locations) {
    for (const auto c : {VehicleClass::car, VehicleClass::truck, VehicleClass::van}) {
      counts[{loc, static_cast<int>(c)}] += 0;
    }
  }
  for (const auto & e : events) {
    if (e.crossed_solid) {
      for (const auto c : {VehicleClass::car, VehicleClass::truck, VehicleClass::van}) {
        counts[{e.location_id, static_cast<int>(c)}] += 0;
      }
      counts[{e.location_id, static_cast<int>(e.vehicle_class)}] += 1;
    }
  }
  std::vector<SolidLineCount> rows;
  for (const auto & [key, count] : counts) {
    const auto cls = static_cast<VehicleClass>(key.second);
    if (cls == VehicleClass::other && count == 0) {
      continue;
    }
    rows.push_back({key.first, cls, count});
  }
  return rows;
}

std::string serialize_events(std::span<const MergingEvent> events)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"event_id", "recording_id", "location_id", "track_id", "class", "t_B", "t_D", "t_E", "t_F",
     "t_G", "t_H", "crossed_solid"});
  for (const auto & e : events) {
    w.row(
      {e.id(), std::to_string(e.recording_id), std::to_string(e.location_id),
       std::to_string(e.track_id), std::string(to_string(e.vehicle_class)), std::to_string(e.t_B),
       opt_frame(e.t_D), opt_frame(e.t_E), std::to_string(e.t_F), opt_frame(e.t_G),
       opt_frame(e.t_H), e.crossed_solid ? "1" : "0"});
  }
  return out.str();
}

std::vector<MergingEvent> parse_events(std::string text)
{
  csv::Reader reader(std::move(text));
  reader.read_header();
  const auto c_rec = reader.require("recording_id");
  const auto c_loc = reader.require("location_id");
  const auto c_track = reader.require("track_id");
  const auto c_class = reader.require("class");
  const auto c_b = reader.require("t_B");
  const auto c_d = reader.require("t_D");
  const auto c_e = reader.require("t_E");
  const auto c_f = reader.require("t_F");
  const auto c_g = reader.require("t_G");
  const auto c_h = reader.require("t_H");
  const auto c_solid = reader.require("crossed_solid");
  std::vector<MergingEvent> events;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    if (f.size() < reader.header().size()) {
      throw ParseError("events row has too few fields", line);
    }
    MergingEvent e;
    e.recording_id = static_cast<int>(csv::parse_int(f[c_rec], line));
    e.location_id = static_cast<int>(csv::parse_int(f[c_loc], line));
    e.track_id = csv::parse_int(f[c_track], line);
    e.vehicle_class = vehicle_class_from_string(f[c_class]);
    e.t_B = csv::parse_int(f[c_b], line);
    e.t_D = parse_opt_frame(f[c_d], line);
    e.t_E = parse_opt_frame(f[c_e], line);
    e.t_F = csv::parse_int(f[c_f], line);
    e.t_G = parse_opt_frame(f[c_g], line);
    e.t_H = parse_opt_frame(f[c_h], line);
    e.crossed_solid = csv::parse_int(f[c_solid], line) != 0;
    events.push_back(e);
  }
  return events;
}

std::string serialize_rejections(std::span<const Rejection> rejections)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"recording_id", "location_id", "track_id", "class", "reason", "detail"});
  for (const auto & r : rejections) {
    w.row(
      {std::to_string(r.recording_id), std::to_string(r.location_id), std::to_string(r.track_id),
       std::string(to_string(r.vehicle_class)), r.reason, r.detail});
  }
  return out.str();
}

}  // namespace hdmerge
