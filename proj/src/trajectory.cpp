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

#include "hdmerge/trajectory.hpp"

#include "hdmerge/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>
#include <unordered_map>

namespace hdmerge
{

namespace
{

constexpr std::array<const char *, kNeighborSlots> kNeighborColumns = {
  "leadId",          "rearId",           "leftLeadId", "rightLeadId",
  "leftAlongsideId", "rightAlongsideId", "leftRearId", "rightRearId",
};

std::vector<std::string_view> split_multi(std::string_view cell)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= cell.size()) {
    const auto sep = cell.find(';', start);
    const auto end = sep == std::string_view::npos ? cell.size() : sep;
    auto part = cell.substr(start, end - start);
    while (!part.empty() && part.front() == ' ') {
      part.remove_prefix(1);
    }
    while (!part.empty() && part.back() == ' ') {
      part.remove_suffix(1);
    }
    if (!part.empty()) {
      out.push_back(part);
    }
    if (sep == std::string_view::npos) {
      break;
    }
    start = sep + 1;
  }
  return out;
}

std::optional<TrackId> parse_neighbor(std::string_view cell, std::size_t line)
{
  const auto v = csv::parse_optional_int(cell, line);
  if (!v || *v <= 0) {
    return std::nullopt;
  }
  return v;
}

std::string join_ids(const std::vector<ElementId> & ids)
{
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    s += (i ? ";" : "") + std::to_string(ids[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double> & values)
{
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += (i ? ";" : "") + csv::format_double(values[i]);
  }
  return s;
}

std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RecordingMeta parse_recording_meta_text(std::string text)
{
  csv::Reader reader(std::move(text));
  reader.read_header();
  const auto c_rec = reader.require("recordingId");
  const auto c_loc = reader.require("locationId");
  const auto c_rate = reader.require("frameRate");
  const auto c_ux = reader.column("xUtmOrigin");
  const auto c_uy = reader.column("yUtmOrigin");
  std::vector<std::string_view> f;
  if (!reader.next(f)) {
    throw IntegrityError("recordingMeta has no data row");
  }
  const auto line = reader.line();
  if (f.size() < reader.header().size()) {
    throw ParseError("recordingMeta row has too few fields", line);
  }
  RecordingMeta meta;
  meta.recording_id = static_cast<int>(csv::parse_int(f[c_rec], line));
  meta.location_id = static_cast<int>(csv::parse_int(f[c_loc], line));
  meta.frame_rate = csv::parse_double(f[c_rate], line);
  if (!(meta.frame_rate > 0.0)) {
    throw IntegrityError("recordingMeta frameRate must be positive");
  }
  meta.timestep = 1.0 / meta.frame_rate;
  if (c_ux && c_uy) {
    const double ox = csv::parse_double(f[*c_ux], line);
    const double oy = csv::parse_double(f[*c_uy], line);
    meta.origin_offset = {std::isnan(ox) ? 0.0 : ox, std::isnan(oy) ? 0.0 : oy};
  }
  return meta;
}

}  // namespace

std::string_view to_string(VehicleClass c)
{
  switch (c) {
    case VehicleClass::car:
      return "car";
    case VehicleClass::truck:
      return "truck";
    case VehicleClass::van:
      return "van";
    case VehicleClass::other:
      break;
  }
  return "other";
}

VehicleClass vehicle_class_from_string(std::string_view s)
{
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  if (lower == "car") {
    return VehicleClass::car;
  }
  if (lower == "truck") {
    return VehicleClass::truck;
  }
  if (lower == "van") {
    return VehicleClass::van;
  }
  return VehicleClass::other;
}

double TrackFrame::heading_rad() const { return heading_deg * std::numbers::pi / 180.0; }

const Track * Recording::find(TrackId id) const
{
  const auto it = std::lower_bound(
    tracks.begin(), tracks.end(), id,
    [](const Track & t, TrackId v) { return t.meta.track_id < v; });
  return it != tracks.end() && it->meta.track_id == id ? &*it : nullptr;
}

Recording parse_recording(
  std::string recording_csv, std::string tracks_meta_csv, std::string tracks_csv,
  const LaneletMap * map)
{
  Recording rec;
  rec.meta = parse_recording_meta_text(std::move(recording_csv));

  // tracksMeta
  std::unordered_map<TrackId, std::size_t> index;
  {
    csv::Reader reader(std::move(tracks_meta_csv));
    reader.read_header();
    const auto c_id = reader.require("trackId");
    const auto c_first = reader.require("initialFrame");
    const auto c_last = reader.require("finalFrame");
    const auto c_class = reader.require("class");
    const auto c_width = reader.require("width");
    const auto c_length = reader.require("length");
    std::vector<std::string_view> f;
    while (reader.next(f)) {
      const auto line = reader.line();
      if (f.size() < reader.header().size()) {
        throw ParseError("tracksMeta row has too few fields", line);
      }
      TrackMeta m;
      m.track_id = csv::parse_int(f[c_id], line);
      m.first_frame = csv::parse_int(f[c_first], line);
      m.last_frame = csv::parse_int(f[c_last], line);
      m.vehicle_class = vehicle_class_from_string(f[c_class]);
      m.width = csv::parse_double(f[c_width], line);
      m.length = csv::parse_double(f[c_length], line);
      if (m.first_frame > m.last_frame) {
        throw IntegrityError("track " + std::to_string(m.track_id) + ": initialFrame > finalFrame");
      }
      if (!(m.length > 0.0) || !(m.width > 0.0)) {
        throw IntegrityError("track " + std::to_string(m.track_id) + ": non-positive dimensions");
      }
      if (index.count(m.track_id)) {
        throw IntegrityError("duplicate track id " + std::to_string(m.track_id) + " in tracksMeta");
      }
      index.emplace(m.track_id, rec.tracks.size());
      Track t;
      t.meta = m;
      t.frames.reserve(static_cast<std::size_t>(m.last_frame - m.first_frame + 1));
      rec.tracks.push_back(std::move(t));
    }
  }

  // tracks
  csv::Reader reader(std::move(tracks_csv));
  reader.read_header();
  const auto c_id = reader.require("trackId");
  const auto c_frame = reader.require("frame");
  const auto c_x = reader.require("xCenter");
  const auto c_y = reader.require("yCenter");
  const auto c_heading = reader.column("heading");
  const auto c_vx = reader.column("xVelocity");
  const auto c_vy = reader.column("yVelocity");
  const auto c_ax = reader.column("xAcceleration");
  const auto c_ay = reader.column("yAcceleration");
  const auto c_lanelet = reader.column("laneletId");
  const auto c_offset = reader.column("latLaneCenterOffset");
  const auto c_lc = reader.column("laneChange");
  std::array<std::optional<std::size_t>, kNeighborSlots> c_nb;
  bool any_neighbor = false;
  for (std::size_t i = 0; i < kNeighborSlots; ++i) {
    c_nb[i] = reader.column(kNeighborColumns[i]);
    any_neighbor = any_neighbor || c_nb[i].has_value();
  }
  rec.fields.heading = c_heading.has_value();
  rec.fields.velocity = c_vx && c_vy;
  rec.fields.acceleration = c_ax && c_ay;
  rec.fields.lanelet = c_lanelet.has_value();
  rec.fields.offset = c_offset.has_value();
  rec.fields.lane_change = c_lc.has_value();
  rec.fields.neighbors = any_neighbor;

  std::vector<std::string_view> f;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  while (reader.next(f)) {
    const auto line = reader.line();
    if (f.size() < reader.header().size()) {
      throw ParseError("tracks row has too few fields", line);
    }
    const TrackId id = csv::parse_int(f[c_id], line);
    const auto it = index.find(id);
    if (it == index.end()) {
      throw IntegrityError("track " + std::to_string(id) + " has rows but no tracksMeta entry");
    }
    TrackFrame fr;
    fr.frame = csv::parse_int(f[c_frame], line);
    fr.center = {csv::parse_double(f[c_x], line), csv::parse_double(f[c_y], line)};
    if (!std::isfinite(fr.center.x) || !std::isfinite(fr.center.y)) {
      throw IntegrityError(
        "track " + std::to_string(id) + " frame " + std::to_string(fr.frame) +
        ": non-finite position");
    }
    fr.heading_deg = c_heading ? csv::parse_double(f[*c_heading], line) : nan;
    if (rec.fields.velocity) {
      fr.velocity = {csv::parse_double(f[*c_vx], line), csv::parse_double(f[*c_vy], line)};
    }
    if (rec.fields.acceleration) {
      fr.acceleration = {csv::parse_double(f[*c_ax], line), csv::parse_double(f[*c_ay], line)};
    }
    if (c_lanelet) {
      for (const auto part : split_multi(f[*c_lanelet])) {
        fr.lanelet_candidates.push_back(csv::parse_int(part, line));
      }
    }
    if (c_offset) {
      for (const auto part : split_multi(f[*c_offset])) {
        fr.offset_candidates.push_back(csv::parse_double(part, line));
      }
    }
    fr.lat_lane_center_offset = nan;
    if (c_lc) {
      const auto v = csv::parse_optional_int(f[*c_lc], line);
      fr.lane_change_flag = v && *v != 0;
    }
    for (std::size_t i = 0; i < kNeighborSlots; ++i) {
      if (c_nb[i]) {
        fr.neighbors[i] = parse_neighbor(f[*c_nb[i]], line);
      }
    }
    rec.tracks[it->second].frames.push_back(std::move(fr));
  }

  for (auto & t : rec.tracks) {
    auto & frames = t.frames;
    if (frames.empty()) {
      throw IntegrityError("track " + std::to_string(t.meta.track_id) + " has no frames");
    }
    std::stable_sort(frames.begin(), frames.end(), [](const TrackFrame & a, const TrackFrame & b) {
      return a.frame < b.frame;
    });
    for (std::size_t i = 1; i < frames.size(); ++i) {
      if (frames[i].frame != frames[i - 1].frame + 1) {
        throw IntegrityError(
          "track " + std::to_string(t.meta.track_id) + " has non-contiguous frames (" +
          std::to_string(frames[i - 1].frame) + " -> " + std::to_string(frames[i].frame) + ")");
      }
    }
    const auto expected = t.meta.last_frame - t.meta.first_frame + 1;
    if (
      frames.front().frame != t.meta.first_frame ||
      static_cast<FrameIndex>(frames.size()) != expected) {
      throw IntegrityError(
        "track " + std::to_string(t.meta.track_id) +
        ": frame range does not match initialFrame/finalFrame");
    }

    for (auto & fr : frames) {
      const double heading = std::isnan(fr.heading_deg) ? nan : fr.heading_rad();
      if (!fr.lanelet_candidates.empty()) {
        std::size_t chosen = 0;
        if (map && fr.lanelet_candidates.size() > 1) {
          if (const auto pos = map->locate_among(
                fr.lanelet_candidates, fr.center.x, fr.center.y, heading)) {
            chosen = static_cast<std::size_t>(
              std::find(fr.lanelet_candidates.begin(), fr.lanelet_candidates.end(), pos->lanelet_id) -
              fr.lanelet_candidates.begin());
          }
        }
        fr.lanelet_id = fr.lanelet_candidates[chosen];
        if (chosen < fr.offset_candidates.size() &&
            fr.offset_candidates.size() == fr.lanelet_candidates.size()) {
          fr.lat_lane_center_offset = fr.offset_candidates[chosen];
        } else if (fr.offset_candidates.size() == 1) {
          fr.lat_lane_center_offset = fr.offset_candidates.front();
        } else if (map && map->has_lanelet(*fr.lanelet_id)) {
          fr.lat_lane_center_offset =
            map->project(*fr.lanelet_id, fr.center.x, fr.center.y).lateral_offset;
        }
      } else if (!c_lanelet && map) {
        if (const auto pos = map->locate(fr.center.x, fr.center.y, heading)) {
          fr.lanelet_id = pos->lanelet_id;
          fr.lat_lane_center_offset = pos->lateral_offset;
        }
      }
    }

    if (!rec.fields.velocity || !rec.fields.acceleration) {
      const auto saved_velocity = rec.fields.velocity;
      std::vector<Vec2> velocities;
      if (saved_velocity) {
        for (const auto & fr : frames) {
          velocities.push_back(fr.velocity);
        }
      }
      derive_kinematics(t, rec.meta.timestep);
      if (saved_velocity) {
        // keep provided velocities, derive acceleration from them
        for (std::size_t i = 0; i < frames.size(); ++i) {
          frames[i].velocity = velocities[i];
        }
        const double dt = rec.meta.timestep;
        const std::size_t n = frames.size();
        for (std::size_t i = 0; n >= 2 && i < n; ++i) {
          const std::size_t lo = i == 0 ? 0 : i - 1;
          const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
          frames[i].acceleration =
            (frames[hi].velocity - frames[lo].velocity) * (1.0 / (static_cast<double>(hi - lo) * dt));
        }
      }
    }
  }
  std::sort(rec.tracks.begin(), rec.tracks.end(), [](const Track & a, const Track & b) {
    return a.meta.track_id < b.meta.track_id;
  });
  return rec;
}

void derive_kinematics(Track & track, double timestep)
{
  auto & fr = track.frames;
  const std::size_t n = fr.size();
  if (n < 2) {
    track.kinematics_flagged = true;
    return;
  }
  const double dt = timestep;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      fr[i].velocity = (fr[1].center - fr[0].center) * (1.0 / dt);
    } else if (i + 1 == n) {
      fr[i].velocity = (fr[n - 1].center - fr[n - 2].center) * (1.0 / dt);
    } else {
      fr[i].velocity = (fr[i + 1].center - fr[i - 1].center) * (1.0 / (2.0 * dt));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (n >= 3 && i > 0 && i + 1 < n) {
      fr[i].acceleration =
        (fr[i + 1].center - fr[i].center * 2.0 + fr[i - 1].center) * (1.0 / (dt * dt));
    } else if (i == 0) {
      fr[i].acceleration = (fr[1].velocity - fr[0].velocity) * (1.0 / dt);
    } else {
      fr[i].acceleration = (fr[i].velocity - fr[i - 1].velocity) * (1.0 / dt);
    }
  }
  for (auto & f : fr) {
    if (std::isnan(f.heading_deg) && norm(f.velocity) > 0.0) {
      f.heading_deg = std::atan2(f.velocity.y, f.velocity.x) * 180.0 / std::numbers::pi;
    }
  }
}

std::vector<RecordingFiles> discover_recordings(const std::filesystem::path & dir)
{
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("data directory " + dir.string() + " does not exist");
  }
  static const std::regex pattern(R"((\d+)_recordingMeta\.csv)");
  std::vector<std::pair<long, RecordingFiles>> found;
  for (const auto & entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) {
      continue;
    }
    const auto prefix = m[1].str();
    RecordingFiles files{
      entry.path(), dir / (prefix + "_tracksMeta.csv"), dir / (prefix + "_tracks.csv")};
    if (!std::filesystem::exists(files.tracks_meta) || !std::filesystem::exists(files.tracks)) {
      throw ConfigError("recording " + prefix + " is missing its tracksMeta or tracks file");
    }
    found.emplace_back(std::stol(prefix), std::move(files));
  }
  std::sort(found.begin(), found.end(), [](const auto & a, const auto & b) {
    return a.first < b.first;
  });
  std::vector<RecordingFiles> out;
  for (auto & [id, files] : found) {
    out.push_back(std::move(files));
  }
  return out;
}

RecordingMeta load_recording_meta(const std::filesystem::path & path)
{
  return parse_recording_meta_text(read_file(path));
}

Recording load_recording(const RecordingFiles & files, const LaneletMap * map)
{
  return parse_recording(
    read_file(files.recording_meta), read_file(files.tracks_meta), read_file(files.tracks), map);
}

std::string serialize_recording_meta(const RecordingMeta & meta)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"recordingId", "locationId", "frameRate", "xUtmOrigin", "yUtmOrigin"});
  w.row(
    {std::to_string(meta.recording_id), std::to_string(meta.location_id),
     csv::format_double(meta.frame_rate), csv::format_double(meta.origin_offset.x),
     csv::format_double(meta.origin_offset.y)});
  return out.str();
}

std::string serialize_tracks_meta(const Recording & recording)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"recordingId", "trackId", "initialFrame", "finalFrame", "numFrames", "class", "width",
     "length"});
  for (const auto & t : recording.tracks) {
    w.row(
      {std::to_string(recording.meta.recording_id), std::to_string(t.meta.track_id),
       std::to_string(t.meta.first_frame), std::to_string(t.meta.last_frame),
       std::to_string(t.meta.last_frame - t.meta.first_frame + 1),
       std::string(to_string(t.meta.vehicle_class)), csv::format_double(t.meta.width),
       csv::format_double(t.meta.length)});
  }
  return out.str();
}

std::string serialize_tracks(const Recording & recording)
{
  std::ostringstream out;
  csv::Writer w(out);
  std::vector<std::string> header = {
    "recordingId",   "trackId",       "frame",     "xCenter",
    "yCenter",       "heading",       "xVelocity", "yVelocity",
    "xAcceleration", "yAcceleration", "laneletId", "latLaneCenterOffset",
    "laneChange"};
  for (const auto * c : kNeighborColumns) {
    header.emplace_back(c);
  }
  w.row(header);
  const auto rec_id = std::to_string(recording.meta.recording_id);
  std::vector<std::string> row(header.size());
  for (const auto & t : recording.tracks) {
    const auto tid = std::to_string(t.meta.track_id);
    for (const auto & fr : t.frames) {
      row[0] = rec_id;
      row[1] = tid;
      row[2] = std::to_string(fr.frame);
      row[3] = csv::format_double(fr.center.x);
      row[4] = csv::format_double(fr.center.y);
      row[5] = csv::format_double(fr.heading_deg);
      row[6] = csv::format_double(fr.velocity.x);
      row[7] = csv::format_double(fr.velocity.y);
      row[8] = csv::format_double(fr.acceleration.x);
      row[9] = csv::format_double(fr.acceleration.y);
      if (!fr.lanelet_candidates.empty()) {
        row[10] = join_ids(fr.lanelet_candidates);
        row[11] = join_doubles(fr.offset_candidates);
      } else if (fr.lanelet_id) {
        row[10] = std::to_string(*fr.lanelet_id);
        row[11] = csv::format_double(fr.lat_lane_center_offset);
      } else {
        row[10].clear();
        row[11].clear();
      }
      row[12] = fr.lane_change_flag ? "1" : "0";
      for (std::size_t i = 0; i < kNeighborSlots; ++i) {
        row[13 + i] = fr.neighbors[i] ? std::to_string(*fr.neighbors[i]) : std::string{};
      }
      w.row(row);
    }
  }
  return out.str();
}

void write_recording(const std::filesystem::path & dir, const Recording & recording)
{
  std::filesystem::create_directories(dir);
  char prefix[16];
  std::snprintf(prefix, sizeof(prefix), "%02d", recording.meta.recording_id);
  auto write = [&](const std::string & suffix, const std::string & content) {
    std::ofstream out(dir / (std::string(prefix) + suffix), std::ios::binary);
    out << content;
    if (!out) {
      throw std::runtime_error("failed writing " + (dir / (std::string(prefix) + suffix)).string());
    }
  };
  write("_recordingMeta.csv", serialize_recording_meta(recording.meta));
  write("_tracksMeta.csv", serialize_tracks_meta(recording));
  write("_tracks.csv", serialize_tracks(recording));
}

}  // namespace hdmerge
