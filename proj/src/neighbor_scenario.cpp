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

#include "hdmerge/neighbor_scenario.hpp"

#include "hdmerge/csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace hdmerge
{

namespace
{

struct Pick
{
  std::optional<TrackId> id;
  double gap{0.0};

  void offer(TrackId candidate, double g)
  {
    if (!id || g < gap || (g == gap && candidate < *id)) {
      id = candidate;
      gap = g;
    }
  }
};

NeighborSnapshot geometric_snapshot(
  const RecordingIndex & index, std::size_t ego, FrameIndex frame, double threshold)
{
  NeighborSnapshot snap;
  snap.frame = frame;
  const auto & ego_track = index.track(ego);
  const double s_ego = index.chain_s(ego, frame);
  Pick lead;
  Pick rear;
  for (const auto c : index.mainline_occupants(frame)) {
    if (c == ego) {
      continue;
    }
    const auto & other = index.track(c);
    const double d = index.chain_s(c, frame) - s_ego;
    const double half = 0.5 * (ego_track.meta.length + other.meta.length);
    if (std::abs(d) < half) {
      snap.alongside_ids.push_back(other.meta.track_id);
    } else if (d > 0.0) {
      if (d - half <= threshold) {
        lead.offer(other.meta.track_id, d - half);
      }
    } else if (-d - half <= threshold) {
      rear.offer(other.meta.track_id, -d - half);
    }
  }
  std::sort(snap.alongside_ids.begin(), snap.alongside_ids.end());
  snap.lead_id = lead.id;
  snap.lead_gap = lead.gap;
  snap.rear_id = rear.id;
  snap.rear_gap = rear.gap;
  return snap;
}

NeighborSnapshot dataset_snapshot(
  const RecordingIndex & index, std::size_t ego, FrameIndex frame, double threshold)
{
  NeighborSnapshot snap;
  snap.frame = frame;
  const auto & ego_track = index.track(ego);
  const auto * f = ego_track.at(frame);
  const bool on_ramp = !(index.mask(ego, frame) & (kArea4 | kArea5));
  const auto lead_slot = on_ramp ? NeighborSlot::left_lead : NeighborSlot::lead;
  const auto rear_slot = on_ramp ? NeighborSlot::left_rear : NeighborSlot::rear;
  const double s_ego = index.chain_s(ego, frame);

  // Signed center distance to a dataset-named neighbor on the outer mainline, if usable.
  auto resolve = [&](std::optional<TrackId> id, double & d, double & half) -> bool {
    if (!id) {
      return false;
    }
    const auto c = index.track_index(*id);
    if (c < 0 || !(index.mask(static_cast<std::size_t>(c), frame) & (kArea4 | kArea5))) {
      return false;
    }
    d = index.chain_s(static_cast<std::size_t>(c), frame) - s_ego;
    half = 0.5 * (ego_track.meta.length + index.track(static_cast<std::size_t>(c)).meta.length);
    return std::isfinite(d);
  };

  double d = 0.0;
  double half = 0.0;
  if (resolve(f->neighbor(lead_slot), d, half) && d - half <= threshold) {
    snap.lead_id = f->neighbor(lead_slot);
    snap.lead_gap = std::max(0.0, d - half);
  }
  if (resolve(f->neighbor(rear_slot), d, half) && -d - half <= threshold) {
    snap.rear_id = f->neighbor(rear_slot);
    snap.rear_gap = std::max(0.0, -d - half);
  }
  if (on_ramp && resolve(f->neighbor(NeighborSlot::left_alongside), d, half)) {
    snap.alongside_ids.push_back(*f->neighbor(NeighborSlot::left_alongside));
  }
  return snap;
}

}  // namespace

std::string_view to_string(ScenarioLabel label)
{
  static constexpr std::array<std::string_view, 8> names = {"A", "B", "C", "D", "E", "F", "G", "H"};
  return names[static_cast<std::size_t>(label)];
}

ScenarioLabel scenario_label_from_string(std::string_view s)
{
  for (const auto l : kScenarioLabels) {
    if (to_string(l) == s) {
      return l;
    }
  }
  throw ParseError("unknown scenario label '" + std::string(s) + "'");
}

NeighborTimeline match_neighbors(
  const MergingEvent & event, const RecordingIndex & index, double distance_threshold,
  NeighborSource source)
{
  if (!(distance_threshold > 0.0)) {
    throw DomainError("distance threshold must be positive");
  }
  if (!index.context().has_geometry()) {
    throw ConfigError("neighbor matching requires map geometry for the location");
  }
  const auto ego = index.track_index(event.track_id);
  if (ego < 0) {
    throw IntegrityError("event " + event.id() + " refers to an unknown track");
  }
  if (source == NeighborSource::automatic) {
    source = index.recording().fields.neighbors ? NeighborSource::dataset : NeighborSource::geometric;
  }
  NeighborTimeline tl;
  tl.event_id = event.id();
  tl.distance_threshold = distance_threshold;
  tl.snapshots.reserve(static_cast<std::size_t>(event.t_F - event.t_B + 1));
  for (FrameIndex f = event.t_B; f <= event.t_F; ++f) {
    tl.snapshots.push_back(
      source == NeighborSource::dataset
        ? dataset_snapshot(index, static_cast<std::size_t>(ego), f, distance_threshold)
        : geometric_snapshot(index, static_cast<std::size_t>(ego), f, distance_threshold));
  }
  return tl;
}

ScenarioResult classify_scenario(const NeighborTimeline & timeline)
{
  if (timeline.snapshots.empty()) {
    throw DomainError("cannot classify an empty neighbor timeline");
  }
  ScenarioResult r;
  const auto & last = timeline.snapshots.back();
  r.lead_id = last.lead_id;
  r.rear_id = last.rear_id;
  for (std::size_t i = 0; i + 1 < timeline.snapshots.size(); ++i) {
    const auto & s = timeline.snapshots[i];
    const auto alongside = [&](TrackId id) {
      return std::find(s.alongside_ids.begin(), s.alongside_ids.end(), id) != s.alongside_ids.end();
    };
    if (r.lead_id && (s.rear_id == r.lead_id || alongside(*r.lead_id))) {
      r.rear_to_lead = true;
    }
    if (r.rear_id && (s.lead_id == r.rear_id || alongside(*r.rear_id))) {
      r.lead_to_rear = true;
    }
  }
  const bool has_lead = r.lead_id.has_value();
  const bool has_rear = r.rear_id.has_value();
  if (has_lead && r.rear_to_lead) {
    r.label = has_rear ? ScenarioLabel::F : ScenarioLabel::C;
  } else if (has_rear && r.lead_to_rear) {
    r.label = has_lead ? ScenarioLabel::H : ScenarioLabel::G;
  } else if (has_rear) {
    r.label = has_lead ? ScenarioLabel::E : ScenarioLabel::D;
  } else {
    r.label = has_lead ? ScenarioLabel::B : ScenarioLabel::A;
  }
  return r;
}

std::vector<ScenarioCountRow> scenario_count_table(
  std::span<const ScenarioAssignment> assignments, std::span<const double> thresholds)
{
  using Key = std::tuple<std::string, std::string, double>;
  std::map<Key, std::array<int, 8>> counts;
  std::set<std::string> locations{"all"};
  std::set<std::string> classes{"all"};
  for (const auto & a : assignments) {
    locations.insert(std::to_string(a.location_id));
    classes.insert(std::string(to_string(a.vehicle_class)));
  }
  std::set<double> all_thresholds(thresholds.begin(), thresholds.end());
  for (const auto & a : assignments) {
    all_thresholds.insert(a.threshold);
  }
  for (const double t : all_thresholds) {
    counts[{"all", "all", t}].fill(0);
  }
  for (const auto & a : assignments) {
    const auto loc = std::to_string(a.location_id);
    const auto cls = std::string(to_string(a.vehicle_class));
    const auto idx = static_cast<std::size_t>(a.result.label);
    for (const auto & key : {Key{loc, cls, a.threshold}, Key{loc, "all", a.threshold},
                             Key{"all", cls, a.threshold}, Key{"all", "all", a.threshold}}) {
      auto it = counts.find(key);
      if (it == counts.end()) {
        it = counts.emplace(key, std::array<int, 8>{}).first;
      }
      it->second[idx] += 1;
    }
  }
  // Keyed groups observed at any threshold appear at every threshold.
  std::set<std::pair<std::string, std::string>> groups;
  for (const auto & [key, c] : counts) {
    groups.insert({std::get<0>(key), std::get<1>(key)});
  }
  for (const auto & g : groups) {
    for (const double t : all_thresholds) {
      counts.try_emplace(Key{g.first, g.second, t}, std::array<int, 8>{});
    }
  }
  auto rank = [](const std::string & s) { return s == "all" ? 1 : 0; };
  std::vector<std::pair<Key, std::array<int, 8>>> ordered(counts.begin(), counts.end());
  std::stable_sort(ordered.begin(), ordered.end(), [&](const auto & x, const auto & y) {
    const auto & [l1, c1, t1] = x.first;
    const auto & [l2, c2, t2] = y.first;
    if (t1 != t2) {
      return t1 < t2;
    }
    if (rank(l1) != rank(l2)) {
      return rank(l1) < rank(l2);
    }
    if (l1 != l2) {
      return l1.size() != l2.size() ? l1.size() < l2.size() : l1 < l2;
    }
    if (rank(c1) != rank(c2)) {
      return rank(c1) < rank(c2);
    }
    return c1 < c2;
  });
  std::vector<ScenarioCountRow> rows;
  for (const auto & [key, c] : ordered) {
    int total = 0;
    for (const int v : c) {
      total += v;
    }
    for (const auto l : kScenarioLabels) {
      const int v = c[static_cast<std::size_t>(l)];
      rows.push_back(
        {std::get<0>(key), std::get<1>(key), std::get<2>(key), l, v,
         total > 0 ? 100.0 * v / total : 0.0});
    }
  }
  return rows;
}

std::string serialize_scenarios(std::span<const ScenarioAssignment> assignments)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"event_id", "recording_id", "location_id", "track_id", "class", "threshold", "scenario",
     "lead_id", "rear_id", "rear_to_lead", "lead_to_rear"});
  auto opt = [](const std::optional<TrackId> & id) {
    return id ? std::to_string(*id) : std::string{};
  };
  for (const auto & a : assignments) {
    w.row(
      {a.event_id, std::to_string(a.recording_id), std::to_string(a.location_id),
       std::to_string(a.track_id), std::string(to_string(a.vehicle_class)),
       csv::format_double(a.threshold), std::string(to_string(a.result.label)),
       opt(a.result.lead_id), opt(a.result.rear_id), a.result.rear_to_lead ? "1" : "0",
       a.result.lead_to_rear ? "1" : "0"});
  }
  return out.str();
}

std::vector<ScenarioAssignment> parse_scenarios(std::string text)
{
  csv::Reader reader(std::move(text));
  reader.read_header();
  const auto c_event = reader.require("event_id");
  const auto c_rec = reader.require("recording_id");
  const auto c_loc = reader.require("location_id");
  const auto c_track = reader.require("track_id");
  const auto c_class = reader.require("class");
  const auto c_thr = reader.require("threshold");
  const auto c_label = reader.require("scenario");
  const auto c_lead = reader.require("lead_id");
  const auto c_rear = reader.require("rear_id");
  const auto c_rl = reader.require("rear_to_lead");
  const auto c_lr = reader.require("lead_to_rear");
  std::vector<ScenarioAssignment> out;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    if (f.size() < reader.header().size()) {
      throw ParseError("scenarios row has too few fields", line);
    }
    ScenarioAssignment a;
    a.event_id = std::string(f[c_event]);
    a.recording_id = static_cast<int>(csv::parse_int(f[c_rec], line));
    a.location_id = static_cast<int>(csv::parse_int(f[c_loc], line));
    a.track_id = csv::parse_int(f[c_track], line);
    a.vehicle_class = vehicle_class_from_string(f[c_class]);
    a.threshold = csv::parse_double(f[c_thr], line);
    a.result.label = scenario_label_from_string(f[c_label]);
    a.result.lead_id = csv::parse_optional_int(f[c_lead], line);
    a.result.rear_id = csv::parse_optional_int(f[c_rear], line);
    a.result.rear_to_lead = csv::parse_int(f[c_rl], line) != 0;
    a.result.lead_to_rear = csv::parse_int(f[c_lr], line) != 0;
    out.push_back(std::move(a));
  }
  return out;
}

std::string serialize_scenario_counts(std::span<const ScenarioCountRow> rows)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"location", "class", "threshold", "scenario", "count", "share_percent"});
  for (const auto & r : rows) {
    w.row(
      {r.location, r.vehicle_class, csv::format_double(r.threshold),
       std::string(to_string(r.label)), std::to_string(r.count),
       csv::format_double(r.share_percent)});
  }
  return out.str();
}

}  // namespace hdmerge
