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

#include "hdmerge/synthetic.hpp"

#include "hdmerge/csv.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace hdmerge::synth
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kLookback = 5;

// Longitudinal extents per lane, in id order; a point on a shared edge belongs to the upstream
// (lower id) lanelet, matching LaneletMap::locate.
struct Segment
{
  ElementId id;
  double x0;
  double x1;
  unsigned areas;  // AreaBit mask, informational
};

const std::array<std::vector<Segment>, 3> & lane_segments()
{
  static const std::array<std::vector<Segment>, 3> segments = {{
    {{1001, 140.0, 200.0, 0u},
     {1002, 200.0, 260.0, kArea1},
     {1003, 260.0, 560.0, kArea2},
     {1004, 560.0, 600.0, kArea3}},
    {{2001, 0.0, 130.0, kArea4},
     {2002, 130.0, 260.0, kArea4},
     {2003, 260.0, 560.0, kArea5},
     {2004, 560.0, 600.0, kArea5},
     {2005, 600.0, kMapEnd, 0u}},
    {{3001, 0.0, 260.0, kInner}, {3002, 260.0, 600.0, kInner}, {3003, 600.0, kMapEnd, kInner}},
  }};
  return segments;
}

std::optional<ElementId> lanelet_at(int lane, double x)
{
  if (lane < 0 || lane > 2) {
    return std::nullopt;
  }
  for (const auto & s : lane_segments()[static_cast<std::size_t>(lane)]) {
    if (x >= s.x0 && x <= s.x1) {
      return s.id;
    }
  }
  return std::nullopt;
}

int lane_of(double y)
{
  if (y < 0.5 * kLaneWidth) {
    return 0;
  }
  return y < 1.5 * kLaneWidth ? 1 : 2;
}

bool on_outer_merge_lanes(int lane, double x) { return lane == 1 && x >= 0.0 && x <= kArea5End; }

/// Minimum-jerk fraction and its derivatives at normalized time tau.
std::array<double, 3> min_jerk(double tau)
{
  if (tau <= 0.0) {
    return {0.0, 0.0, 0.0};
  }
  if (tau >= 1.0) {
    return {1.0, 0.0, 0.0};
  }
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  return {
    10.0 * t3 - 15.0 * t3 * tau + 6.0 * t3 * t2, 30.0 * t2 - 60.0 * t3 + 30.0 * t2 * t2,
    60.0 * tau - 180.0 * t2 + 120.0 * t3};
}

class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi)
  {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Sample
{
  double x;
  double y;
  double vx;
  double vy;
  double ax;
  double ay;
  int lane;
};

Sample sample(const VehicleSpec & v, FrameIndex f)
{
  const double t = static_cast<double>(f) * kTimestep;
  Sample s{v.x(t), v.y(t), v.vx(t), v.vy(t), v.a, v.ay(t), 0};
  s.lane = lane_of(s.y);
  return s;
}

/// Frames of the vehicle's lifetime that lie strictly inside the mapped x-range.
std::pair<FrameIndex, FrameIndex> visible_range(const VehicleSpec & v)
{
  FrameIndex lo = -1;
  FrameIndex hi = -2;
  for (FrameIndex f = v.first_frame; f <= v.last_frame; ++f) {
    const double x = v.x(static_cast<double>(f) * kTimestep);
    if (x > 0.0 && x < kMapEnd) {
      if (lo < 0) {
        lo = f;
      }
      hi = f;
    } else if (lo >= 0) {
      break;
    }
  }
  return {lo, hi};
}

struct Body
{
  const VehicleSpec * spec;
  FrameIndex lo;
  FrameIndex hi;
  bool present(FrameIndex f) const { return f >= lo && f <= hi; }
};

struct Roles
{
  std::optional<TrackId> lead;
  std::optional<TrackId> rear;
  double lead_gap{0.0};
  double rear_gap{0.0};
  std::vector<TrackId> alongside;
};

// Outer-lane neighbors of the ego at a frame, from the analytic positions.
Roles roles_at(const std::vector<Body> & bodies, FrameIndex f, double threshold)
{
  Roles r;
  const auto & ego = *bodies.front().spec;
  const double xe = ego.x(static_cast<double>(f) * kTimestep);
  for (std::size_t i = 1; i < bodies.size(); ++i) {
    if (!bodies[i].present(f)) {
      continue;
    }
    const auto & o = *bodies[i].spec;
    const auto s = sample(o, f);
    if (!on_outer_merge_lanes(s.lane, s.x)) {
      continue;
    }
    const double d = s.x - xe;
    const double half = 0.5 * (ego.length + o.length);
    if (std::abs(d) < half) {
      r.alongside.push_back(o.id);
    } else if (d > 0.0 && d - half <= threshold) {
      if (!r.lead || d - half < r.lead_gap) {
        r.lead = o.id;
        r.lead_gap = d - half;
      }
    } else if (d < 0.0 && -d - half <= threshold) {
      if (!r.rear || -d - half < r.rear_gap) {
        r.rear = o.id;
        r.rear_gap = -d - half;
      }
    }
  }
  return r;
}

double ttc(const Sample & a, const Sample & b)
{
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double d = std::hypot(dx, dy);
  const double rate = (dx * (a.vx - b.vx) + dy * (a.vy - b.vy)) / d;
  return rate < 0.0 ? -d / rate : kInf;
}

EdieTruth edie_truth(
  const std::vector<Body> & bodies, double x_lo, double x_hi, bool include_lo, double length,
  FrameIndex t0, FrameIndex t1)
{
  EdieTruth e;
  long long frames_inside = 0;
  auto inside = [&](const VehicleSpec & v, FrameIndex f) {
    const auto s = sample(v, f);
    return s.lane == 1 && (include_lo ? s.x >= x_lo : s.x > x_lo) && s.x <= x_hi;
  };
  for (const auto & b : bodies) {
    const auto & v = *b.spec;
    bool any = false;
    FrameIndex f = std::max(t0, b.lo);
    const FrameIndex end = std::min(t1, b.hi + 1);
    while (f < end) {
      if (!inside(v, f)) {
        ++f;
        continue;
      }
      const FrameIndex start = f;
      while (f < end && inside(v, f)) {
        ++f;
      }
      const FrameIndex last = f - 1;
      double x_end;
      if (last + 1 <= b.hi) {
        x_end = v.x(static_cast<double>(last + 1) * kTimestep);
      } else if (last > b.lo) {
        const double xl = v.x(static_cast<double>(last) * kTimestep);
        x_end = xl + (xl - v.x(static_cast<double>(last - 1) * kTimestep));
      } else {
        x_end = v.x(static_cast<double>(last) * kTimestep);
      }
      e.distance += x_end - v.x(static_cast<double>(start) * kTimestep);
      frames_inside += last - start + 1;
      any = true;
    }
    e.n_vehicles += any ? 1 : 0;
  }
  e.time = static_cast<double>(frames_inside) * kTimestep;
  const double area = length * static_cast<double>(t1 - t0) * kTimestep;
  e.q = e.distance / area;
  e.k = e.time / area;
  if (e.time > 0.0) {
    e.v = e.distance / e.time;
  }
  return e;
}

void dims_for(VehicleClass c, Rng & rng, VehicleSpec & v)
{
  switch (c) {
    case VehicleClass::truck:
      v.length = rng.uniform(12.0, 16.5);
      v.width = rng.uniform(2.45, 2.55);
      break;
    case VehicleClass::van:
      v.length = rng.uniform(5.0, 6.5);
      v.width = rng.uniform(1.95, 2.1);
      break;
    default:
      v.length = rng.uniform(4.0, 5.1);
      v.width = rng.uniform(1.7, 2.0);
      break;
  }
}

VehicleClass draw_class(Rng & rng)
{
  const double u = rng.uniform(0.0, 1.0);
  return u < 0.8 ? VehicleClass::car : (u < 0.9 ? VehicleClass::truck : VehicleClass::van);
}

std::string fmt_id(TrackId id) { return std::to_string(id); }

}  // namespace

double VehicleSpec::y(double t) const
{
  double y = static_cast<double>(lane) * kLaneWidth;
  for (const auto & lc : lane_changes) {
    const double start = (static_cast<double>(lc.crossing_frame) - 0.5) * kTimestep - 0.5 * lc.duration;
    y += kLaneWidth * min_jerk((t - start) / lc.duration)[0];
  }
  return y;
}

double VehicleSpec::vy(double t) const
{
  double v = 0.0;
  for (const auto & lc : lane_changes) {
    const double start = (static_cast<double>(lc.crossing_frame) - 0.5) * kTimestep - 0.5 * lc.duration;
    v += kLaneWidth * min_jerk((t - start) / lc.duration)[1] / lc.duration;
  }
  return v;
}

double VehicleSpec::ay(double t) const
{
  double a = 0.0;
  for (const auto & lc : lane_changes) {
    const double start = (static_cast<double>(lc.crossing_frame) - 0.5) * kTimestep - 0.5 * lc.duration;
    a += kLaneWidth * min_jerk((t - start) / lc.duration)[2] / (lc.duration * lc.duration);
  }
  return a;
}

LaneletMap toy_map()
{
  std::map<ElementId, MapPoint> points;
  std::map<ElementId, LineString> linestrings;
  std::vector<std::pair<ElementId, std::pair<ElementId, ElementId>>> bounds;
  ElementId next_point = 1;
  ElementId next_line = 10001;
  auto line = [&](double x0, double x1, double y, LineType type) {
    const ElementId a = next_point++;
    const ElementId b = next_point++;
    points[a] = {a, x0, y, 0.0};
    points[b] = {b, x1, y, 0.0};
    const ElementId id = next_line++;
    linestrings[id] = {id, {a, b}, type};
    return id;
  };
  for (int lane = 0; lane < 3; ++lane) {
    const double center = lane * kLaneWidth;
    for (const auto & s : lane_segments()[static_cast<std::size_t>(lane)]) {
      LineType left_type = LineType::dashed;
      LineType right_type = LineType::solid;
      if (lane == 0) {
        left_type = s.id <= 1002 ? LineType::solid : LineType::dashed;
      } else if (lane == 1) {
        right_type = (s.x0 >= kArea2Start && s.x1 <= kArea5End) ? LineType::dashed : LineType::solid;
      } else {
        left_type = LineType::solid;
        right_type = LineType::dashed;
      }
      const auto left = line(s.x0, s.x1, center + 0.5 * kLaneWidth, left_type);
      const auto right = line(s.x0, s.x1, center - 0.5 * kLaneWidth, right_type);
      bounds.push_back({s.id, {left, right}});
    }
  }
  return LaneletMap(std::move(points), std::move(linestrings), std::move(bounds), false);
}

LocationLayoutConfig toy_layout_config()
{
  LocationLayoutConfig c;
  c.location_id = kLocationId;
  c.area_lanelets[1] = {1002};
  c.expected_lengths[1] = {60.0};
  c.area_lanelets[2] = {1003};
  c.expected_lengths[2] = {300.0};
  c.area_lanelets[3] = {1004};
  c.expected_lengths[3] = {40.0};
  c.area_lanelets[4] = {2001, 2002};
  c.expected_lengths[4] = {130.0, 130.0};
  c.area_lanelets[5] = {2003, 2004};
  c.expected_lengths[5] = {300.0, 40.0};
  c.inner_lanelets = {3001, 3002, 3003};
  return c;
}

std::string toy_layout_text()
{
  LayoutConfig cfg;
  cfg.locations[kLocationId] = toy_layout_config();
  return format_layout_config(cfg);
}

ScenarioLabel schedule_label(const ScenarioSpec & spec, double threshold)
{
  const bool has_lead = spec.lead && spec.lead->gap <= threshold;
  const bool has_rear = spec.rear && spec.rear->gap <= threshold;
  if (has_lead && spec.lead->swap) {
    return has_rear ? ScenarioLabel::F : ScenarioLabel::C;
  }
  if (has_rear && spec.rear->swap) {
    return has_lead ? ScenarioLabel::H : ScenarioLabel::G;
  }
  if (has_rear) {
    return has_lead ? ScenarioLabel::E : ScenarioLabel::D;
  }
  return has_lead ? ScenarioLabel::B : ScenarioLabel::A;
}

Scene generate(const ScenarioSpec & spec, const std::vector<double> & thresholds)
{
  auto fail = [&](const std::string & why) {
    throw ConfigError("synthetic spec for recording " + std::to_string(spec.recording_id) + ": " + why);
  };
  if (spec.ego.lane != 0 || spec.ego.lane_changes.empty()) {
    fail("ego must start on the ramp and change lanes at least once");
  }

  std::vector<Body> bodies;
  auto add_body = [&](const VehicleSpec & v) {
    const auto [lo, hi] = visible_range(v);
    if (lo >= 0) {
      bodies.push_back({&v, lo, hi});
    }
    return lo >= 0;
  };
  if (!add_body(spec.ego)) {
    fail("ego never inside the map");
  }
  for (const auto & o : spec.others) {
    add_body(o);
  }
  for (const auto & b : bodies) {
    for (FrameIndex f = b.lo; f <= b.hi; ++f) {
      if (!(b.spec->vx(static_cast<double>(f) * kTimestep) > 0.5)) {
        fail("vehicle " + fmt_id(b.spec->id) + " stops or reverses");
      }
    }
  }

  Scene scene;
  scene.spec = spec;
  auto & rec = scene.recording;
  rec.meta.recording_id = spec.recording_id;
  rec.meta.location_id = kLocationId;
  rec.meta.frame_rate = 1.0 / kTimestep;
  rec.meta.timestep = kTimestep;
  rec.fields = {true, true, true, true, true, true, true};

  // Tracks.
  std::vector<std::vector<Sample>> samples(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (FrameIndex f = bodies[i].lo; f <= bodies[i].hi; ++f) {
      samples[i].push_back(sample(*bodies[i].spec, f));
    }
  }
  auto sample_at = [&](std::size_t i, FrameIndex f) -> const Sample * {
    return bodies[i].present(f) ? &samples[i][static_cast<std::size_t>(f - bodies[i].lo)] : nullptr;
  };

  // Same-lane bodies must never overlap.
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      const FrameIndex lo = std::max(bodies[i].lo, bodies[j].lo);
      const FrameIndex hi = std::min(bodies[i].hi, bodies[j].hi);
      const double half = 0.5 * (bodies[i].spec->length + bodies[j].spec->length) + 0.5;
      for (FrameIndex f = lo; f <= hi; ++f) {
        const auto * a = sample_at(i, f);
        const auto * b = sample_at(j, f);
        if (a->lane == b->lane && std::abs(a->x - b->x) < half) {
          fail("vehicles " + fmt_id(bodies[i].spec->id) + " and " + fmt_id(bodies[j].spec->id) + " collide");
        }
      }
    }
  }

  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto & v = *bodies[i].spec;
    Track t;
    t.meta.track_id = v.id;
    t.meta.vehicle_class = v.vehicle_class;
    t.meta.length = v.length;
    t.meta.width = v.width;
    t.meta.first_frame = bodies[i].lo;
    t.meta.last_frame = bodies[i].hi;
    for (FrameIndex f = bodies[i].lo; f <= bodies[i].hi; ++f) {
      const auto & s = *sample_at(i, f);
      TrackFrame fr;
      fr.frame = f;
      fr.center = {s.x, s.y};
      fr.heading_deg = std::atan2(s.vy, s.vx) * 180.0 / std::numbers::pi;
      fr.velocity = {s.vx, s.vy};
      fr.acceleration = {s.ax, s.ay};
      fr.lanelet_id = lanelet_at(s.lane, s.x);
      fr.lat_lane_center_offset = fr.lanelet_id ? s.y - s.lane * kLaneWidth : std::numeric_limits<double>::quiet_NaN();
      if (fr.lanelet_id) {
        fr.lanelet_candidates = {*fr.lanelet_id};
        fr.offset_candidates = {fr.lat_lane_center_offset};
      }
      const auto * prev = sample_at(i, f - 1);
      fr.lane_change_flag = prev && prev->lane != s.lane;
      // Dataset-style neighbor fields by lane.
      struct Best
      {
        std::optional<TrackId> id;
        double key{0.0};
        void offer(TrackId c, double k)
        {
          if (!id || k < key || (k == key && c < *id)) {
            id = c;
            key = k;
          }
        }
      };
      std::array<Best, kNeighborSlots> best;
      for (std::size_t j = 0; j < bodies.size(); ++j) {
        const auto * o = j == i ? nullptr : sample_at(j, f);
        if (!o) {
          continue;
        }
        const double d = o->x - s.x;
        const double half = 0.5 * (v.length + bodies[j].spec->length);
        const bool overlap = std::abs(d) < half;
        const TrackId oid = bodies[j].spec->id;
        const int side = o->lane - s.lane;
        using S = NeighborSlot;
        auto slot = [](S x) { return static_cast<std::size_t>(x); };
        if (side == 0 && !overlap) {
          best[slot(d > 0.0 ? S::lead : S::rear)].offer(oid, std::abs(d));
        } else if (side == 1 || side == -1) {
          const bool left = side == 1;
          if (overlap) {
            best[slot(left ? S::left_alongside : S::right_alongside)].offer(oid, std::abs(d));
          } else if (d > 0.0) {
            best[slot(left ? S::left_lead : S::right_lead)].offer(oid, d);
          } else {
            best[slot(left ? S::left_rear : S::right_rear)].offer(oid, -d);
          }
        }
      }
      for (std::size_t k = 0; k < kNeighborSlots; ++k) {
        fr.neighbors[k] = best[k].id;
      }
      t.frames.push_back(std::move(fr));
    }
    rec.tracks.push_back(std::move(t));
  }
  std::sort(rec.tracks.begin(), rec.tracks.end(), [](const Track & a, const Track & b) {
    return a.meta.track_id < b.meta.track_id;
  });

  // Ground truth.
  const auto & ego = spec.ego;
  auto & gt = scene.truth;
  gt.recording_id = spec.recording_id;
  gt.ego_id = ego.id;
  gt.vehicle_class = ego.vehicle_class;
  gt.target_label = spec.target_label;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%d-%lld", spec.recording_id, static_cast<long long>(ego.id));
  gt.event_id = buf;
  const auto & ego_body = bodies.front();
  gt.t_F = ego.lane_changes.front().crossing_frame;
  if (gt.t_F - kLookback < ego_body.lo || gt.t_F > ego_body.hi) {
    fail("merge frame outside the ego track");
  }
  auto ego_x = [&](FrameIndex f) { return ego.x(static_cast<double>(f) * kTimestep); };
  if (ego_x(gt.t_F - kLookback) <= kArea1Start || ego_x(gt.t_F) > kArea5End) {
    fail("merge must happen with the lookback inside Areas 1-3");
  }
  std::optional<FrameIndex> t_B;
  for (FrameIndex f = ego_body.lo; f < gt.t_F; ++f) {
    const double x = ego_x(f);
    if (!t_B && x > kArea1Start) {
      t_B = f;
    }
    if (!gt.t_D && x > kArea2Start) {
      gt.t_D = f;
    }
  }
  if (!t_B) {
    fail("ego never enters Area 1");
  }
  gt.t_B = *t_B;
  gt.crossed_solid = !gt.t_D;
  if (ego.lane_changes.size() > 1) {
    gt.t_H = ego.lane_changes[1].crossing_frame;
    if (gt.t_H > ego_body.hi) {
      fail("second lane change after the track ends");
    }
  }
  {
    const FrameIndex floor = gt.t_D.value_or(gt.t_B);
    FrameIndex e = gt.t_F - 1;
    auto y = [&](FrameIndex f) { return ego.y(static_cast<double>(f) * kTimestep); };
    while (e - 1 >= floor && y(e) > y(e - 1)) {
      --e;
    }
    if (gt.t_F - 1 - e >= kLookback) {
      gt.t_E = e;
    }
    for (FrameIndex f = gt.t_F; f <= ego_body.hi; ++f) {
      if (y(f) - 0.5 * kLaneWidth >= 0.5 * ego.width) {
        gt.t_G = f;
        break;
      }
    }
  }
  const auto ego_F = sample(ego, gt.t_F);
  gt.merging_speed = std::hypot(ego_F.vx, ego_F.vy);
  if (gt.t_D) {
    gt.merging_distance = ego_F.x - ego_x(*gt.t_D);
    gt.distance_ratio = *gt.merging_distance / (kArea5End - kArea2Start);
    gt.duration = static_cast<double>(gt.t_F - *gt.t_D) * kTimestep;
  }
  if (gt.t_H) {
    gt.consecutive_lc_duration = static_cast<double>(*gt.t_H - gt.t_F) * kTimestep;
  }
  gt.upstream = edie_truth(bodies, 0.0, kArea2Start, true, kArea2Start, gt.t_B, gt.t_F);
  gt.downstream =
    edie_truth(bodies, kArea2Start, kArea5End, false, kArea5End - kArea2Start, gt.t_B, gt.t_F);

  auto body_index = [&](TrackId id) -> std::size_t {
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      if (bodies[i].spec->id == id) {
        return i;
      }
    }
    return bodies.size();
  };
  for (const double tau : thresholds) {
    ThresholdTruth tt;
    tt.threshold = tau;
    tt.label = schedule_label(spec, tau);
    std::vector<Roles> history;
    for (FrameIndex f = gt.t_B; f <= gt.t_F; ++f) {
      history.push_back(roles_at(bodies, f, tau));
    }
    const auto & final_roles = history.back();
    tt.lead_id = final_roles.lead;
    tt.rear_id = final_roles.rear;
    bool rear_to_lead = false;
    bool lead_to_rear = false;
    for (std::size_t k = 0; k + 1 < history.size(); ++k) {
      const auto & h = history[k];
      auto along = [&](TrackId id) {
        return std::find(h.alongside.begin(), h.alongside.end(), id) != h.alongside.end();
      };
      rear_to_lead = rear_to_lead || (tt.lead_id && (h.rear == tt.lead_id || along(*tt.lead_id)));
      lead_to_rear = lead_to_rear || (tt.rear_id && (h.lead == tt.rear_id || along(*tt.rear_id)));
    }
    // The sampled motion must realize the authored schedule.
    const bool expect_lead = spec.lead && spec.lead->gap <= tau;
    const bool expect_rear = spec.rear && spec.rear->gap <= tau;
    if (expect_lead != tt.lead_id.has_value() || (expect_lead && *tt.lead_id != spec.lead->id)) {
      fail("lead at t_F does not match the schedule");
    }
    if (expect_rear != tt.rear_id.has_value() || (expect_rear && *tt.rear_id != spec.rear->id)) {
      fail("rear at t_F does not match the schedule");
    }
    if (expect_lead && (rear_to_lead != spec.lead->swap || std::abs(final_roles.lead_gap - spec.lead->gap) > 1e-6)) {
      fail("lead history or gap does not match the schedule");
    }
    if (expect_rear && (lead_to_rear != spec.rear->swap || std::abs(final_roles.rear_gap - spec.rear->gap) > 1e-6)) {
      fail("rear history or gap does not match the schedule");
    }

    tt.min_ttc_lead = kInf;
    tt.min_ttc_rear = kInf;
    const FrameIndex ttc_start = gt.t_D.value_or(gt.t_B);
    for (FrameIndex f = ttc_start; f <= gt.t_F; ++f) {
      const auto & h = history[static_cast<std::size_t>(f - gt.t_B)];
      const auto e = sample(ego, f);
      if (h.lead) {
        const auto o = sample(*bodies[body_index(*h.lead)].spec, f);
        tt.min_ttc_lead = std::min(tt.min_ttc_lead, ttc(e, o));
      }
      if (h.rear) {
        const auto o = sample(*bodies[body_index(*h.rear)].spec, f);
        tt.min_ttc_rear = std::min(tt.min_ttc_rear, ttc(e, o));
      }
    }
    const double ego_speed = std::hypot(ego_F.vx, ego_F.vy);
    if (tt.lead_id) {
      tt.lead_dhw = final_roles.lead_gap;
      tt.lead_thw = ego_speed > 0.0 ? final_roles.lead_gap / ego_speed : kInf;
    }
    if (tt.rear_id) {
      const auto r = sample(*bodies[body_index(*tt.rear_id)].spec, gt.t_F);
      const double rs = std::hypot(r.vx, r.vy);
      tt.rear_dhw = final_roles.rear_gap;
      tt.rear_thw = rs > 0.0 ? final_roles.rear_gap / rs : kInf;
    }
    gt.thresholds.push_back(tt);
  }
  if (!gt.thresholds.empty() && !gt.crossed_solid &&
      gt.thresholds.front().label != spec.target_label) {
    fail("label at the first threshold differs from the target");
  }
  return scene;
}

ScenarioSpec random_spec(
  ScenarioLabel label, int recording_id, std::uint64_t seed, const RandomOptions & options)
{
  Rng rng(seed);
  for (int attempt = 0; attempt < 2000; ++attempt) {
    ScenarioSpec spec;
    spec.recording_id = recording_id;
    spec.seed = seed;
    spec.target_label = label;
    const bool solid = rng.chance(options.solid_merge_fraction);

    auto near_gap = [&] { return rng.uniform(5.0, 95.0); };
    auto other_gap = [&]() -> std::optional<double> {
      const double u = rng.uniform(0.0, 1.0);
      if (u < 0.4) {
        return std::nullopt;
      }
      return u < 0.7 ? rng.uniform(105.0, 145.0) : rng.uniform(155.0, 195.0);
    };
    std::optional<double> lead_gap;
    std::optional<double> rear_gap;
    bool lead_swap = false;
    bool rear_swap = false;
    using L = ScenarioLabel;
    switch (label) {
      case L::A:
        lead_gap = other_gap();
        rear_gap = other_gap();
        lead_swap = rng.chance(0.3);
        rear_swap = rng.chance(0.3);
        break;
      case L::B:
        lead_gap = near_gap();
        rear_gap = other_gap();
        rear_swap = rng.chance(0.3);
        break;
      case L::C:
        lead_gap = near_gap();
        lead_swap = true;
        rear_gap = other_gap();
        break;
      case L::D:
        lead_gap = other_gap();
        lead_swap = rng.chance(0.3);
        rear_gap = near_gap();
        break;
      case L::E:
        lead_gap = near_gap();
        rear_gap = near_gap();
        break;
      case L::F:
        lead_gap = near_gap();
        lead_swap = true;
        rear_gap = near_gap();
        rear_swap = rng.chance(0.2);
        break;
      case L::G:
        lead_gap = other_gap();
        rear_gap = near_gap();
        rear_swap = true;
        break;
      case L::H:
        lead_gap = near_gap();
        rear_gap = near_gap();
        rear_swap = true;
        break;
    }

    auto & ego = spec.ego;
    ego.id = 1;
    ego.vehicle_class = draw_class(rng);
    dims_for(ego.vehicle_class, rng, ego);
    ego.lane = 0;
    ego.x0 = rng.uniform(186.0, 192.0);
    ego.v0 = rng.uniform(14.0, 24.0);
    ego.a = rng.uniform(0.0, 1.0);

    VehicleSpec lead;
    VehicleSpec rear;
    lead.id = 2;
    rear.id = 3;
    for (auto * v : {&lead, &rear}) {
      v->vehicle_class = draw_class(rng);
      dims_for(v->vehicle_class, rng, *v);
      v->lane = 1;
    }
    const double half_lead = 0.5 * (ego.length + lead.length);
    const double half_rear = 0.5 * (ego.length + rear.length);

    double x_lo = solid ? 216.0 : 330.0;
    double x_hi = solid ? 252.0 : 530.0;
    if (lead_gap) {
      x_hi = std::min(x_hi, kArea5End - 4.0 - half_lead - *lead_gap);
    }
    if (x_hi < x_lo) {
      continue;
    }
    const double x_target = rng.uniform(x_lo, x_hi);
    const double dist = x_target - ego.x0;
    const double t_star = ego.a > 1e-9
                            ? (-ego.v0 + std::sqrt(ego.v0 * ego.v0 + 2.0 * ego.a * dist)) / ego.a
                            : dist / ego.v0;
    const auto f_F = static_cast<FrameIndex>(std::llround(t_star / kTimestep));
    const double t_F = static_cast<double>(f_F) * kTimestep;
    const double lc1 = rng.uniform(2.6, 4.0);
    ego.lane_changes = {{f_F, lc1}};
    const double lc1_start = (static_cast<double>(f_F) - 0.5) * kTimestep - 0.5 * lc1;
    double end_time = lc1_start + lc1 + 1.0;
    if (rng.chance(options.second_lane_change_fraction)) {
      const double lc2 = rng.uniform(2.6, 4.0);
      const double pause = rng.uniform(0.5, 2.0);
      const auto f_H = static_cast<FrameIndex>(
        std::ceil((lc1_start + lc1 + pause + 0.5 * lc2) / kTimestep + 0.5));
      const double lc2_start = (static_cast<double>(f_H) - 0.5) * kTimestep - 0.5 * lc2;
      if (ego.x(lc2_start + lc2 + 1.0) < kMapEnd - 5.0) {
        ego.lane_changes.push_back({f_H, lc2});
        end_time = lc2_start + lc2 + 1.0;
      }
    }
    ego.first_frame = 0;
    ego.last_frame = static_cast<FrameIndex>(std::ceil(end_time / kTimestep));
    if (ego.x(static_cast<double>(ego.last_frame) * kTimestep) >= kMapEnd - 5.0) {
      continue;
    }
    spec.frame_count = ego.last_frame + 1;

    // t_B for the swap construction.
    FrameIndex f_B = 0;
    while (ego.x(static_cast<double>(f_B) * kTimestep) <= kArea1Start) {
      ++f_B;
    }
    const double t_B = static_cast<double>(f_B) * kTimestep;
    const double window = t_F - t_B;
    const double xe_B = ego.x(t_B);
    const double xe_F = ego.x(t_F);
    const double ve_F = ego.vx(t_F);

    bool ok = true;
    if (lead_gap) {
      const double xl_F = xe_F + half_lead + *lead_gap;
      if (lead_swap) {
        const double xl_B = xe_B - half_lead - rng.uniform(2.0, 25.0);
        lead.v0 = (xl_F - xl_B) / window;
      } else {
        lead.v0 = std::max(3.0, ve_F + rng.uniform(-3.0, 3.0));
      }
      lead.x0 = xl_F - lead.v0 * t_F;
      lead.first_frame = 0;
      lead.last_frame = ego.last_frame;
      ok = ok && lead.v0 >= 3.0 && lead.v0 <= 45.0;
      spec.others.push_back(lead);
      spec.lead = RoleSpec{lead.id, *lead_gap, lead_swap};
    }
    if (rear_gap) {
      const double xr_F = xe_F - half_rear - *rear_gap;
      if (rear_swap) {
        const double xr_B = xe_B + half_rear + rng.uniform(2.0, 25.0);
        rear.v0 = (xr_F - xr_B) / window;
      } else {
        rear.v0 = std::max(3.0, ve_F + rng.uniform(-3.0, 3.0));
      }
      rear.x0 = xr_F - rear.v0 * t_F;
      rear.first_frame = 0;
      rear.last_frame = ego.last_frame;
      ok = ok && rear.v0 >= 3.0 && rear.v0 <= 45.0;
      spec.others.push_back(rear);
      spec.rear = RoleSpec{rear.id, *rear_gap, rear_swap};
    }
    const int background = options.max_background > 0
                             ? static_cast<int>(rng.uniform(0.0, options.max_background + 1.0))
                             : 0;
    for (int b = 0; b < background; ++b) {
      VehicleSpec v;
      v.id = 4 + b;
      v.vehicle_class = draw_class(rng);
      dims_for(v.vehicle_class, rng, v);
      v.lane = 2;
      v.x0 = rng.uniform(0.0, 500.0);
      v.v0 = rng.uniform(22.0, 34.0);
      v.first_frame = 0;
      v.last_frame = ego.last_frame;
      spec.others.push_back(v);
    }
    if (!ok) {
      continue;
    }
    try {
      generate(spec, {100.0});
      return spec;
    } catch (const ConfigError &) {
      continue;
    }
  }
  throw ConfigError(
    "could not construct a synthetic spec for label " + std::string(to_string(label)));
}

std::vector<Scene> generate_batch(
  int count, std::uint64_t seed, bool cycle_labels, const RandomOptions & options,
  const std::vector<double> & thresholds)
{
  std::vector<Scene> scenes(static_cast<std::size_t>(std::max(count, 0)));
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < count; ++i) {
    const auto s = mix_seed(seed, static_cast<std::uint64_t>(i));
    const auto label = cycle_labels ? kScenarioLabels[static_cast<std::size_t>(i % 8)]
                                    : kScenarioLabels[static_cast<std::size_t>(s % 8)];
    scenes[static_cast<std::size_t>(i)] =
      generate(random_spec(label, i + 1, mix_seed(s, 0xABCDu), options), thresholds);
  }
  return scenes;
}

Recording platoon_recording(double speed, double headway_s, double duration_s, int recording_id)
{
  Recording rec;
  rec.meta.recording_id = recording_id;
  rec.meta.location_id = kLocationId;
  rec.meta.frame_rate = 1.0 / kTimestep;
  rec.meta.timestep = kTimestep;
  rec.fields = {true, true, true, true, true, false, false};
  const auto frames = static_cast<FrameIndex>(std::llround(duration_s / kTimestep));
  // Vehicle k passes x = 0 at time k * headway, offset by a quarter step to avoid edge hits.
  const double t_shift = 0.25 * kTimestep;
  const int vehicles = static_cast<int>(std::ceil((duration_s + kMapEnd / speed) / headway_s)) + 1;
  for (int k = 0; k < vehicles; ++k) {
    VehicleSpec v;
    v.id = k + 1;
    v.lane = 1;
    v.v0 = speed;
    v.x0 = speed * (t_shift - (static_cast<double>(k) * headway_s - kMapEnd / speed));
    v.first_frame = 0;
    v.last_frame = frames - 1;
    const auto [lo, hi] = visible_range(v);
    if (lo < 0) {
      continue;
    }
    Track t;
    t.meta.track_id = v.id;
    t.meta.length = v.length;
    t.meta.width = v.width;
    t.meta.first_frame = lo;
    t.meta.last_frame = hi;
    for (FrameIndex f = lo; f <= hi; ++f) {
      const auto s = sample(v, f);
      TrackFrame fr;
      fr.frame = f;
      fr.center = {s.x, s.y};
      fr.velocity = {s.vx, 0.0};
      fr.lanelet_id = lanelet_at(1, s.x);
      fr.lat_lane_center_offset = 0.0;
      t.frames.push_back(std::move(fr));
    }
    rec.tracks.push_back(std::move(t));
  }
  return rec;
}

std::string ground_truth_json(const GroundTruth & gt)
{
  using nlohmann::ordered_json;
  auto opt = [](const auto & v) -> ordered_json {
    if (!v) {
      return nullptr;
    }
    return *v;
  };
  auto num = [](double v) -> ordered_json {
    if (std::isinf(v)) {
      return v > 0 ? "inf" : "-inf";
    }
    return v;
  };
  auto edie = [&](const EdieTruth & e) {
    ordered_json j;
    j["distance_m"] = e.distance;
    j["time_s"] = e.time;
    j["q_veh_s"] = e.q;
    j["k_veh_m"] = e.k;
    j["v_m_s"] = opt(e.v);
    j["n_vehicles"] = e.n_vehicles;
    return j;
  };
  ordered_json j;
  j["event_id"] = gt.event_id;
  j["recording_id"] = gt.recording_id;
  j["track_id"] = gt.ego_id;
  j["class"] = std::string(to_string(gt.vehicle_class));
  j["target_label"] = std::string(to_string(gt.target_label));
  j["t_B"] = gt.t_B;
  j["t_D"] = opt(gt.t_D);
  j["t_E"] = opt(gt.t_E);
  j["t_F"] = gt.t_F;
  j["t_G"] = opt(gt.t_G);
  j["t_H"] = opt(gt.t_H);
  j["crossed_solid"] = gt.crossed_solid;
  j["merging_speed"] = gt.merging_speed;
  j["merging_distance"] = opt(gt.merging_distance);
  j["distance_ratio"] = opt(gt.distance_ratio);
  j["duration"] = opt(gt.duration);
  j["consecutive_lc_duration"] = opt(gt.consecutive_lc_duration);
  j["upstream"] = edie(gt.upstream);
  j["downstream"] = edie(gt.downstream);
  ordered_json per = ordered_json::array();
  for (const auto & t : gt.thresholds) {
    ordered_json x;
    x["threshold"] = t.threshold;
    x["label"] = std::string(to_string(t.label));
    x["lead_id"] = opt(t.lead_id);
    x["rear_id"] = opt(t.rear_id);
    x["min_ttc_lead"] = num(t.min_ttc_lead);
    x["min_ttc_rear"] = num(t.min_ttc_rear);
    x["lead_dhw"] = opt(t.lead_dhw);
    x["lead_thw"] = opt(t.lead_thw);
    x["rear_dhw"] = opt(t.rear_dhw);
    x["rear_thw"] = opt(t.rear_thw);
    per.push_back(std::move(x));
  }
  j["thresholds"] = std::move(per);
  return j.dump(2) + "\n";
}

void write_corpus(const std::filesystem::path & dir, const std::vector<Scene> & scenes)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir / "maps");
  fs::create_directories(dir / "data");
  fs::create_directories(dir / "truth");
  auto write = [](const fs::path & p, const std::string & text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) {
      throw std::runtime_error("failed writing " + p.string());
    }
  };
  write(dir / "maps" / (std::to_string(kLocationId) + "_toy.osm"), serialize_lanelet2(toy_map()));
  write(dir / "layout.conf", toy_layout_text());
  for (const auto & s : scenes) {
    write_recording(dir / "data", s.recording);
    char name[64];
    std::snprintf(name, sizeof(name), "%02d_ground_truth.json", s.recording.meta.recording_id);
    write(dir / "truth" / name, ground_truth_json(s.truth));
  }
}

}  // namespace hdmerge::synth
