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

#include "hdmerge/indicators.hpp"

#include "hdmerge/csv.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hdmerge
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kCriticalGrid = 1024;

std::string opt_cell(const std::optional<double> & v)
{
  return v ? csv::format_double(*v) : std::string{};
}

std::optional<double> finite_or_empty(double v)
{
  return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
}

}  // namespace

double LateralFit::derivative_u(double u, int order) const
{
  double result = 0.0;
  for (int k = 5; k >= order; --k) {
    double factor = 1.0;
    for (int j = 0; j < order; ++j) {
      factor *= static_cast<double>(k - j);
    }
    result = result * u + coefficients[static_cast<std::size_t>(k)] * factor;
  }
  return result;
}

LateralFit fit_quintic(std::span<const double> u, std::span<const double> y, double duration)
{
  if (u.size() != y.size() || u.size() < 6) {
    throw DomainError("quintic fit needs at least six paired samples");
  }
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd a(n, 6);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k < 6; ++k) {
      a(i, k) = p;
      p *= u[static_cast<std::size_t>(i)];
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  LateralFit fit;
  for (int k = 0; k < 6; ++k) {
    fit.coefficients[static_cast<std::size_t>(k)] = c(k);
  }
  fit.duration = duration;
  const Eigen::VectorXd r = a * c - b;
  fit.rms_residual = std::sqrt(r.squaredNorm() / static_cast<double>(n));
  return fit;
}

double max_abs_derivative_u(const LateralFit & fit, int order)
{
  auto g = [&](double u) { return fit.derivative_u(u, order); };
  auto h = [&](double u) { return fit.derivative_u(u, order + 1); };
  double best = std::max(std::abs(g(0.0)), std::abs(g(1.0)));
  double u_prev = 0.0;
  double h_prev = h(0.0);
  for (int k = 1; k <= kCriticalGrid; ++k) {
    const double u = static_cast<double>(k) / kCriticalGrid;
    const double h_cur = h(u);
    best = std::max(best, std::abs(g(u)));
    if ((h_prev < 0.0) != (h_cur < 0.0) && h_prev != 0.0 && h_cur != 0.0) {
      double lo = u_prev;
      double hi = u;
      double h_lo = h_prev;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double h_mid = h(mid);
        if ((h_mid < 0.0) == (h_lo < 0.0)) {
          lo = mid;
          h_lo = h_mid;
        } else {
          hi = mid;
        }
      }
      best = std::max(best, std::abs(g(0.5 * (lo + hi))));
    }
    u_prev = u;
    h_prev = h_cur;
  }
  return best;
}

std::optional<LateralKinematics> fit_lateral_kinematics(
  const MergingEvent & event, const Track & track, const LocationContext & context,
  double timestep)
{
  if (!event.t_D || context.boundary_axis.empty() || event.t_F <= *event.t_D) {
    return std::nullopt;
  }
  const FrameIndex t0 = *event.t_D;
  const FrameIndex t1 = event.t_F;
  if (t1 - t0 + 1 < 6) {
    return std::nullopt;
  }
  std::vector<double> u;
  std::vector<double> y;
  for (FrameIndex f = t0; f <= t1; ++f) {
    const auto * fr = track.at(f);
    if (!fr) {
      return std::nullopt;
    }
    u.push_back(static_cast<double>(f - t0) / static_cast<double>(t1 - t0));
    y.push_back(context.boundary_offset(fr->center));
  }
  LateralKinematics out;
  out.fit = fit_quintic(u, y, static_cast<double>(t1 - t0) * timestep);
  out.fit.t0 = t0;
  out.fit.t1 = t1;
  out.max_lat_speed = max_abs_derivative_u(out.fit, 1) / out.fit.duration;
  out.max_lat_accel = max_abs_derivative_u(out.fit, 2) / (out.fit.duration * out.fit.duration);
  return out;
}

std::optional<double> merging_distance(
  const MergingEvent & event, const Track & track, const LocationContext & context)
{
  if (!event.t_D || context.merge_axis.empty()) {
    return std::nullopt;
  }
  const auto * d = track.at(*event.t_D);
  const auto * f = track.at(event.t_F);
  if (!d || !f) {
    throw IntegrityError("event " + event.id() + " key frame outside the track lifetime");
  }
  return context.merge_s(f->center) - context.merge_s(d->center);
}

double distance_ratio(double merging_distance, const MergingAreaLayout & layout)
{
  const double ratio = merging_distance / layout.merge_window_length;
  if (ratio < -1e-6 || ratio > 1.0 + 1e-6) {
    throw IntegrityError(
      "merging distance ratio " + std::to_string(ratio) + " outside [0, 1] at location " +
      std::to_string(layout.location_id));
  }
  return ratio;
}

std::optional<double> merging_duration(const MergingEvent & event, double timestep)
{
  if (!event.t_D) {
    return std::nullopt;
  }
  return static_cast<double>(event.t_F - *event.t_D) * timestep;
}

std::optional<double> consecutive_lc_duration(const MergingEvent & event, double timestep)
{
  if (!event.t_H) {
    return std::nullopt;
  }
  return static_cast<double>(*event.t_H - event.t_F) * timestep;
}

double ttc_1d(double gap_bumper, double v_follower, double v_leader)
{
  if (gap_bumper < 0.0) {
    throw DomainError("negative bumper gap (vehicles overlap)");
  }
  const double closing = v_follower - v_leader;
  return closing > 0.0 ? gap_bumper / closing : kInf;
}

double ttc_2d(const Vec2 & p_i, const Vec2 & v_i, const Vec2 & p_j, const Vec2 & v_j)
{
  const Vec2 dp = p_i - p_j;
  const double d = norm(dp);
  if (d == 0.0) {
    throw DomainError("coincident positions in 2D TTC");
  }
  const double d_dot = dot(dp, v_i - v_j) / d;
  return d_dot < 0.0 ? -d / d_dot : kInf;
}

MinTtc min_ttc(
  const MergingEvent & event, const NeighborTimeline & timeline, const RecordingIndex & index)
{
  MinTtc out{kInf, kInf};
  const auto & ego = index.track(static_cast<std::size_t>(index.track_index(event.track_id)));
  const FrameIndex start = event.t_D.value_or(event.t_B);
  for (const auto & snap : timeline.snapshots) {
    if (snap.frame < start || snap.frame > event.t_F) {
      continue;
    }
    const auto * e = ego.at(snap.frame);
    auto eval = [&](const std::optional<TrackId> & id, double & best) {
      if (!id) {
        return;
      }
      const auto * other = index.recording().find(*id);
      const auto * o = other ? other->at(snap.frame) : nullptr;
      if (!o) {
        return;
      }
      best = std::min(best, ttc_2d(e->center, e->velocity, o->center, o->velocity));
    };
    eval(snap.lead_id, out.lead);
    eval(snap.rear_id, out.rear);
  }
  return out;
}

Headways headways(
  const MergingEvent & event, const NeighborTimeline & timeline, const RecordingIndex & index)
{
  Headways h;
  if (timeline.snapshots.empty()) {
    return h;
  }
  const auto & snap = timeline.snapshots.back();
  const auto & ego = index.track(static_cast<std::size_t>(index.track_index(event.track_id)));
  const auto * e = ego.at(event.t_F);
  auto thw = [](double dhw, double speed) { return speed > 0.0 ? dhw / speed : kInf; };
  if (snap.lead_id) {
    h.lead_dhw = snap.lead_gap;
    h.lead_thw = thw(snap.lead_gap, e->speed());
  }
  if (snap.rear_id) {
    const auto * rear = index.recording().find(*snap.rear_id);
    const auto * r = rear ? rear->at(event.t_F) : nullptr;
    h.rear_dhw = snap.rear_gap;
    h.rear_thw = thw(snap.rear_gap, r ? r->speed() : 0.0);
  }
  return h;
}

IndicatorSet compute_indicators(
  const MergingEvent & event, const NeighborTimeline & timeline, const RecordingIndex & index)
{
  const auto ego_idx = index.track_index(event.track_id);
  if (ego_idx < 0) {
    throw IntegrityError("event " + event.id() + " refers to an unknown track");
  }
  const auto & ego = index.track(static_cast<std::size_t>(ego_idx));
  const auto & context = index.context();
  const double dt = index.recording().meta.timestep;
  IndicatorSet s;
  s.merging_speed = ego.at(event.t_F)->speed();
  s.merging_distance = merging_distance(event, ego, context);
  if (s.merging_distance) {
    s.distance_ratio = distance_ratio(*s.merging_distance, context.layout);
  }
  s.duration = merging_duration(event, dt);
  if (const auto lat = fit_lateral_kinematics(event, ego, context, dt)) {
    s.max_lat_speed = lat->max_lat_speed;
    s.max_lat_accel = lat->max_lat_accel;
  }
  const auto ttc = min_ttc(event, timeline, index);
  s.min_ttc_lead = ttc.lead;
  s.min_ttc_rear = ttc.rear;
  s.headways = headways(event, timeline, index);
  s.consecutive_lc_duration = consecutive_lc_duration(event, dt);
  return s;
}

std::optional<double> indicator_value(const IndicatorSet & s, std::string_view name)
{
  std::optional<double> v;
  if (name == "merging_speed") {
    v = s.merging_speed;
  } else if (name == "merging_distance") {
    v = s.merging_distance;
  } else if (name == "distance_ratio") {
    v = s.distance_ratio;
  } else if (name == "duration") {
    v = s.duration;
  } else if (name == "max_lat_speed") {
    v = s.max_lat_speed;
  } else if (name == "max_lat_accel") {
    v = s.max_lat_accel;
  } else if (name == "min_ttc_lead") {
    v = s.min_ttc_lead;
  } else if (name == "min_ttc_rear") {
    v = s.min_ttc_rear;
  } else if (name == "lead_dhw") {
    v = s.headways.lead_dhw;
  } else if (name == "lead_thw") {
    v = s.headways.lead_thw;
  } else if (name == "rear_dhw") {
    v = s.headways.rear_dhw;
  } else if (name == "rear_thw") {
    v = s.headways.rear_thw;
  } else if (name == "consecutive_lc_duration") {
    v = s.consecutive_lc_duration;
  } else {
    throw DomainError("unknown indicator '" + std::string(name) + "'");
  }
  return v ? finite_or_empty(*v) : std::nullopt;
}

std::string serialize_indicators(std::span<const IndicatorRow> rows)
{
  std::ostringstream out;
  csv::Writer w(out);
  std::vector<std::string> header = {"event_id", "recording_id", "location_id", "track_id",
                                     "class",    "threshold",    "scenario"};
  for (const auto * n : kIndicatorNames) {
    header.emplace_back(n);
  }
  w.row(header);
  for (const auto & r : rows) {
    const auto & a = r.scenario;
    const auto & s = r.indicators;
    w.row(
      {a.event_id, std::to_string(a.recording_id), std::to_string(a.location_id),
       std::to_string(a.track_id), std::string(to_string(a.vehicle_class)),
       csv::format_double(a.threshold), std::string(to_string(a.result.label)),
       csv::format_double(s.merging_speed), opt_cell(s.merging_distance),
       opt_cell(s.distance_ratio), opt_cell(s.duration), opt_cell(s.max_lat_speed),
       opt_cell(s.max_lat_accel), csv::format_double(s.min_ttc_lead),
       csv::format_double(s.min_ttc_rear), opt_cell(s.headways.lead_dhw),
       opt_cell(s.headways.lead_thw), opt_cell(s.headways.rear_dhw),
       opt_cell(s.headways.rear_thw), opt_cell(s.consecutive_lc_duration)});
  }
  return out.str();
}

std::vector<IndicatorRow> parse_indicators(std::string text)
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
  std::array<std::size_t, kIndicatorNames.size()> c_ind{};
  for (std::size_t i = 0; i < kIndicatorNames.size(); ++i) {
    c_ind[i] = reader.require(kIndicatorNames[i]);
  }
  std::vector<IndicatorRow> rows;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    if (f.size() < reader.header().size()) {
      throw ParseError("indicators row has too few fields", line);
    }
    IndicatorRow r;
    auto & a = r.scenario;
    a.event_id = std::string(f[c_event]);
    a.recording_id = static_cast<int>(csv::parse_int(f[c_rec], line));
    a.location_id = static_cast<int>(csv::parse_int(f[c_loc], line));
    a.track_id = csv::parse_int(f[c_track], line);
    a.vehicle_class = vehicle_class_from_string(f[c_class]);
    a.threshold = csv::parse_double(f[c_thr], line);
    a.result.label = scenario_label_from_string(f[c_label]);
    std::array<std::optional<double>, kIndicatorNames.size()> v;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = csv::parse_double(f[c_ind[i]], line);
      if (!std::isnan(x)) {
        v[i] = x;
      }
    }
    auto & s = r.indicators;
    s.merging_speed = v[0].value_or(std::numeric_limits<double>::quiet_NaN());
    s.merging_distance = v[1];
    s.distance_ratio = v[2];
    s.duration = v[3];
    s.max_lat_speed = v[4];
    s.max_lat_accel = v[5];
    s.min_ttc_lead = v[6].value_or(kInf);
    s.min_ttc_rear = v[7].value_or(kInf);
    s.headways = {v[8], v[9], v[10], v[11]};
    s.consecutive_lc_duration = v[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace hdmerge
