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

#ifndef HDMERGE__INDICATORS_HPP_
#define HDMERGE__INDICATORS_HPP_

#include "hdmerge/event_extraction.hpp"
#include "hdmerge/neighbor_scenario.hpp"
#include "hdmerge/recording_index.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hdmerge
{

/// Degree-5 polynomial in normalized time u in [0, 1] over a window of `duration` seconds.
struct LateralFit
{
  std::array<double, 6> coefficients{};  ///< c0 + c1 u + ... + c5 u^5
  FrameIndex t0{0};
  FrameIndex t1{0};
  double duration{0.0};
  double rms_residual{0.0};

  /// d^order P / du^order at u.
  double derivative_u(double u, int order) const;
  double value(double u) const { return derivative_u(u, 0); }
  /// Lateral speed and acceleration in physical time.
  double speed(double u) const { return derivative_u(u, 1) / duration; }
  double acceleration(double u) const { return derivative_u(u, 2) / (duration * duration); }
};

/// Least-squares quintic through (u_i, y_i). Needs at least six samples.
LateralFit fit_quintic(std::span<const double> u, std::span<const double> y, double duration);

/// max over u in [0, 1] of |d^order P / du^order|, from the endpoints and the interior critical
/// points of that derivative.
double max_abs_derivative_u(const LateralFit & fit, int order);

struct LateralKinematics
{
  LateralFit fit;
  double max_lat_speed{0.0};
  double max_lat_accel{0.0};
};

/// Quintic fit of the signed distance to the ramp/mainline boundary over [t_D, t_F]. Empty when
/// the window has fewer than six samples or the location has no geometry.
std::optional<LateralKinematics> fit_lateral_kinematics(
  const MergingEvent & event, const Track & track, const LocationContext & context,
  double timestep);

/// Distance from t_D to t_F along the merge-window chain; empty for solid-line merges.
std::optional<double> merging_distance(
  const MergingEvent & event, const Track & track, const LocationContext & context);
/// Merging distance over the merge-window length; IntegrityError when the ratio leaves [0, 1]
/// by more than 1e-6.
double distance_ratio(double merging_distance, const MergingAreaLayout & layout);
/// Time from t_D to t_F; empty for solid-line merges.
std::optional<double> merging_duration(const MergingEvent & event, double timestep);
/// Time from t_F to t_H; empty when there is no t_H.
std::optional<double> consecutive_lc_duration(const MergingEvent & event, double timestep);

/// Bumper gap over closing speed; +inf when not closing. Negative gap is a DomainError.
double ttc_1d(double gap_bumper, double v_follower, double v_leader);
/// Center distance over its rate of decrease; +inf when the distance is not shrinking.
double ttc_2d(const Vec2 & p_i, const Vec2 & v_i, const Vec2 & p_j, const Vec2 & v_j);

struct MinTtc
{
  double lead{0.0};
  double rear{0.0};
};

/// Minimum 2D TTC against the current lead and rear over [t_D, t_F] (t_B when t_D is absent).
MinTtc min_ttc(
  const MergingEvent & event, const NeighborTimeline & timeline, const RecordingIndex & index);

struct Headways
{
  std::optional<double> lead_dhw;
  std::optional<double> lead_thw;
  std::optional<double> rear_dhw;
  std::optional<double> rear_thw;
};

/// Distance and time headways at t_F. Lead thw uses the ego speed, rear thw the rear speed.
Headways headways(
  const MergingEvent & event, const NeighborTimeline & timeline, const RecordingIndex & index);

struct IndicatorSet
{
  double merging_speed{0.0};
  std::optional<double> merging_distance;
  std::optional<double> distance_ratio;
  std::optional<double> duration;
  std::optional<double> max_lat_speed;
  std::optional<double> max_lat_accel;
  double min_ttc_lead{0.0};
  double min_ttc_rear{0.0};
  Headways headways;
  std::optional<double> consecutive_lc_duration;
};

IndicatorSet compute_indicators(
  const MergingEvent & event, const NeighborTimeline & timeline, const RecordingIndex & index);

struct IndicatorRow
{
  ScenarioAssignment scenario;
  IndicatorSet indicators;
};

/// Indicator names in column order; the statistics stage keys on these.
inline constexpr std::array<const char *, 13> kIndicatorNames = {
  "merging_speed", "merging_distance", "distance_ratio", "duration",
  "max_lat_speed", "max_lat_accel",    "min_ttc_lead",   "min_ttc_rear",
  "lead_dhw",      "lead_thw",         "rear_dhw",       "rear_thw",
  "consecutive_lc_duration"};

/// Indicator value by name; empty when undefined or non-finite.
std::optional<double> indicator_value(const IndicatorSet & set, std::string_view name);

std::string serialize_indicators(std::span<const IndicatorRow> rows);
std::vector<IndicatorRow> parse_indicators(std::string text);

}  // namespace hdmerge

#endif  // HDMERGE__INDICATORS_HPP_
