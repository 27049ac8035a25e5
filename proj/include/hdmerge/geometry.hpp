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

#ifndef HDMERGE__GEOMETRY_HPP_
#define HDMERGE__GEOMETRY_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace hdmerge
{

struct Vec2
{
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  bool operator==(const Vec2 &) const = default;
};

inline double dot(const Vec2 & a, const Vec2 & b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2 & a, const Vec2 & b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 & a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2 & a, const Vec2 & b) { return norm(a - b); }

/// Smallest absolute difference between two angles, in [0, pi].
double angle_difference(double a, double b);

/// Cumulative arc length at each vertex; front() == 0.
std::vector<double> cumulative_arc_length(std::span<const Vec2> points);

double polyline_length(std::span<const Vec2> points);

/// Resample to `count` points equally spaced in arc length, endpoints preserved.
std::vector<Vec2> resample_polyline(std::span<const Vec2> points, std::size_t count);

struct PolylineProjection
{
  double s{0.0};               ///< arc length of the foot point, clamped to [0, length]
  double signed_offset{0.0};   ///< perpendicular distance, positive on the left of travel
  double distance{0.0};        ///< Euclidean distance to the foot point
  std::size_t segment{0};
  double tangent_heading{0.0};
};

/// Nearest-point projection onto a polyline with at least two vertices.
/// `arc` must be cumulative_arc_length(points).
PolylineProjection project_onto_polyline(
  std::span<const Vec2> points, std::span<const double> arc, const Vec2 & p);

/// Point inside (or on the border of) a simple quadrilateral given in ring order.
bool point_in_quad(const Vec2 & a, const Vec2 & b, const Vec2 & c, const Vec2 & d, const Vec2 & p);

}  // namespace hdmerge

#endif  // HDMERGE__GEOMETRY_HPP_
