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

#include "hdmerge/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hdmerge
{

double angle_difference(double a, double b)
{
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

std::vector<double> cumulative_arc_length(std::span<const Vec2> points)
{
  std::vector<double> arc(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    arc[i] = arc[i - 1] + distance(points[i - 1], points[i]);
  }
  return arc;
}

double polyline_length(std::span<const Vec2> points)
{
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    total += distance(points[i - 1], points[i]);
  }
  return total;
}

std::vector<Vec2> resample_polyline(std::span<const Vec2> points, std::size_t count)
{
  if (points.size() < 2 || count < 2) {
    throw std::invalid_argument("resample_polyline needs >= 2 input and output points");
  }
  const auto arc = cumulative_arc_length(points);
  const double total = arc.back();
  std::vector<Vec2> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (k == count - 1) {
      out.push_back(points.back());
      break;
    }
    const double target = total * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 2 < points.size() && arc[seg + 1] < target) {
      ++seg;
    }
    const double seg_len = arc[seg + 1] - arc[seg];
    const double t = seg_len > 0.0 ? std::clamp((target - arc[seg]) / seg_len, 0.0, 1.0) : 0.0;
    out.push_back(points[seg] + (points[seg + 1] - points[seg]) * t);
  }
  return out;
}

PolylineProjection project_onto_polyline(
  std::span<const Vec2> points, std::span<const double> arc, const Vec2 & p)
{
  PolylineProjection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Vec2 a = points[i];
    const Vec2 ab = points[i + 1] - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) {
      continue;
    }
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    const Vec2 foot = a + ab * t;
    const Vec2 diff = p - foot;
    const double d2 = dot(diff, diff);
    if (d2 < best_d2) {
      best_d2 = d2;
      const double len = std::sqrt(len2);
      best.segment = i;
      best.s = arc[i] + t * len;
      best.distance = std::sqrt(d2);
      best.signed_offset = cross(ab, p - a) / len;
      best.tangent_heading = std::atan2(ab.y, ab.x);
    }
  }
  return best;
}

bool point_in_quad(const Vec2 & a, const Vec2 & b, const Vec2 & c, const Vec2 & d, const Vec2 & p)
{
  // Crossing-number test; points on an edge count as inside.
  const Vec2 ring[4] = {a, b, c, d};
  constexpr double eps = 1e-9;
  for (int i = 0; i < 4; ++i) {
    const Vec2 & u = ring[i];
    const Vec2 & v = ring[(i + 1) % 4];
    const Vec2 uv = v - u;
    const double len = norm(uv);
    if (len > 0.0 && std::abs(cross(uv, p - u)) <= eps * len) {
      const double t = dot(p - u, uv) / (len * len);
      if (t >= -eps && t <= 1.0 + eps) {
        return true;
      }
    }
  }
  bool inside = false;
  for (int i = 0, j = 3; i < 4; j = i++) {
    const Vec2 & pi = ring[i];
    const Vec2 & pj = ring[j];
    if ((pi.y > p.y) != (pj.y > p.y)) {
      const double x_cross = pj.x + (p.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
      if (p.x < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

}  // namespace hdmerge
