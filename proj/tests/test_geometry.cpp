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

#include <gtest/gtest.h>

#include <numbers>
#include <vector>

using namespace hdmerge;

TEST(Geometry, ArcLengthAndResampling)
{
  const std::vector<Vec2> pts = {{0, 0}, {3, 4}, {3, 10}};
  const auto arc = cumulative_arc_length(pts);
  ASSERT_EQ(arc.size(), 3u);
  EXPECT_DOUBLE_EQ(arc[1], 5.0);
  EXPECT_DOUBLE_EQ(arc[2], 11.0);
  const auto r = resample_polyline(pts, 12);
  ASSERT_EQ(r.size(), 12u);
  EXPECT_NEAR(polyline_length(r), 11.0, 1e-9);
  EXPECT_EQ(r.front(), pts.front());
  EXPECT_EQ(r.back(), pts.back());
}

TEST(Geometry, ProjectionSignAndClamping)
{
  const std::vector<Vec2> pts = {{0, 0}, {100, 0}};
  const auto arc = cumulative_arc_length(pts);
  const auto left = project_onto_polyline(pts, arc, {50, 1});
  EXPECT_NEAR(left.s, 50.0, 1e-12);
  EXPECT_NEAR(left.signed_offset, 1.0, 1e-12);
  const auto right = project_onto_polyline(pts, arc, {20, -2});
  EXPECT_NEAR(right.signed_offset, -2.0, 1e-12);
  const auto before = project_onto_polyline(pts, arc, {-5, 0});
  EXPECT_NEAR(before.s, 0.0, 1e-12);
  EXPECT_NEAR(before.distance, 5.0, 1e-12);
}

TEST(Geometry, AngleDifferenceWraps)
{
  EXPECT_NEAR(angle_difference(0.1, 2 * std::numbers::pi - 0.1), 0.2, 1e-12);
  EXPECT_NEAR(angle_difference(0.0, std::numbers::pi), std::numbers::pi, 1e-12);
}

TEST(Geometry, PointInQuad)
{
  const Vec2 a{0, 0}, b{10, 0}, c{10, 5}, d{0, 5};
  EXPECT_TRUE(point_in_quad(a, b, c, d, {5, 2}));
  EXPECT_TRUE(point_in_quad(a, b, c, d, {10, 5}));
  EXPECT_FALSE(point_in_quad(a, b, c, d, {11, 2}));
}
