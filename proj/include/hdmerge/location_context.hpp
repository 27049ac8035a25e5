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

#ifndef HDMERGE__LOCATION_CONTEXT_HPP_
#define HDMERGE__LOCATION_CONTEXT_HPP_

#include "hdmerge/map_model.hpp"

#include <memory>

namespace hdmerge
{

/// Everything the per-event stages need to know about one location: the labeled layout and,
/// when a map is available, longitudinal axes through the outer mainline (Areas 4+5), the merge
/// window (Areas 2+3) and the ramp/mainline boundary (left boundaries of Areas 2+3).
struct LocationContext
{
  MergingAreaLayout layout;
  std::shared_ptr<const LaneletMap> map;
  ChainAxis mainline_axis;
  ChainAxis merge_axis;
  ChainAxis boundary_axis;

  static LocationContext build(std::shared_ptr<const LaneletMap> map, MergingAreaLayout layout);

  bool has_geometry() const { return !mainline_axis.empty(); }
  /// Longitudinal coordinate along the outer mainline.
  double mainline_s(const Vec2 & p) const { return mainline_axis.project(p).s; }
  /// Longitudinal coordinate along the merge window.
  double merge_s(const Vec2 & p) const { return merge_axis.project(p).s; }
  /// Signed distance to the ramp/mainline boundary, positive on the mainline side.
  double boundary_offset(const Vec2 & p) const { return boundary_axis.project(p).signed_offset; }
};

}  // namespace hdmerge

#endif  // HDMERGE__LOCATION_CONTEXT_HPP_
