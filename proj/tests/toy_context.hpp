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

#ifndef TOY_CONTEXT_HPP_
#define TOY_CONTEXT_HPP_

#include "hdmerge/location_context.hpp"
#include "hdmerge/synthetic.hpp"

#include <memory>

namespace hdmerge::testing
{

inline const LocationContext & toy_context()
{
  static const LocationContext context = [] {
    auto map = std::make_shared<const LaneletMap>(synth::toy_map());
    Diagnostics diag;
    auto layout = load_layout(*map, synth::toy_layout_config(), 0.15, diag);
    return LocationContext::build(map, std::move(layout));
  }();
  return context;
}

/// Straight ramp ego at constant speed with one lane change crossing at `crossing_frame`.
inline synth::ScenarioSpec straight_merge(FrameIndex crossing_frame, double x0 = 190.0, double v0 = 20.0)
{
  synth::ScenarioSpec spec;
  spec.recording_id = 1;
  spec.ego.id = 1;
  spec.ego.length = 4.5;
  spec.ego.width = 1.8;
  spec.ego.lane = 0;
  spec.ego.x0 = x0;
  spec.ego.v0 = v0;
  spec.ego.lane_changes = {{crossing_frame, 3.0}};
  spec.ego.first_frame = 0;
  spec.ego.last_frame = crossing_frame + 75;
  spec.frame_count = spec.ego.last_frame + 1;
  return spec;
}

}  // namespace hdmerge::testing

#endif  // TOY_CONTEXT_HPP_
