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

#include "hdmerge/location_context.hpp"

#include <array>
#include <utility>

namespace hdmerge
{

LocationContext LocationContext::build(
  std::shared_ptr<const LaneletMap> map, MergingAreaLayout layout)
{
  LocationContext ctx;
  ctx.layout = std::move(layout);
  ctx.map = std::move(map);
  if (ctx.map) {
    constexpr std::array<int, 2> mainline{4, 5};
    constexpr std::array<int, 2> window{2, 3};
    const auto mainline_chain = ctx.layout.chain(mainline);
    const auto window_chain = ctx.layout.chain(window);
    ctx.mainline_axis = ChainAxis::from_centerlines(*ctx.map, mainline_chain);
    ctx.merge_axis = ChainAxis::from_centerlines(*ctx.map, window_chain);
    ctx.boundary_axis = ChainAxis::from_left_boundaries(*ctx.map, window_chain);
  }
  return ctx;
}

}  // namespace hdmerge
