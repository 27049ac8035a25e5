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

#include "hdmerge/recording_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hdmerge
{

RecordingIndex::RecordingIndex(const Recording & recording, const LocationContext & context)
: recording_(&recording), context_(&context)
{
  const auto & tracks = recording.tracks;
  masks_.resize(tracks.size());
  s_.resize(tracks.size());
  FrameIndex lo = std::numeric_limits<FrameIndex>::max();
  FrameIndex hi = std::numeric_limits<FrameIndex>::min();
  for (const auto & t : tracks) {
    lo = std::min(lo, t.frames.front().frame);
    hi = std::max(hi, t.frames.back().frame);
  }
  if (tracks.empty()) {
    lo = hi = 0;
  }
  first_frame_ = lo;
  occupants_.resize(tracks.empty() ? 0 : static_cast<std::size_t>(hi - lo + 1));

  const bool geometry = context.has_geometry();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto & frames = tracks[i].frames;
    auto & masks = masks_[i];
    auto & s = s_[i];
    masks.resize(frames.size());
    s.assign(frames.size(), nan);
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const auto & f = frames[k];
      masks[k] = f.lanelet_id ? context.layout.areas_of(*f.lanelet_id) : 0u;
      if (masks[k] != 0u && geometry) {
        s[k] = context.mainline_s(f.center);
      }
      if (masks[k] & (kArea4 | kArea5)) {
        occupants_[static_cast<std::size_t>(f.frame - lo)].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
}

std::ptrdiff_t RecordingIndex::track_index(TrackId id) const
{
  const auto * t = recording_->find(id);
  return t ? t - recording_->tracks.data() : -1;
}

unsigned RecordingIndex::mask(std::size_t track, FrameIndex frame) const
{
  const auto & frames = recording_->tracks[track].frames;
  if (frame < frames.front().frame || frame > frames.back().frame) {
    return 0u;
  }
  return masks_[track][static_cast<std::size_t>(frame - frames.front().frame)];
}

double RecordingIndex::chain_s(std::size_t track, FrameIndex frame) const
{
  const auto & frames = recording_->tracks[track].frames;
  if (frame < frames.front().frame || frame > frames.back().frame) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const auto k = static_cast<std::size_t>(frame - frames.front().frame);
  const double s = s_[track][k];
  if (std::isnan(s) && context_->has_geometry()) {
    return context_->mainline_s(frames[k].center);
  }
  return s;
}

std::span<const std::uint32_t> RecordingIndex::mainline_occupants(FrameIndex frame) const
{
  if (frame < first_frame_ || frame - first_frame_ >= static_cast<FrameIndex>(occupants_.size())) {
    return {};
  }
  return occupants_[static_cast<std::size_t>(frame - first_frame_)];
}

}  // namespace hdmerge
