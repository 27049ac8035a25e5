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

#ifndef HDMERGE__RECORDING_INDEX_HPP_
#define HDMERGE__RECORDING_INDEX_HPP_

#include "hdmerge/location_context.hpp"
#include "hdmerge/trajectory.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hdmerge
{

/// Read-only per-recording lookup shared by the neighbor and macroscopic stages: area membership
/// and outer-mainline chain coordinate of every labeled track frame, plus the set of tracks on
/// Area 4/5 lanelets at each frame.
class RecordingIndex
{
public:
  RecordingIndex(const Recording & recording, const LocationContext & context);

  const Recording & recording() const { return *recording_; }
  const LocationContext & context() const { return *context_; }

  /// Position of a track id in recording().tracks, or -1.
  std::ptrdiff_t track_index(TrackId id) const;
  const Track & track(std::size_t index) const { return recording_->tracks[index]; }

  /// AreaBit mask of the track's assigned lanelet at a frame (0 outside the lifetime).
  unsigned mask(std::size_t track, FrameIndex frame) const;
  /// Outer-mainline chain coordinate at a frame; projected on demand for unlabeled frames and
  /// NaN outside the lifetime.
  double chain_s(std::size_t track, FrameIndex frame) const;

  /// Tracks whose assigned lanelet belongs to Area 4 or Area 5 at a frame.
  std::span<const std::uint32_t> mainline_occupants(FrameIndex frame) const;

private:
  const Recording * recording_;
  const LocationContext * context_;
  std::vector<std::vector<unsigned>> masks_;
  std::vector<std::vector<double>> s_;
  FrameIndex first_frame_{0};
  std::vector<std::vector<std::uint32_t>> occupants_;
};

}  // namespace hdmerge

#endif  // HDMERGE__RECORDING_INDEX_HPP_
