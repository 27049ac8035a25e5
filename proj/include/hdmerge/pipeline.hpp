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

#ifndef HDMERGE__PIPELINE_HPP_
#define HDMERGE__PIPELINE_HPP_

#include "hdmerge/errors.hpp"
#include "hdmerge/event_extraction.hpp"
#include "hdmerge/execution.hpp"
#include "hdmerge/indicators.hpp"
#include "hdmerge/location_context.hpp"
#include "hdmerge/macroscopic.hpp"
#include "hdmerge/neighbor_scenario.hpp"
#include "hdmerge/trajectory.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hdmerge
{

struct RunConfig
{
  std::filesystem::path maps_dir;
  std::filesystem::path data_dir;
  std::filesystem::path layout_path;
  std::filesystem::path out_dir{"hdmerge_out"};
  std::filesystem::path from_dir;  ///< prior outputs for standalone stages; defaults to out_dir
  std::vector<int> locations;      ///< empty = every location found
  std::vector<double> thresholds{100.0, 150.0, 200.0};
  double outlier_multiplier{3.0};
  std::optional<double> timestep;  ///< overrides the recording frame rate
  int jobs{0};
  std::uint64_t seed{0};
  int synthetic_events{0};  ///< > 0: generate this many synthetic events instead of reading data
  ExtractionParams extraction;
  NeighborSource neighbor_source{NeighborSource::automatic};
  std::vector<std::string> divergence_classes{"car"};

  /// Throws ConfigError on invalid values. `need_inputs` requires a data source.
  void validate(bool need_inputs = true) const;
};

/// key = value file; keys mirror the long CLI flags.
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path & path, RunConfig base = {});

/// Error tagged with the pipeline stage that raised it and the process exit code it maps to.
class StageError : public std::runtime_error
{
public:
  StageError(std::string stage, const std::string & message, int exit_code)
  : std::runtime_error(stage + ": " + message), stage_(std::move(stage)), exit_code_(exit_code)
  {
  }
  const std::string & stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

private:
  std::string stage_;
  int exit_code_;
};

/// 0 success, 2 config, 3 data integrity, 4 internal.
int exit_code_for(const std::exception & error);

/// Runs `fn`, rethrowing any exception as a StageError for `stage`.
template <typename Fn>
decltype(auto) in_stage(const std::string & stage, Fn && fn)
{
  try {
    return fn();
  } catch (const StageError &) {
    throw;
  } catch (const std::exception & e) {
    throw StageError(stage, e.what(), exit_code_for(e));
  }
}

/// Map file for a location below `maps_dir`: `<id>_<name>.osm`, `location<id>[_name].osm` or
/// `<id>.osm`. ConfigError when none or several match.
std::filesystem::path find_map_file(const std::filesystem::path & maps_dir, int location);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path & path);

struct InputDigest
{
  std::string role;  ///< map, layout, recording_meta, tracks_meta, tracks
  std::string path;
  std::uintmax_t bytes{0};
  std::string sha256;
};

struct MergePoint
{
  std::string event_id;
  int recording_id{0};
  int location_id{0};
  TrackId track_id{0};
  VehicleClass vehicle_class{VehicleClass::car};
  double x{0.0};
  double y{0.0};
  bool crossed_solid{false};
};

struct RecordingSummary
{
  int recording_id{0};
  int location_id{0};
  double timestep{0.0};
  std::size_t tracks{0};
  std::size_t rows{0};
  std::size_t on_ramp_tracks{0};
  std::size_t events{0};
  std::size_t rejections{0};
};

enum StageBits : unsigned {
  kStageExtract = 1u << 0,
  kStageClassify = 1u << 1,
  kStageIndicators = 1u << 2,
  kStageMacro = 1u << 3,
  kStageAll = kStageExtract | kStageClassify | kStageIndicators | kStageMacro,
};

struct PipelineData
{
  std::vector<int> locations;
  std::vector<RecordingSummary> recordings;
  std::vector<MergingEvent> events;
  std::vector<Rejection> rejections;
  std::vector<MergePoint> merge_points;
  std::vector<ScenarioAssignment> scenarios;
  std::vector<IndicatorRow> indicators;
  std::vector<EventMacro> macro;
  Diagnostics diagnostics;
  std::vector<InputDigest> inputs;
  std::vector<std::pair<std::string, double>> timings;  ///< stage, seconds
};

/// Loads locations and recordings and runs the requested per-recording stages. When `events`
/// is given, extraction is skipped and those events are used. Recordings are processed
/// independently (in parallel unless `execution` is serial) and merged in recording order.
PipelineData run_pipeline(
  const RunConfig & config, unsigned stages, Execution execution = Execution::parallel,
  const std::vector<MergingEvent> * events = nullptr);

/// Per-recording stages for one already loaded recording.
PipelineData process_recording(
  const Recording & recording, const LocationContext & context, const RunConfig & config,
  unsigned stages, const std::vector<MergingEvent> * events = nullptr);

std::string serialize_merge_points(const std::vector<MergePoint> & points);
std::vector<MergePoint> parse_merge_points(std::string text);
std::string serialize_recording_summaries(const std::vector<RecordingSummary> & rows);
std::string serialize_warnings(const Diagnostics & diagnostics);

}  // namespace hdmerge

#endif  // HDMERGE__PIPELINE_HPP_
