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

#ifndef HDMERGE__REPORT_HPP_
#define HDMERGE__REPORT_HPP_

#include "hdmerge/pipeline.hpp"
#include "hdmerge/statistics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hdmerge
{

/// File to emit, relative to the output directory.
struct OutputFile
{
  std::string path;
  std::string content;
};

using OutputSet = std::vector<OutputFile>;

struct StatisticsData
{
  std::vector<SummaryRow> summary;
  std::vector<DivergenceMatrix> divergence;
};

StatisticsData compute_statistics(
  const std::vector<IndicatorRow> & rows, const RunConfig & config,
  Execution execution = Execution::parallel);

/// Everything the table and figure builders consume.
struct ReportInputs
{
  std::vector<int> locations;
  std::vector<MergingEvent> events;
  std::vector<ScenarioAssignment> scenarios;
  std::vector<IndicatorRow> indicators;
  std::vector<MergePoint> merge_points;
  std::string macro_csv;
};

/// Loads events, scenarios, indicators, macro and merge-point tables from a prior run. A missing
/// table is a ConfigError naming it.
ReportInputs load_report_inputs(const std::filesystem::path & dir);

/// Location x class solid-line merge counts.
std::string solid_line_table(const std::vector<MergingEvent> & events, const std::vector<int> & locations);
/// Mean and outlier-filtered mean of one indicator per (location, class, threshold, scenario).
std::string indicator_mean_table(const std::vector<SummaryRow> & summary, std::string_view indicator);
/// Share of events followed by a second lane change, per group.
std::string consecutive_share_table(const std::vector<IndicatorRow> & rows);

/// Tables (tables/), figure bundles (figures/) and the statistics CSVs.
OutputSet build_report(
  const ReportInputs & inputs, const StatisticsData & stats, const RunConfig & config);

/// Figure families, their files and column contracts.
struct FigureFamily
{
  std::string id;
  std::string file;
  std::vector<std::string> columns;
};
const std::vector<FigureFamily> & figure_families();

struct ManifestInfo
{
  std::string command;
  std::vector<InputDigest> inputs;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::pair<std::string, std::size_t>> counts;
};

/// manifest.json for `outputs`; timings and machine-specific settings live under "run".
std::string manifest_json(const RunConfig & config, const ManifestInfo & info, const OutputSet & outputs);

/// Writes all files into a staging directory inside `out_dir` and then moves them into place.
/// On failure the staging directory is removed and `out_dir` keeps its previous files.
void write_outputs(const std::filesystem::path & out_dir, const OutputSet & outputs);

}  // namespace hdmerge

#endif  // HDMERGE__REPORT_HPP_
