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

#include "hdmerge/pipeline.hpp"
#include "hdmerge/report.hpp"
#include "hdmerge/synthetic.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace
{

using namespace hdmerge;
namespace fs = std::filesystem;

struct Flags
{
  std::string config_file;
  std::string maps_dir;
  std::string data_dir;
  std::string layout;
  std::string out;
  std::string from;
  std::vector<int> locations;
  std::vector<double> thresholds;
  double outlier_multiplier{0.0};
  double timestep{0.0};
  int jobs{-1};
  long long seed{-1};
  int synthetic{-1};
  int lookback{0};
  std::string neighbor_source;
  bool serial{false};
};

void add_common(CLI::App & cmd, Flags & f)
{
  cmd.add_option("--config", f.config_file, "key = value run configuration file");
  cmd.add_option("--maps-dir", f.maps_dir, "directory with lanelet2 .osm maps");
  cmd.add_option("--data-dir", f.data_dir, "directory with <id>_recordingMeta/tracksMeta/tracks.csv");
  cmd.add_option("--layout", f.layout, "merging-area layout file");
  cmd.add_option("--locations", f.locations, "location ids to process")->delimiter(',');
  cmd.add_option("--distance-threshold", f.thresholds, "neighbor distance threshold in m (repeatable)");
  cmd.add_option("--outlier-multiplier", f.outlier_multiplier, "Tukey fence multiplier");
  cmd.add_option("--timestep", f.timestep, "override the recording timestep in s");
  cmd.add_option("--out", f.out, "output directory");
  cmd.add_option("--from", f.from, "directory with prior outputs (default: --out)");
  cmd.add_option("--jobs", f.jobs, "worker threads (0 = all cores)");
  cmd.add_option("--seed", f.seed, "seed for synthetic data");
  cmd.add_option("--synthetic", f.synthetic, "generate this many synthetic events instead of reading data");
  cmd.add_option("--lookback", f.lookback, "frames of confirmation around lane switches");
  cmd.add_option("--neighbor-source", f.neighbor_source, "automatic, dataset or geometric");
  cmd.add_flag("--serial", f.serial, "use the serial reference loops");
}

RunConfig resolve(const Flags & f)
{
  RunConfig c;
  if (!f.config_file.empty()) {
    c = load_run_config(f.config_file, c);
  }
  RunConfig overrides = parse_run_config(
    f.neighbor_source.empty() ? std::string() : "neighbor_source = " + f.neighbor_source, c);
  c = overrides;
  if (!f.maps_dir.empty()) {
    c.maps_dir = f.maps_dir;
  }
  if (!f.data_dir.empty()) {
    c.data_dir = f.data_dir;
  }
  if (!f.layout.empty()) {
    c.layout_path = f.layout;
  }
  if (!f.out.empty()) {
    c.out_dir = f.out;
  }
  c.from_dir = f.from.empty() ? (c.from_dir.empty() ? c.out_dir : c.from_dir) : fs::path(f.from);
  if (!f.locations.empty()) {
    c.locations = f.locations;
  }
  if (!f.thresholds.empty()) {
    c.thresholds = f.thresholds;
  }
  if (f.outlier_multiplier != 0.0) {
    c.outlier_multiplier = f.outlier_multiplier;
  }
  if (f.timestep != 0.0) {
    c.timestep = f.timestep;
  }
  if (f.jobs >= 0) {
    c.jobs = f.jobs;
  }
  if (f.seed >= 0) {
    c.seed = static_cast<std::uint64_t>(f.seed);
  }
  if (f.synthetic >= 0) {
    c.synthetic_events = f.synthetic;
  }
  if (f.lookback != 0) {
    c.extraction.lookback = f.lookback;
  }
  return c;
}

std::string read_prior(const fs::path & dir, const std::string & name)
{
  const auto path = dir / name;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("missing upstream table " + name + " in " + dir.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void finish(
  const std::string & command, const RunConfig & config, OutputSet outputs, const PipelineData * data,
  std::vector<std::pair<std::string, double>> timings)
{
  ManifestInfo info;
  info.command = command;
  if (data) {
    info.inputs = data->inputs;
    info.counts = {
      {"recordings", data->recordings.size()}, {"events", data->events.size()},
      {"rejections", data->rejections.size()}, {"scenario_rows", data->scenarios.size()},
      {"indicator_rows", data->indicators.size()}, {"macro_rows", data->macro.size()},
      {"warnings", data->diagnostics.size()}};
    outputs.push_back({"warnings.csv", serialize_warnings(data->diagnostics)});
  }
  info.timings = std::move(timings);
  const auto name = command == "run" ? std::string("manifest.json") : "manifest_" + command + ".json";
  outputs.push_back({name, manifest_json(config, info, outputs)});
  in_stage("write", [&] { write_outputs(config.out_dir, outputs); });
  std::cout << "hdmerge " << command << ": wrote " << outputs.size() << " files to "
            << config.out_dir.generic_string() << "\n";
  if (data && !data->diagnostics.empty()) {
    std::cerr << "hdmerge: " << data->diagnostics.size() << " warning(s), see warnings.csv\n";
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int dispatch(const std::string & command, const Flags & flags, int synth_count, double solid_fraction)
{
  auto config = in_stage("config", [&] { return resolve(flags); });
  set_thread_count(config.jobs);
  const auto exec = flags.serial ? Execution::serial : Execution::parallel;

  if (command == "synth") {
    in_stage("config", [&] {
      if (synth_count <= 0) {
        throw ConfigError("--count must be positive");
      }
    });
    synth::RandomOptions opts;
    opts.solid_merge_fraction = solid_fraction;
    const auto scenes = in_stage("synth", [&] {
      return synth::generate_batch(synth_count, config.seed, true, opts, config.thresholds);
    });
    in_stage("write", [&] { synth::write_corpus(config.out_dir, scenes); });
    std::cout << "hdmerge synth: wrote " << scenes.size() << " recordings to "
              << config.out_dir.generic_string() << "\n";
    return 0;
  }

  if (command == "stats") {
    in_stage("config", [&] { config.validate(false); });
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = in_stage("stats", [&] {
      return parse_indicators(read_prior(config.from_dir, "indicators.csv"));
    });
    const auto stats = in_stage("stats", [&] { return compute_statistics(rows, config, exec); });
    OutputSet out = {
      {"summary.csv", serialize_summary(stats.summary)},
      {"divergence.csv", serialize_divergence(stats.divergence)}};
    finish(command, config, std::move(out), nullptr, {{"stats", seconds_since(t0)}});
    return 0;
  }

  if (command == "report") {
    in_stage("config", [&] { config.validate(false); });
    const auto t0 = std::chrono::steady_clock::now();
    const auto inputs = in_stage("report", [&] { return load_report_inputs(config.from_dir); });
    const auto stats = in_stage("stats", [&] { return compute_statistics(inputs.indicators, config, exec); });
    auto out = in_stage("report", [&] { return build_report(inputs, stats, config); });
    finish(command, config, std::move(out), nullptr, {{"report", seconds_since(t0)}});
    return 0;
  }

  unsigned stages = 0;
  std::vector<MergingEvent> prior_events;
  const std::vector<MergingEvent> * given = nullptr;
  if (command == "extract") {
    stages = kStageExtract;
  } else if (command == "classify" || command == "indicators" || command == "macro") {
    stages = command == "classify" ? kStageClassify
                                   : (command == "indicators" ? kStageIndicators : kStageMacro);
    prior_events = in_stage(command, [&] { return parse_events(read_prior(config.from_dir, "events.csv")); });
    given = &prior_events;
  } else if (command == "run") {
    stages = kStageAll;
  }

  auto data = run_pipeline(config, stages, exec, given);
  auto timings = data.timings;
  OutputSet out;
  if (command == "ingest" || command == "run") {
    out.push_back({"recordings.csv", serialize_recording_summaries(data.recordings)});
  }
  if (command == "extract" || command == "run") {
    out.push_back({"events.csv", serialize_events(data.events)});
    out.push_back({"rejections.csv", serialize_rejections(data.rejections)});
    out.push_back({"merge_points.csv", serialize_merge_points(data.merge_points)});
  }
  if (command == "extract") {
    out.push_back({"tables/solid_line_merges.csv", solid_line_table(data.events, data.locations)});
  }
  if (command == "classify" || command == "indicators" || command == "run") {
    out.push_back({"scenarios.csv", serialize_scenarios(data.scenarios)});
  }
  if (command == "classify") {
    out.push_back(
      {"tables/scenario_counts.csv",
       serialize_scenario_counts(scenario_count_table(data.scenarios, config.thresholds))});
  }
  if (command == "indicators" || command == "run") {
    out.push_back({"indicators.csv", serialize_indicators(data.indicators)});
  }
  if (command == "macro" || command == "run") {
    out.push_back({"macro.csv", serialize_macro(data.macro)});
  }
  if (command == "run") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto stats = in_stage("stats", [&] { return compute_statistics(data.indicators, config, exec); });
    timings.emplace_back("stats", seconds_since(t0));
    ReportInputs inputs;
    inputs.locations = data.locations;
    inputs.events = data.events;
    inputs.scenarios = data.scenarios;
    inputs.indicators = data.indicators;
    inputs.merge_points = data.merge_points;
    inputs.macro_csv = serialize_macro(data.macro);
    const auto t1 = std::chrono::steady_clock::now();
    auto report = in_stage("report", [&] { return build_report(inputs, stats, config); });
    timings.emplace_back("report", seconds_since(t1));
    for (auto & f : report) {
      out.push_back(std::move(f));
    }
  }
  finish(command, config, std::move(out), &data, std::move(timings));
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Highway on-ramp merging analysis over lanelet2 maps and drone trajectories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(HDMERGE_VERSION));
  Flags flags;
  int synth_count = 0;
  double solid_fraction = 0.0;
  const std::vector<std::pair<std::string, std::string>> commands = {
    {"ingest", "parse and validate recordings"},
    {"extract", "extract merging events and key positions"},
    {"classify", "neighbor timelines and scenario labels (reads events.csv)"},
    {"indicators", "per-event indicators (reads events.csv)"},
    {"macro", "upstream/downstream flow, density and speed (reads events.csv)"},
    {"stats", "summaries and divergence matrices (reads indicators.csv)"},
    {"report", "tables and figure bundles from prior outputs"},
    {"synth", "write a synthetic corpus with ground truth"},
    {"run", "the full pipeline"},
  };
  for (const auto & [name, help] : commands) {
    auto * cmd = app.add_subcommand(name, help);
    add_common(*cmd, flags);
    if (name == "synth") {
      cmd->add_option("--count", synth_count, "number of synthetic events")->required();
      cmd->add_option("--solid-fraction", solid_fraction, "share of solid-line merges");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return 2;
  }
  std::string command;
  for (const auto * sub : app.get_subcommands()) {
    command = sub->get_name();
  }
  try {
    return dispatch(command, flags, synth_count, solid_fraction);
  } catch (const std::exception & e) {
    std::cerr << "hdmerge: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
