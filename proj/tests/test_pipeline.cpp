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

#include "hdmerge/errors.hpp"
#include "hdmerge/pipeline.hpp"
#include "hdmerge/report.hpp"
#include "hdmerge/synthetic.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace hdmerge;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string & name)
{
  const auto dir = fs::temp_directory_path() / ("hdmerge_test_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path & p, const std::string & text)
{
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::string> header_of(const std::string & csv_text)
{
  std::vector<std::string> cols;
  std::string line = csv_text.substr(0, csv_text.find('\n'));
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) {
    cols.push_back(c);
  }
  return cols;
}

std::size_t line_count(const std::string & text)
{
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

RunConfig synthetic_config(int events)
{
  RunConfig c;
  c.synthetic_events = events;
  c.seed = 42;
  return c;
}

struct Outputs
{
  PipelineData data;
  StatisticsData stats;
  OutputSet report;
};

Outputs full_run(const RunConfig & config, Execution exec)
{
  Outputs o;
  o.data = run_pipeline(config, kStageAll, exec);
  o.stats = compute_statistics(o.data.indicators, config, exec);
  ReportInputs in;
  in.locations = o.data.locations;
  in.events = o.data.events;
  in.scenarios = o.data.scenarios;
  in.indicators = o.data.indicators;
  in.merge_points = o.data.merge_points;
  in.macro_csv = serialize_macro(o.data.macro);
  o.report = build_report(in, o.stats, config);
  return o;
}

const std::string & file_in(const OutputSet & set, const std::string & path)
{
  for (const auto & f : set) {
    if (f.path == path) {
      return f.content;
    }
  }
  throw std::runtime_error("missing output " + path);
}

}  // namespace

TEST(RunConfigFile, KeysMirrorFlags)
{
  const auto c = parse_run_config(
    "maps-dir = m\ndata_dir = d\nlayout = l.conf\nout = o\nlocations = 2, 5\n"
    "distance-threshold = 120,180\noutlier_multiplier = 1.5\ntimestep = 0.04\njobs = 3\n"
    "seed = 9\nlookback = 7\nneighbor-source = geometric\ndivergence_classes = car,truck\n");
  EXPECT_EQ(c.maps_dir, fs::path("m"));
  EXPECT_EQ(c.data_dir, fs::path("d"));
  EXPECT_EQ(c.layout_path, fs::path("l.conf"));
  EXPECT_EQ(c.out_dir, fs::path("o"));
  EXPECT_EQ(c.locations, (std::vector<int>{2, 5}));
  EXPECT_EQ(c.thresholds, (std::vector<double>{120.0, 180.0}));
  EXPECT_EQ(c.outlier_multiplier, 1.5);
  EXPECT_EQ(c.timestep, 0.04);
  EXPECT_EQ(c.jobs, 3);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.extraction.lookback, 7);
  EXPECT_EQ(c.neighbor_source, NeighborSource::geometric);
  EXPECT_EQ(c.divergence_classes, (std::vector<std::string>{"car", "truck"}));
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfigFile, UnknownKeyOrBadValue)
{
  EXPECT_THROW(parse_run_config("colour = red\n"), ConfigError);
  EXPECT_THROW(parse_run_config("jobs = many\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[section]\nseed = 1\n"), ConfigError);
}

TEST(RunConfigFile, Validation)
{
  RunConfig c;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(c.validate(false));
  c.synthetic_events = 4;
  EXPECT_NO_THROW(c.validate());
  c.thresholds = {100.0, -1.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c.thresholds = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c.thresholds = {100.0};
  c.outlier_multiplier = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.outlier_multiplier = 3.0;
  c.data_dir = "d";
  c.synthetic_events = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ExitCodes, ByErrorKind)
{
  EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
  EXPECT_EQ(exit_code_for(ParseError("x")), 3);
  EXPECT_EQ(exit_code_for(IntegrityError("x")), 3);
  EXPECT_EQ(exit_code_for(DomainError("x")), 4);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 4);
  try {
    in_stage("extract", [] { throw IntegrityError("broken"); });
    FAIL();
  } catch (const StageError & e) {
    EXPECT_EQ(e.stage(), "extract");
    EXPECT_EQ(e.exit_code(), 3);
    EXPECT_EQ(exit_code_for(e), 3);
  }
}

TEST(MapFiles, NamingVariants)
{
  const auto dir = scratch("maps");
  spit(dir / "2_aachen.osm", "");
  spit(dir / "sub" / "location5.osm", "");
  spit(dir / "06.osm", "");
  spit(dir / "7_a.osm", "");
  spit(dir / "7_b.osm", "");
  EXPECT_EQ(find_map_file(dir, 2).filename(), "2_aachen.osm");
  EXPECT_EQ(find_map_file(dir, 5).filename(), "location5.osm");
  EXPECT_EQ(find_map_file(dir, 6).filename(), "06.osm");
  EXPECT_THROW(find_map_file(dir, 3), ConfigError);
  EXPECT_THROW(find_map_file(dir, 7), ConfigError);
}

TEST(Hashing, KnownDigest)
{
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Pipeline, EmptyDataDirectoryIsConfigError)
{
  const auto dir = scratch("empty");
  synth::write_corpus(dir, {});
  RunConfig c;
  c.maps_dir = dir / "maps";
  c.data_dir = dir / "data";
  c.layout_path = dir / "layout.conf";
  try {
    run_pipeline(c, kStageAll);
    FAIL();
  } catch (const std::exception & e) {
    EXPECT_EQ(exit_code_for(e), 2) << e.what();
  }
}

TEST(Pipeline, SerialAndParallelAgree)
{
  const auto config = synthetic_config(32);
  const auto a = full_run(config, Execution::serial);
  const auto b = full_run(config, Execution::parallel);
  EXPECT_EQ(serialize_events(a.data.events), serialize_events(b.data.events));
  EXPECT_EQ(serialize_scenarios(a.data.scenarios), serialize_scenarios(b.data.scenarios));
  EXPECT_EQ(serialize_indicators(a.data.indicators), serialize_indicators(b.data.indicators));
  EXPECT_EQ(serialize_macro(a.data.macro), serialize_macro(b.data.macro));
  ASSERT_EQ(a.report.size(), b.report.size());
  for (std::size_t i = 0; i < a.report.size(); ++i) {
    EXPECT_EQ(a.report[i].content, b.report[i].content) << a.report[i].path;
  }
}

TEST(Pipeline, DiskCorpusMatchesInMemoryRun)
{
  const auto dir = scratch("disk");
  const auto scenes = synth::generate_batch(12, 42);
  synth::write_corpus(dir, scenes);
  RunConfig disk;
  disk.maps_dir = dir / "maps";
  disk.data_dir = dir / "data";
  disk.layout_path = dir / "layout.conf";
  const auto from_disk = run_pipeline(disk, kStageAll);
  const auto in_memory = run_pipeline(synthetic_config(12), kStageAll);
  EXPECT_EQ(serialize_events(from_disk.events), serialize_events(in_memory.events));
  EXPECT_EQ(serialize_scenarios(from_disk.scenarios), serialize_scenarios(in_memory.scenarios));
  EXPECT_TRUE(from_disk.diagnostics.empty());
  EXPECT_EQ(from_disk.inputs.size(), 2u + 3u * scenes.size());
  for (const auto & in : from_disk.inputs) {
    const auto base = in.role == "map" ? disk.maps_dir : (in.role == "layout" ? fs::path{} : disk.data_dir);
    EXPECT_EQ(in.sha256, sha256_file(base / in.path)) << in.path;
  }
  const std::vector<int> locations = {synth::kLocationId};
  EXPECT_EQ(from_disk.locations, locations);
}

TEST(Pipeline, StagesFromPriorEvents)
{
  const auto config = synthetic_config(16);
  const auto all = run_pipeline(config, kStageAll);
  const auto events = parse_events(serialize_events(all.events));
  const auto classified = run_pipeline(config, kStageClassify, Execution::parallel, &events);
  EXPECT_EQ(serialize_scenarios(classified.scenarios), serialize_scenarios(all.scenarios));
  EXPECT_TRUE(classified.indicators.empty());
  const auto macro = run_pipeline(config, kStageMacro, Execution::parallel, &events);
  EXPECT_EQ(serialize_macro(macro.macro), serialize_macro(all.macro));
}

TEST(Pipeline, ThresholdMonotonicity)
{
  auto config = synthetic_config(64);
  const auto data = run_pipeline(config, kStageClassify | kStageExtract);
  std::map<double, int> no_rear;
  std::map<double, int> with_rear;
  for (const auto & s : data.scenarios) {
    const auto l = s.result.label;
    if (l == ScenarioLabel::A || l == ScenarioLabel::B || l == ScenarioLabel::C) {
      no_rear[s.threshold] += 1;
    }
    if (l == ScenarioLabel::E || l == ScenarioLabel::F || l == ScenarioLabel::H) {
      with_rear[s.threshold] += 1;
    }
  }
  EXPECT_GE(no_rear[100.0], no_rear[150.0]);
  EXPECT_GE(no_rear[150.0], no_rear[200.0]);
  EXPECT_LE(with_rear[100.0], with_rear[150.0]);
  EXPECT_LE(with_rear[150.0], with_rear[200.0]);
}

TEST(Report, BundlesFollowTheirColumnContracts)
{
  const auto config = synthetic_config(48);
  const auto o = full_run(config, Execution::parallel);
  const auto bundles = nlohmann::json::parse(file_in(o.report, "figures/bundles.json"));
  ASSERT_EQ(bundles.size(), figure_families().size());
  for (const auto & family : figure_families()) {
    const auto & text = file_in(o.report, family.file);
    EXPECT_EQ(header_of(text), family.columns) << family.id;
  }
  const auto & js = file_in(o.report, "figures/js_heatmaps.csv");
  EXPECT_EQ(line_count(js) - 1, 64u * o.stats.divergence.size());

  // Every macro scatter row joins to a scenario label.
  const auto & scatter = file_in(o.report, "figures/macro_scatter.csv");
  const auto cols = header_of(scatter);
  const auto label_col = std::find(cols.begin(), cols.end(), "scenario") - cols.begin();
  ASSERT_LT(static_cast<std::size_t>(label_col), cols.size());
  std::istringstream lines(scatter);
  std::string line;
  std::getline(lines, line);
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      cells.push_back(c);
    }
    ASSERT_GT(cells.size(), static_cast<std::size_t>(label_col));
    EXPECT_EQ(cells[static_cast<std::size_t>(label_col)].size(), 1u);
    ++rows;
  }
  EXPECT_EQ(rows, 2u * o.data.macro.size() * config.thresholds.size());
}

TEST(Report, ScenarioCountsMatchAssignments)
{
  const auto config = synthetic_config(24);
  const auto o = full_run(config, Execution::parallel);
  const auto & table = file_in(o.report, "tables/scenario_counts.csv");
  EXPECT_NE(table.find("all,all,100,A,3"), std::string::npos) << table.substr(0, 400);
}

TEST(Report, MissingUpstreamTable)
{
  const auto dir = scratch("missing");
  EXPECT_THROW(load_report_inputs(dir), ConfigError);
}

TEST(Outputs, StagedWriteAndManifest)
{
  const auto dir = scratch("out");
  spit(dir / "keep.txt", "old");
  const OutputSet outputs = {{"a.csv", "x\n1\n"}, {"tables/b.csv", "y\n2\n"}};
  write_outputs(dir, outputs);
  EXPECT_EQ(slurp(dir / "a.csv"), "x\n1\n");
  EXPECT_EQ(slurp(dir / "tables" / "b.csv"), "y\n2\n");
  EXPECT_EQ(slurp(dir / "keep.txt"), "old");
  EXPECT_FALSE(fs::exists(dir / ".staging"));

  ManifestInfo info;
  info.command = "run";
  info.timings = {{"extract", 0.5}};
  const auto m1 = nlohmann::json::parse(manifest_json(synthetic_config(4), info, outputs));
  info.timings = {{"extract", 0.7}};
  const auto m2 = nlohmann::json::parse(manifest_json(synthetic_config(4), info, outputs));
  EXPECT_EQ(m1["outputs"][0]["path"], "a.csv");
  EXPECT_EQ(m1["outputs"][0]["sha256"], sha256_hex("x\n1\n"));
  auto strip = [](nlohmann::json j) {
    j.erase("run");
    return j;
  };
  EXPECT_EQ(strip(m1), strip(m2));
  EXPECT_NE(m1["run"], m2["run"]);
}

TEST(Outputs, FailedWriteKeepsPreviousFiles)
{
  const auto dir = scratch("fail");
  spit(dir / "a.csv", "previous");
  // A regular file where a directory is needed makes the move fail.
  spit(dir / "tables", "blocker");
  const OutputSet outputs = {{"a.csv", "new"}, {"tables/b.csv", "y"}};
  EXPECT_ANY_THROW(write_outputs(dir, outputs));
  EXPECT_EQ(slurp(dir / "a.csv"), "previous");
  EXPECT_FALSE(fs::exists(dir / ".staging"));
}
