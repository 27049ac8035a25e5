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

#include "hdmerge/report.hpp"

#include "hdmerge/csv.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#ifndef HDMERGE_VERSION
#define HDMERGE_VERSION "0.0.0"
#endif

namespace hdmerge
{

namespace
{

namespace fs = std::filesystem;

std::string read_text(const fs::path & path, const std::string & what)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("missing upstream table " + what + " (" + path.string() + ")");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> header_of(const std::string & csv_text)
{
  csv::Reader r(csv_text.substr(0, csv_text.find('\n') + 1));
  return r.read_header();
}

int class_rank(std::string_view c)
{
  static const std::array<std::string_view, 5> order = {"car", "truck", "van", "other", "all"};
  const auto it = std::find(order.begin(), order.end(), c);
  return static_cast<int>(it - order.begin());
}

struct GroupKey
{
  std::string location;
  std::string vehicle_class;
  double threshold{0.0};
  std::string scenario;

  auto rank() const
  {
    const bool loc_all = location == "all";
    const long loc = loc_all ? 0 : std::stol(location);
    const int scen = scenario == "all" ? 8 : static_cast<int>(scenario_label_from_string(scenario));
    return std::make_tuple(threshold, loc_all, loc, class_rank(vehicle_class), scen);
  }
  bool operator<(const GroupKey & o) const { return rank() < o.rank(); }
};

struct ConsecutiveGroup
{
  std::size_t n_events{0};
  std::size_t n_consecutive{0};
  std::vector<double> durations;
};

std::map<GroupKey, ConsecutiveGroup> consecutive_groups(const std::vector<IndicatorRow> & rows)
{
  std::map<GroupKey, ConsecutiveGroup> groups;
  for (const auto & r : rows) {
    const auto loc = std::to_string(r.scenario.location_id);
    const auto cls = std::string(to_string(r.scenario.vehicle_class));
    const auto lab = std::string(to_string(r.scenario.result.label));
    for (const auto & l : {loc, std::string("all")}) {
      for (const auto & c : {cls, std::string("all")}) {
        for (const auto & s : {lab, std::string("all")}) {
          auto & g = groups[{l, c, r.scenario.threshold, s}];
          ++g.n_events;
          if (r.indicators.consecutive_lc_duration) {
            ++g.n_consecutive;
            g.durations.push_back(*r.indicators.consecutive_lc_duration);
          }
        }
      }
    }
  }
  return groups;
}

std::vector<SummaryRow> filter_summary(
  const std::vector<SummaryRow> & summary, std::initializer_list<std::string_view> indicators)
{
  std::vector<SummaryRow> out;
  for (const auto & r : summary) {
    if (std::find(indicators.begin(), indicators.end(), r.indicator) != indicators.end()) {
      out.push_back(r);
    }
  }
  return out;
}

std::string macro_scatter(const std::string & macro_csv, const std::vector<ScenarioAssignment> & scenarios)
{
  std::multimap<std::string, const ScenarioAssignment *> by_event;
  for (const auto & s : scenarios) {
    by_event.emplace(s.event_id, &s);
  }
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"event_id", "location_id", "class", "threshold", "scenario", "region", "q_veh_h", "k_veh_km",
     "v_km_h"});
  if (macro_csv.empty()) {
    return out.str();
  }
  csv::Reader r(macro_csv);
  r.read_header();
  const auto c_id = r.require("event_id");
  const auto c_loc = r.require("location_id");
  const auto c_class = r.require("class");
  const auto c_region = r.require("region");
  const auto c_q = r.require("q_veh_h");
  const auto c_k = r.require("k_veh_km");
  const auto c_v = r.require("v_km_h");
  std::vector<std::string_view> f;
  while (r.next(f)) {
    const auto [lo, hi] = by_event.equal_range(std::string(f[c_id]));
    for (auto it = lo; it != hi; ++it) {
      w.row(
        {std::string(f[c_id]), std::string(f[c_loc]), std::string(f[c_class]),
         csv::format_double(it->second->threshold), std::string(to_string(it->second->result.label)),
         std::string(f[c_region]), std::string(f[c_q]), std::string(f[c_k]), std::string(f[c_v])});
    }
  }
  return out.str();
}

std::string consecutive_bundle(const std::vector<IndicatorRow> & rows, double fence_multiplier)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"location", "class", "threshold", "scenario", "n_events", "n_consecutive", "share",
     "mean_duration", "filtered_mean_duration"});
  for (const auto & [k, g] : consecutive_groups(rows)) {
    std::string mean;
    std::string filtered;
    if (!g.durations.empty()) {
      const auto s = summarize(g.durations, fence_multiplier);
      mean = csv::format_double(s.mean);
      filtered = csv::format_double(s.filtered_mean);
    }
    w.row(
      {k.location, k.vehicle_class, csv::format_double(k.threshold), k.scenario,
       std::to_string(g.n_events), std::to_string(g.n_consecutive),
       csv::format_double(static_cast<double>(g.n_consecutive) / static_cast<double>(g.n_events)),
       mean, filtered});
  }
  return out.str();
}

}  // namespace

StatisticsData compute_statistics(
  const std::vector<IndicatorRow> & rows, const RunConfig & config, Execution execution)
{
  StatisticsData s;
  s.summary = summary_table(rows, config.outlier_multiplier);
  DivergenceOptions options;
  options.classes = config.divergence_classes;
  s.divergence = divergence_matrices(rows, options, execution);
  return s;
}

ReportInputs load_report_inputs(const std::filesystem::path & dir)
{
  ReportInputs in;
  in.events = parse_events(read_text(dir / "events.csv", "events.csv"));
  in.scenarios = parse_scenarios(read_text(dir / "scenarios.csv", "scenarios.csv"));
  in.indicators = parse_indicators(read_text(dir / "indicators.csv", "indicators.csv"));
  in.macro_csv = read_text(dir / "macro.csv", "macro.csv");
  in.merge_points = parse_merge_points(read_text(dir / "merge_points.csv", "merge_points.csv"));
  std::set<int> locs;
  for (const auto & e : in.events) {
    locs.insert(e.location_id);
  }
  in.locations.assign(locs.begin(), locs.end());
  return in;
}

std::string solid_line_table(const std::vector<MergingEvent> & events, const std::vector<int> & locations)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"location", "class", "count"});
  for (const auto & r : count_solid_line_merges(events, locations)) {
    w.row({std::to_string(r.location_id), std::string(to_string(r.vehicle_class)), std::to_string(r.count)});
  }
  return out.str();
}

std::string indicator_mean_table(const std::vector<SummaryRow> & summary, std::string_view indicator)
{
  std::vector<const SummaryRow *> rows;
  for (const auto & r : summary) {
    if (r.indicator == indicator && r.scenario != "all") {
      rows.push_back(&r);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow * a, const SummaryRow * b) {
    return GroupKey{a->location, a->vehicle_class, a->threshold, a->scenario} <
           GroupKey{b->location, b->vehicle_class, b->threshold, b->scenario};
  });
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"location", "class", "threshold", "scenario", "n", "mean", "filtered_mean"});
  for (const auto * r : rows) {
    w.row(
      {r->location, r->vehicle_class, csv::format_double(r->threshold), r->scenario,
       std::to_string(r->summary.n), csv::format_double(r->summary.mean),
       csv::format_double(r->summary.filtered_mean)});
  }
  return out.str();
}

std::string consecutive_share_table(const std::vector<IndicatorRow> & rows)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"location", "class", "threshold", "scenario", "n_events", "n_consecutive", "share"});
  for (const auto & [k, g] : consecutive_groups(rows)) {
    if (k.scenario == "all") {
      continue;
    }
    w.row(
      {k.location, k.vehicle_class, csv::format_double(k.threshold), k.scenario,
       std::to_string(g.n_events), std::to_string(g.n_consecutive),
       csv::format_double(static_cast<double>(g.n_consecutive) / static_cast<double>(g.n_events))});
  }
  return out.str();
}

const std::vector<FigureFamily> & figure_families()
{
  static const std::vector<FigureFamily> families = [] {
    const auto summary_cols = header_of(serialize_summary({}));
    const auto merge_cols = header_of(serialize_merge_points({}));
    const auto js_cols = header_of(serialize_divergence({}));
    const auto macro_cols = header_of(macro_scatter({}, {}));
    const auto lc_cols = header_of(consecutive_bundle({}, 3.0));
    return std::vector<FigureFamily>{
      {"merge_scatter", "figures/merge_points.csv", merge_cols},
      {"boxplots", "figures/boxplots.csv", summary_cols},
      {"headways", "figures/headways.csv", summary_cols},
      {"js_heatmaps", "figures/js_heatmaps.csv", js_cols},
      {"ttc", "figures/ttc.csv", summary_cols},
      {"macro_scatter", "figures/macro_scatter.csv", macro_cols},
      {"consecutive_lc", "figures/consecutive_lc.csv", lc_cols},
    };
  }();
  return families;
}

OutputSet build_report(const ReportInputs & inputs, const StatisticsData & stats, const RunConfig & config)
{
  OutputSet out;
  out.push_back({"summary.csv", serialize_summary(stats.summary)});
  out.push_back({"divergence.csv", serialize_divergence(stats.divergence)});

  out.push_back({"tables/solid_line_merges.csv", solid_line_table(inputs.events, inputs.locations)});
  out.push_back(
    {"tables/scenario_counts.csv",
     serialize_scenario_counts(scenario_count_table(inputs.scenarios, config.thresholds))});
  out.push_back({"tables/mean_distance_ratio.csv", indicator_mean_table(stats.summary, "distance_ratio")});
  out.push_back({"tables/mean_duration.csv", indicator_mean_table(stats.summary, "duration")});
  out.push_back({"tables/consecutive_lc_share.csv", consecutive_share_table(inputs.indicators)});
  out.push_back(
    {"tables/consecutive_lc_duration.csv",
     indicator_mean_table(stats.summary, "consecutive_lc_duration")});

  out.push_back({"figures/merge_points.csv", serialize_merge_points(inputs.merge_points)});
  out.push_back({"figures/boxplots.csv", serialize_summary(stats.summary)});
  out.push_back(
    {"figures/headways.csv",
     serialize_summary(filter_summary(stats.summary, {"lead_dhw", "lead_thw", "rear_dhw", "rear_thw"}))});
  out.push_back({"figures/js_heatmaps.csv", serialize_divergence(stats.divergence)});
  out.push_back(
    {"figures/ttc.csv", serialize_summary(filter_summary(stats.summary, {"min_ttc_lead", "min_ttc_rear"}))});
  out.push_back({"figures/macro_scatter.csv", macro_scatter(inputs.macro_csv, inputs.scenarios)});
  out.push_back(
    {"figures/consecutive_lc.csv", consecutive_bundle(inputs.indicators, config.outlier_multiplier)});

  nlohmann::ordered_json bundles = nlohmann::ordered_json::array();
  for (const auto & f : figure_families()) {
    bundles.push_back({{"family", f.id}, {"file", f.file}, {"columns", f.columns}});
  }
  out.push_back({"figures/bundles.json", bundles.dump(2) + "\n"});
  return out;
}

std::string manifest_json(const RunConfig & config, const ManifestInfo & info, const OutputSet & outputs)
{
  using nlohmann::ordered_json;
  ordered_json m;
  m["tool"] = "hdmerge";
  m["version"] = HDMERGE_VERSION;
  m["command"] = info.command;

  ordered_json c;
  c["maps_dir"] = config.maps_dir.generic_string();
  c["data_dir"] = config.data_dir.generic_string();
  c["layout"] = config.layout_path.generic_string();
  c["locations"] = config.locations;
  c["distance_thresholds"] = config.thresholds;
  c["outlier_multiplier"] = config.outlier_multiplier;
  c["timestep_override"] = config.timestep ? ordered_json(*config.timestep) : ordered_json(nullptr);
  c["seed"] = config.seed;
  c["synthetic_events"] = config.synthetic_events;
  c["lookback"] = config.extraction.lookback;
  c["offset_jump_tolerance_frames"] = config.extraction.offset_jump_tolerance;
  c["min_lane_jump_m"] = config.extraction.min_lane_jump;
  c["neighbor_source"] = config.neighbor_source == NeighborSource::automatic
                           ? "automatic"
                           : (config.neighbor_source == NeighborSource::dataset ? "dataset" : "geometric");
  c["divergence_classes"] = config.divergence_classes;
  m["config"] = c;

  ordered_json inputs = ordered_json::array();
  for (const auto & d : info.inputs) {
    inputs.push_back({{"role", d.role}, {"path", d.path}, {"bytes", d.bytes}, {"sha256", d.sha256}});
  }
  m["inputs"] = inputs;

  const KdeSettings kde;
  ordered_json k;
  k["quantile_method"] = "linear interpolation between closest ranks, h = (n - 1) p";
  k["outlier_rule"] = "Tukey fences q1 - M iqr, q3 + M iqr";
  k["filtered_mean"] = "mean of values inside the fences";
  k["kde_kernel"] = "gaussian";
  k["bandwidth_rule"] = "1.06 min(sd, iqr / 1.349) n^(-1/5); sd when iqr = 0; floor 1e-6 max(range, |mean|, 1)";
  k["kde_grid_points"] = kde.grid_points;
  k["kde_grid_padding_bandwidths"] = kde.grid_padding;
  k["kde_normalization"] = "trapezoid integral rescaled to 1";
  k["kde_min_samples"] = kde.min_samples;
  k["js_log_base"] = 2;
  k["js_density_floor"] = kde.density_floor;
  k["js_integration"] = "trapezoid on the pooled grid";
  k["neighbor_tie_break"] = "lower track id";
  k["neighbor_gap"] = "bumper to bumper along the outer mainline chain";
  k["alongside_rule"] = "|ds| < (ego length + other length) / 2";
  k["ttc"] = "two-dimensional, center points, over [t_D, t_F]";
  k["lateral_fit"] = "least-squares quintic in normalized time over [t_D, t_F]";
  k["distance_ratio_tolerance"] = 1e-6;
  k["edie_region"] = "Area 4 (upstream) and Area 5 (downstream) over [t_B, t_F)";
  k["solid_line_merges"] = "counted, excluded from scenarios and indicators";
  m["constants"] = k;

  ordered_json counts;
  for (const auto & [name, n] : info.counts) {
    counts[name] = n;
  }
  m["counts"] = counts;

  ordered_json outs = ordered_json::array();
  for (const auto & f : outputs) {
    outs.push_back({{"path", f.path}, {"bytes", f.content.size()}, {"sha256", sha256_hex(f.content)}});
  }
  m["outputs"] = outs;

  ordered_json run;
  run["out_dir"] = config.out_dir.generic_string();
  run["jobs"] = config.jobs;
  run["threads"] = thread_count();
  ordered_json timings;
  double total = 0.0;
  for (const auto & [stage, s] : info.timings) {
    timings[stage] = s;
    total += s;
  }
  run["timings_s"] = timings;
  run["wall_s"] = total;
  m["run"] = run;
  return m.dump(2) + "\n";
}

void write_outputs(const std::filesystem::path & out_dir, const OutputSet & outputs)
{
  fs::create_directories(out_dir);
  const auto staging = out_dir / ".staging";
  fs::remove_all(staging);
  try {
    for (const auto & f : outputs) {
      const auto path = staging / f.path;
      fs::create_directories(path.parent_path());
      std::ofstream out(path, std::ios::binary);
      out.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
      if (!out) {
        throw std::runtime_error("failed writing " + path.string());
      }
    }
    for (const auto & f : outputs) {
      fs::create_directories((out_dir / f.path).parent_path());
    }
    for (const auto & f : outputs) {
      fs::rename(staging / f.path, out_dir / f.path);
    }
    fs::remove_all(staging);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

}  // namespace hdmerge
