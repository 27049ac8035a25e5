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

#include "hdmerge/csv.hpp"
#include "hdmerge/recording_index.hpp"
#include "hdmerge/synthetic.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

namespace hdmerge
{

namespace
{

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string & text)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

double to_double(const std::string & key, const std::string & value)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
  }
}

long long to_int(const std::string & key, const std::string & value)
{
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not an integer");
  }
}

NeighborSource neighbor_source_from_string(const std::string & s)
{
  if (s == "automatic") {
    return NeighborSource::automatic;
  }
  if (s == "dataset") {
    return NeighborSource::dataset;
  }
  if (s == "geometric") {
    return NeighborSource::geometric;
  }
  throw ConfigError("neighbor_source must be automatic, dataset or geometric, not '" + s + "'");
}

InputDigest digest(const std::string & role, const fs::path & path, const fs::path & base)
{
  InputDigest d;
  d.role = role;
  d.path = base.empty() ? path.generic_string() : fs::relative(path, base).generic_string();
  d.bytes = fs::file_size(path);
  d.sha256 = sha256_file(path);
  return d;
}

class Stopwatch
{
public:
  double lap()
  {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

private:
  std::chrono::steady_clock::time_point last_{std::chrono::steady_clock::now()};
};

void append(PipelineData & into, PipelineData && part)
{
  auto move_all = [](auto & dst, auto & src) {
    dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
  };
  move_all(into.recordings, part.recordings);
  move_all(into.events, part.events);
  move_all(into.rejections, part.rejections);
  move_all(into.merge_points, part.merge_points);
  move_all(into.scenarios, part.scenarios);
  move_all(into.indicators, part.indicators);
  move_all(into.macro, part.macro);
  into.diagnostics.append(part.diagnostics);
}

template <typename Work>
void for_each_index(std::size_t n, Execution execution, Work && work)
{
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      work(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (execution == Execution::parallel) {
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
      guarded(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      guarded(i);
    }
  }
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace

void RunConfig::validate(bool need_inputs) const
{
  if (thresholds.empty()) {
    throw ConfigError("at least one distance threshold is required");
  }
  for (const double t : thresholds) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw ConfigError("distance thresholds must be positive, got " + csv::format_double(t));
    }
  }
  if (!(outlier_multiplier > 0.0) || !std::isfinite(outlier_multiplier)) {
    throw ConfigError("outlier multiplier must be positive");
  }
  if (timestep && !(*timestep > 0.0)) {
    throw ConfigError("timestep override must be positive");
  }
  if (jobs < 0) {
    throw ConfigError("jobs must be non-negative");
  }
  if (synthetic_events < 0) {
    throw ConfigError("synthetic event count must be non-negative");
  }
  if (extraction.lookback < 1) {
    throw ConfigError("lookback must be at least one frame");
  }
  if (need_inputs && synthetic_events == 0) {
    if (data_dir.empty()) {
      throw ConfigError("no input recordings: pass --data-dir or --synthetic");
    }
    if (maps_dir.empty() || layout_path.empty()) {
      throw ConfigError("--maps-dir and --layout are required with --data-dir");
    }
  }
}

RunConfig parse_run_config(std::string_view text, RunConfig base)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error & e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  auto & c = base;
  for (const auto & [key, node] : tree) {
    if (!node.empty()) {
      throw ConfigError("run config: sections are not supported ('" + key + "')");
    }
    const auto value = node.get_value<std::string>();
    if (key == "maps_dir" || key == "maps-dir") {
      c.maps_dir = value;
    } else if (key == "data_dir" || key == "data-dir") {
      c.data_dir = value;
    } else if (key == "layout") {
      c.layout_path = value;
    } else if (key == "out") {
      c.out_dir = value;
    } else if (key == "from") {
      c.from_dir = value;
    } else if (key == "locations") {
      c.locations.clear();
      for (const auto & v : split_list(value)) {
        c.locations.push_back(static_cast<int>(to_int(key, v)));
      }
    } else if (key == "distance_threshold" || key == "distance-threshold") {
      c.thresholds.clear();
      for (const auto & v : split_list(value)) {
        c.thresholds.push_back(to_double(key, v));
      }
    } else if (key == "outlier_multiplier" || key == "outlier-multiplier") {
      c.outlier_multiplier = to_double(key, value);
    } else if (key == "timestep") {
      c.timestep = to_double(key, value);
    } else if (key == "jobs") {
      c.jobs = static_cast<int>(to_int(key, value));
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "synthetic") {
      c.synthetic_events = static_cast<int>(to_int(key, value));
    } else if (key == "lookback") {
      c.extraction.lookback = static_cast<int>(to_int(key, value));
    } else if (key == "neighbor_source" || key == "neighbor-source") {
      c.neighbor_source = neighbor_source_from_string(value);
    } else if (key == "divergence_classes" || key == "divergence-classes") {
      c.divergence_classes = split_list(value);
    } else {
      throw ConfigError("run config: unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path & path, RunConfig base)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), std::move(base));
}

std::filesystem::path find_map_file(const std::filesystem::path & maps_dir, int location)
{
  static const std::regex pattern(R"((?:location)?0*(\d+)(?:[_\-.][^/]*)?\.osm)", std::regex::icase);
  std::vector<std::filesystem::path> hits;
  if (std::filesystem::is_directory(maps_dir)) {
    for (const auto & entry : std::filesystem::recursive_directory_iterator(maps_dir)) {
      std::smatch m;
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && std::regex_match(name, m, pattern) && std::stoi(m[1].str()) == location) {
        hits.push_back(entry.path());
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  if (hits.empty()) {
    throw ConfigError("no lanelet2 map for location " + std::to_string(location) + " in " + maps_dir.string());
  }
  if (hits.size() > 1) {
    throw ConfigError("several lanelet2 maps match location " + std::to_string(location) + " in " + maps_dir.string());
  }
  return hits.front();
}

int exit_code_for(const std::exception & error)
{
  if (const auto * s = dynamic_cast<const StageError *>(&error)) {
    return s->exit_code();
  }
  if (dynamic_cast<const ConfigError *>(&error)) {
    return 2;
  }
  if (
    dynamic_cast<const ParseError *>(&error) || dynamic_cast<const IntegrityError *>(&error) ||
    dynamic_cast<const SchemaError *>(&error)) {
    return 3;
  }
  return 4;
}

std::string sha256_hex(std::string_view data)
{
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read " + path.string());
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

PipelineData process_recording(
  const Recording & recording, const LocationContext & context, const RunConfig & config,
  unsigned stages, const std::vector<MergingEvent> * events)
{
  PipelineData out;
  const auto tag = " [recording " + std::to_string(recording.meta.recording_id) + "]";
  RecordingSummary summary;
  summary.recording_id = recording.meta.recording_id;
  summary.location_id = recording.meta.location_id;
  summary.timestep = recording.meta.timestep;
  summary.tracks = recording.tracks.size();
  for (const auto & t : recording.tracks) {
    summary.rows += t.frames.size();
  }

  std::vector<MergingEvent> mine;
  if (events) {
    for (const auto & e : *events) {
      if (e.recording_id == recording.meta.recording_id) {
        mine.push_back(e);
      }
    }
  } else if (stages != 0) {
    auto result = in_stage("extract" + tag, [&] {
      return extract_events(recording, context, config.extraction, out.diagnostics);
    });
    summary.on_ramp_tracks = static_cast<std::size_t>(std::count_if(
      result.routes.begin(), result.routes.end(),
      [](const TrackRoute & r) { return r.route == RouteClass::on_ramp_merging; }));
    mine = std::move(result.events);
    out.rejections = std::move(result.rejections);
  }
  summary.events = mine.size();
  summary.rejections = out.rejections.size();
  for (const auto & e : mine) {
    const auto * track = recording.find(e.track_id);
    const auto * f = track ? track->at(e.t_F) : nullptr;
    if (!f) {
      throw StageError("extract" + tag, "event " + e.id() + " refers to a missing frame", 3);
    }
    out.merge_points.push_back(
      {e.id(), e.recording_id, e.location_id, e.track_id, e.vehicle_class, f->center.x, f->center.y,
       e.crossed_solid});
  }

  if (stages & (kStageClassify | kStageIndicators | kStageMacro)) {
    const RecordingIndex index(recording, context);
    for (const auto & e : mine) {
      if (!e.crossed_solid && (stages & (kStageClassify | kStageIndicators))) {
        for (const double tau : config.thresholds) {
          const auto timeline = in_stage("classify" + tag, [&] {
            return match_neighbors(e, index, tau, config.neighbor_source);
          });
          ScenarioAssignment a;
          a.event_id = e.id();
          a.recording_id = e.recording_id;
          a.location_id = e.location_id;
          a.track_id = e.track_id;
          a.vehicle_class = e.vehicle_class;
          a.threshold = tau;
          a.result = classify_scenario(timeline);
          if (stages & kStageIndicators) {
            auto set = in_stage("indicators" + tag, [&] { return compute_indicators(e, timeline, index); });
            out.indicators.push_back({a, std::move(set)});
          }
          out.scenarios.push_back(std::move(a));
        }
      }
      if (stages & kStageMacro) {
        out.macro.push_back(in_stage("macro" + tag, [&] { return event_macro(e, index); }));
      }
    }
  }
  out.events = std::move(mine);
  out.recordings.push_back(summary);
  return out;
}

PipelineData run_pipeline(
  const RunConfig & config, unsigned stages, Execution execution,
  const std::vector<MergingEvent> * events)
{
  in_stage("config", [&] { config.validate(true); });
  PipelineData data;
  Stopwatch clock;

  if (config.synthetic_events > 0) {
    auto scenes = in_stage("synth", [&] {
      return synth::generate_batch(config.synthetic_events, config.seed, true, {}, config.thresholds);
    });
    auto map = std::make_shared<const LaneletMap>(synth::toy_map());
    Diagnostics load_diag;
    auto layout = in_stage("ingest", [&] {
      return load_layout(*map, synth::toy_layout_config(), 0.15, load_diag);
    });
    const auto context = LocationContext::build(map, std::move(layout));
    data.locations = {synth::kLocationId};
    data.diagnostics.append(load_diag);
    data.timings.emplace_back("load", clock.lap());
    std::vector<PipelineData> parts(scenes.size());
    for_each_index(scenes.size(), execution, [&](std::size_t i) {
      parts[i] = process_recording(scenes[i].recording, context, config, stages, events);
    });
    for (auto & p : parts) {
      append(data, std::move(p));
    }
    data.timings.emplace_back("process", clock.lap());
    return data;
  }

  const auto files = in_stage("ingest", [&] { return discover_recordings(config.data_dir); });
  std::vector<RecordingFiles> selected;
  std::vector<RecordingMeta> metas;
  in_stage("ingest", [&] {
    for (const auto & f : files) {
      auto meta = load_recording_meta(f.recording_meta);
      if (
        !config.locations.empty() &&
        std::find(config.locations.begin(), config.locations.end(), meta.location_id) ==
          config.locations.end()) {
        continue;
      }
      selected.push_back(f);
      metas.push_back(meta);
    }
  });
  if (selected.empty()) {
    throw StageError("ingest", "no recordings found for the selected locations", 2);
  }
  std::set<int> locations;
  for (const auto & m : metas) {
    locations.insert(m.location_id);
  }
  data.locations.assign(locations.begin(), locations.end());

  const auto layout_config = in_stage("ingest", [&] { return load_layout_config(config.layout_path); });
  data.inputs.push_back(digest("layout", config.layout_path, {}));
  std::map<int, std::shared_ptr<const LaneletMap>> maps;
  std::map<int, MergingAreaLayout> layouts;
  in_stage("ingest", [&] {
    for (const int loc : data.locations) {
      const auto it = layout_config.locations.find(loc);
      if (it == layout_config.locations.end()) {
        throw ConfigError("layout file has no entry for location " + std::to_string(loc));
      }
      const auto path = find_map_file(config.maps_dir, loc);
      data.inputs.push_back(digest("map", path, config.maps_dir));
      auto map = std::make_shared<const LaneletMap>(load_lanelet2_file(path));
      layouts[loc] = load_layout(*map, it->second, layout_config.length_tolerance, data.diagnostics);
      maps[loc] = std::move(map);
    }
  });

  // One context per location and coordinate origin; local maps ignore the origin.
  using ContextKey = std::tuple<int, double, double>;
  std::map<ContextKey, std::unique_ptr<LocationContext>> contexts;
  std::vector<const LocationContext *> context_of(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const auto & m = metas[i];
    const auto & map = maps.at(m.location_id);
    const Vec2 origin = map->georeferenced() ? m.origin_offset : Vec2{};
    const ContextKey key{m.location_id, origin.x, origin.y};
    auto & slot = contexts[key];
    if (!slot) {
      auto local = map->georeferenced()
                     ? std::make_shared<const LaneletMap>(map->translated(origin))
                     : map;
      slot = std::make_unique<LocationContext>(LocationContext::build(local, layouts.at(m.location_id)));
    }
    context_of[i] = slot.get();
  }
  for (const auto & f : selected) {
    data.inputs.push_back(digest("recording_meta", f.recording_meta, config.data_dir));
    data.inputs.push_back(digest("tracks_meta", f.tracks_meta, config.data_dir));
    data.inputs.push_back(digest("tracks", f.tracks, config.data_dir));
  }
  data.timings.emplace_back("load", clock.lap());

  std::vector<PipelineData> parts(selected.size());
  for_each_index(selected.size(), execution, [&](std::size_t i) {
    const auto tag = "ingest [recording " + std::to_string(metas[i].recording_id) + "]";
    auto recording = in_stage(tag, [&] {
      return load_recording(selected[i], context_of[i]->map.get());
    });
    if (config.timestep) {
      recording.meta.timestep = *config.timestep;
      recording.meta.frame_rate = 1.0 / *config.timestep;
    }
    parts[i] = process_recording(recording, *context_of[i], config, stages, events);
  });
  for (auto & p : parts) {
    append(data, std::move(p));
  }
  data.timings.emplace_back("process", clock.lap());
  return data;
}

std::string serialize_merge_points(const std::vector<MergePoint> & points)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"event_id", "recording_id", "location_id", "track_id", "class", "x", "y", "crossed_solid"});
  for (const auto & p : points) {
    w.row(
      {p.event_id, std::to_string(p.recording_id), std::to_string(p.location_id),
       std::to_string(p.track_id), std::string(to_string(p.vehicle_class)), csv::format_double(p.x),
       csv::format_double(p.y), p.crossed_solid ? "1" : "0"});
  }
  return out.str();
}

std::vector<MergePoint> parse_merge_points(std::string text)
{
  csv::Reader r(std::move(text));
  r.read_header();
  const auto c_id = r.require("event_id");
  const auto c_rec = r.require("recording_id");
  const auto c_loc = r.require("location_id");
  const auto c_track = r.require("track_id");
  const auto c_class = r.require("class");
  const auto c_x = r.require("x");
  const auto c_y = r.require("y");
  const auto c_solid = r.require("crossed_solid");
  std::vector<MergePoint> out;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    MergePoint p;
    p.event_id = std::string(f[c_id]);
    p.recording_id = static_cast<int>(csv::parse_int(f[c_rec], r.line()));
    p.location_id = static_cast<int>(csv::parse_int(f[c_loc], r.line()));
    p.track_id = csv::parse_int(f[c_track], r.line());
    p.vehicle_class = vehicle_class_from_string(f[c_class]);
    p.x = csv::parse_double(f[c_x], r.line());
    p.y = csv::parse_double(f[c_y], r.line());
    p.crossed_solid = csv::parse_int(f[c_solid], r.line()) != 0;
    out.push_back(std::move(p));
  }
  return out;
}

std::string serialize_recording_summaries(const std::vector<RecordingSummary> & rows)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row(
    {"recording_id", "location_id", "timestep", "tracks", "rows", "on_ramp_tracks", "events",
     "rejections"});
  for (const auto & s : rows) {
    w.row(
      {std::to_string(s.recording_id), std::to_string(s.location_id), csv::format_double(s.timestep),
       std::to_string(s.tracks), std::to_string(s.rows), std::to_string(s.on_ramp_tracks),
       std::to_string(s.events), std::to_string(s.rejections)});
  }
  return out.str();
}

std::string serialize_warnings(const Diagnostics & diagnostics)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"stage", "code", "message"});
  for (const auto & d : diagnostics.items()) {
    w.row({d.stage, d.code, d.message});
  }
  return out.str();
}

}  // namespace hdmerge
