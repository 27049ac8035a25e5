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

#include "hdmerge/map_model.hpp"

#include "hdmerge/csv.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace hdmerge
{

namespace
{

namespace pt = boost::property_tree;

constexpr std::size_t kMinCenterlineSamples = 50;

ElementId parse_id(const std::string & text, const char * what)
{
  ElementId value = 0;
  const auto * end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(std::string("invalid ") + what + " id '" + text + "'");
  }
  return value;
}

double parse_double(const std::string & text, const char * what)
{
  double value = 0.0;
  const auto * begin = text.data();
  const auto * end = begin + text.size();
  if (begin != end && *begin == '+') {
    ++begin;
  }
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError(std::string("invalid ") + what + " value '" + text + "'");
  }
  return value;
}

std::map<std::string, std::string> collect_tags(const pt::ptree & element)
{
  std::map<std::string, std::string> tags;
  for (const auto & [name, child] : element) {
    if (name == "tag") {
      tags[child.get<std::string>("<xmlattr>.k", "")] = child.get<std::string>("<xmlattr>.v", "");
    }
  }
  return tags;
}

LineType line_type_from_tags(const std::map<std::string, std::string> & tags)
{
  const auto type = tags.count("type") ? tags.at("type") : std::string{};
  const auto subtype = tags.count("subtype") ? tags.at("subtype") : std::string{};
  if (type == "virtual") {
    return LineType::virtual_line;
  }
  if (subtype == "solid" || subtype == "solid_solid") {
    return LineType::solid;
  }
  if (subtype == "dashed") {
    return LineType::dashed;
  }
  return LineType::other;
}

std::vector<Vec2> dedupe(std::vector<Vec2> pts)
{
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto & p : pts) {
    if (out.empty() || distance(out.back(), p) > 1e-9) {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(LineType type)
{
  switch (type) {
    case LineType::solid:
      return "solid";
    case LineType::dashed:
      return "dashed";
    case LineType::virtual_line:
      return "virtual";
    case LineType::other:
      break;
  }
  return "other";
}

Vec2 project_utm(double lat_deg, double lon_deg)
{
  constexpr double a = 6378137.0;
  constexpr double f = 1.0 / 298.257223563;
  constexpr double k0 = 0.9996;
  const double e2 = f * (2.0 - f);
  const double e4 = e2 * e2;
  const double e6 = e4 * e2;
  const double ep2 = e2 / (1.0 - e2);
  const int zone = static_cast<int>(std::floor((lon_deg + 180.0) / 6.0)) + 1;
  const double lon0 = ((zone - 1) * 6 - 180 + 3) * std::numbers::pi / 180.0;
  const double phi = lat_deg * std::numbers::pi / 180.0;
  const double lam = lon_deg * std::numbers::pi / 180.0;

  const double sin_phi = std::sin(phi);
  const double cos_phi = std::cos(phi);
  const double n = a / std::sqrt(1.0 - e2 * sin_phi * sin_phi);
  const double t = std::tan(phi) * std::tan(phi);
  const double c = ep2 * cos_phi * cos_phi;
  const double aa = cos_phi * (lam - lon0);
  const double m =
    a * ((1.0 - e2 / 4.0 - 3.0 * e4 / 64.0 - 5.0 * e6 / 256.0) * phi -
         (3.0 * e2 / 8.0 + 3.0 * e4 / 32.0 + 45.0 * e6 / 1024.0) * std::sin(2.0 * phi) +
         (15.0 * e4 / 256.0 + 45.0 * e6 / 1024.0) * std::sin(4.0 * phi) -
         (35.0 * e6 / 3072.0) * std::sin(6.0 * phi));

  const double x =
    k0 * n *
      (aa + (1.0 - t + c) * std::pow(aa, 3) / 6.0 +
       (5.0 - 18.0 * t + t * t + 72.0 * c - 58.0 * ep2) * std::pow(aa, 5) / 120.0) +
    500000.0;
  double y =
    k0 * (m + n * std::tan(phi) *
                (aa * aa / 2.0 + (5.0 - t + 9.0 * c + 4.0 * c * c) * std::pow(aa, 4) / 24.0 +
                 (61.0 - 58.0 * t + t * t + 600.0 * c - 330.0 * ep2) * std::pow(aa, 6) / 720.0));
  if (lat_deg < 0.0) {
    y += 10000000.0;
  }
  return {x, y};
}

LaneletMap::LaneletMap(
  std::map<ElementId, MapPoint> points, std::map<ElementId, LineString> linestrings,
  std::vector<std::pair<ElementId, std::pair<ElementId, ElementId>>> lanelet_bounds,
  bool georeferenced)
: points_(std::move(points)),
  linestrings_(std::move(linestrings)),
  bounds_(std::move(lanelet_bounds)),
  georeferenced_(georeferenced)
{
  auto polyline = [this](ElementId ls_id, ElementId lanelet_id) {
    const auto it = linestrings_.find(ls_id);
    if (it == linestrings_.end()) {
      throw IntegrityError(
        "lanelet " + std::to_string(lanelet_id) + " references missing linestring " +
        std::to_string(ls_id));
    }
    std::vector<Vec2> pts;
    for (const auto pid : it->second.point_ids) {
      const auto pit = points_.find(pid);
      if (pit == points_.end()) {
        throw IntegrityError(
          "linestring " + std::to_string(ls_id) + " references missing point " +
          std::to_string(pid));
      }
      pts.push_back({pit->second.x, pit->second.y});
    }
    pts = dedupe(std::move(pts));
    if (pts.size() < 2) {
      throw IntegrityError("linestring " + std::to_string(ls_id) + " has fewer than 2 points");
    }
    return pts;
  };

  for (const auto & [id, lr] : bounds_) {
    if (lanelets_.count(id)) {
      throw IntegrityError("duplicate lanelet id " + std::to_string(id));
    }
    Lanelet ll;
    ll.id = id;
    ll.left_id = lr.first;
    ll.right_id = lr.second;
    auto left = polyline(lr.first, id);
    auto right = polyline(lr.second, id);
    // Orient the right bound along the left one.
    const double same = distance(left.front(), right.front()) + distance(left.back(), right.back());
    const double flipped =
      distance(left.front(), right.back()) + distance(left.back(), right.front());
    if (flipped < same) {
      std::reverse(right.begin(), right.end());
    }
    const std::size_t n = std::max({left.size(), right.size(), kMinCenterlineSamples});
    ll.left = resample_polyline(left, n);
    ll.right = resample_polyline(right, n);
    ll.centerline.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ll.centerline[i] = (ll.left[i] + ll.right[i]) * 0.5;
    }
    ll.centerline_arc = cumulative_arc_length(ll.centerline);
    ll.length = ll.centerline_arc.back();
    if (!(ll.length > 0.0)) {
      throw IntegrityError("lanelet " + std::to_string(id) + " has zero length");
    }
    ll.bbox_min = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    ll.bbox_max = {-ll.bbox_min.x, -ll.bbox_min.y};
    for (const auto * side : {&ll.left, &ll.right}) {
      for (const auto & p : *side) {
        ll.bbox_min = {std::min(ll.bbox_min.x, p.x), std::min(ll.bbox_min.y, p.y)};
        ll.bbox_max = {std::max(ll.bbox_max.x, p.x), std::max(ll.bbox_max.y, p.y)};
      }
    }
    lanelets_.emplace(id, std::move(ll));
  }
}

const Lanelet & LaneletMap::lanelet(ElementId id) const
{
  const auto it = lanelets_.find(id);
  if (it == lanelets_.end()) {
    throw IntegrityError("unknown lanelet id " + std::to_string(id));
  }
  return it->second;
}

LaneletMap LaneletMap::translated(const Vec2 & offset) const
{
  auto pts = points_;
  for (auto & [id, p] : pts) {
    p.x -= offset.x;
    p.y -= offset.y;
  }
  return LaneletMap(std::move(pts), linestrings_, bounds_, false);
}

bool LaneletMap::contains(ElementId lanelet_id, double x, double y) const
{
  const auto & ll = lanelet(lanelet_id);
  const Vec2 p{x, y};
  constexpr double margin = 1e-9;
  if (
    p.x < ll.bbox_min.x - margin || p.x > ll.bbox_max.x + margin || p.y < ll.bbox_min.y - margin ||
    p.y > ll.bbox_max.y + margin) {
    return false;
  }
  for (std::size_t i = 0; i + 1 < ll.left.size(); ++i) {
    if (point_in_quad(ll.left[i], ll.left[i + 1], ll.right[i + 1], ll.right[i], p)) {
      return true;
    }
  }
  return false;
}

LanePosition LaneletMap::project(ElementId lanelet_id, double x, double y) const
{
  const auto & ll = lanelet(lanelet_id);
  const auto proj = project_onto_polyline(ll.centerline, ll.centerline_arc, {x, y});
  return {lanelet_id, proj.s, proj.signed_offset};
}

std::optional<LanePosition> LaneletMap::locate_among(
  std::span<const ElementId> candidates, double x, double y, double heading) const
{
  std::optional<LanePosition> best;
  double best_heading = std::numeric_limits<double>::infinity();
  for (const auto id : candidates) {
    if (!has_lanelet(id) || !contains(id, x, y)) {
      continue;
    }
    const auto & ll = lanelets_.at(id);
    const auto proj = project_onto_polyline(ll.centerline, ll.centerline_arc, {x, y});
    const double dh = std::isnan(heading) ? 0.0 : angle_difference(heading, proj.tangent_heading);
    const bool better =
      !best || dh < best_heading - 1e-12 ||
      (std::abs(dh - best_heading) <= 1e-12 &&
       std::abs(proj.signed_offset) < std::abs(best->lateral_offset));
    if (better) {
      best = LanePosition{id, proj.s, proj.signed_offset};
      best_heading = dh;
    }
  }
  return best;
}

std::optional<LanePosition> LaneletMap::locate(double x, double y, double heading) const
{
  std::vector<ElementId> ids;
  ids.reserve(lanelets_.size());
  for (const auto & [id, ll] : lanelets_) {
    ids.push_back(id);
  }
  return locate_among(ids, x, y, heading);
}

LaneletMap parse_lanelet2(std::string_view xml)
{
  if (std::all_of(xml.begin(), xml.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
    throw IntegrityError("empty map document: zero lanelets");
  }
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error & e) {
    throw ParseError("malformed lanelet2 XML: " + e.message(), e.line());
  }
  const auto osm = tree.get_child_optional("osm");
  if (!osm) {
    throw IntegrityError("map document has no <osm> root: zero lanelets");
  }

  std::map<ElementId, MapPoint> points;
  std::map<ElementId, LineString> linestrings;
  std::vector<std::pair<ElementId, std::pair<ElementId, ElementId>>> lanelets;
  bool georeferenced = false;

  for (const auto & [name, el] : *osm) {
    if (name == "node") {
      MapPoint p;
      p.id = parse_id(el.get<std::string>("<xmlattr>.id", ""), "node");
      const auto tags = collect_tags(el);
      if (tags.count("local_x") && tags.count("local_y")) {
        p.x = parse_double(tags.at("local_x"), "local_x");
        p.y = parse_double(tags.at("local_y"), "local_y");
      } else {
        const auto lat = el.get_optional<std::string>("<xmlattr>.lat");
        const auto lon = el.get_optional<std::string>("<xmlattr>.lon");
        if (!lat || !lon) {
          throw IntegrityError("node " + std::to_string(p.id) + " has no coordinates");
        }
        const auto utm = project_utm(parse_double(*lat, "lat"), parse_double(*lon, "lon"));
        p.x = utm.x;
        p.y = utm.y;
        georeferenced = true;
      }
      if (tags.count("ele")) {
        p.z = parse_double(tags.at("ele"), "ele");
      }
      if (!points.emplace(p.id, p).second) {
        throw IntegrityError("duplicate point id " + std::to_string(p.id));
      }
    } else if (name == "way") {
      LineString ls;
      ls.id = parse_id(el.get<std::string>("<xmlattr>.id", ""), "way");
      for (const auto & [child_name, child] : el) {
        if (child_name == "nd") {
          ls.point_ids.push_back(parse_id(child.get<std::string>("<xmlattr>.ref", ""), "nd"));
        }
      }
      ls.line_type = line_type_from_tags(collect_tags(el));
      if (!linestrings.emplace(ls.id, std::move(ls)).second) {
        throw IntegrityError("duplicate linestring id " + el.get<std::string>("<xmlattr>.id"));
      }
    } else if (name == "relation") {
      const auto tags = collect_tags(el);
      if (!tags.count("type") || tags.at("type") != "lanelet") {
        continue;
      }
      const auto id = parse_id(el.get<std::string>("<xmlattr>.id", ""), "relation");
      std::optional<ElementId> left;
      std::optional<ElementId> right;
      for (const auto & [child_name, child] : el) {
        if (child_name != "member") {
          continue;
        }
        const auto role = child.get<std::string>("<xmlattr>.role", "");
        const auto ref = parse_id(child.get<std::string>("<xmlattr>.ref", ""), "member");
        if (role == "left") {
          left = ref;
        } else if (role == "right") {
          right = ref;
        }
      }
      if (!left || !right) {
        throw IntegrityError("lanelet " + std::to_string(id) + " lacks a left or right bound");
      }
      lanelets.push_back({id, {*left, *right}});
    }
  }

  for (const auto & [id, ls] : linestrings) {
    for (const auto pid : ls.point_ids) {
      if (!points.count(pid)) {
        throw IntegrityError(
          "linestring " + std::to_string(id) + " references missing point " + std::to_string(pid));
      }
    }
  }
  if (lanelets.empty()) {
    throw IntegrityError("map contains zero lanelets");
  }
  return LaneletMap(std::move(points), std::move(linestrings), std::move(lanelets), georeferenced);
}

std::string serialize_lanelet2(const LaneletMap & map)
{
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n";
  for (const auto & [id, p] : map.points()) {
    out << "  <node id=\"" << id << "\" lat=\"0\" lon=\"0\">\n"
        << "    <tag k=\"local_x\" v=\"" << csv::format_double(p.x) << "\"/>\n"
        << "    <tag k=\"local_y\" v=\"" << csv::format_double(p.y) << "\"/>\n"
        << "    <tag k=\"ele\" v=\"" << csv::format_double(p.z) << "\"/>\n"
        << "  </node>\n";
  }
  for (const auto & [id, ls] : map.linestrings()) {
    out << "  <way id=\"" << id << "\">\n";
    for (const auto pid : ls.point_ids) {
      out << "    <nd ref=\"" << pid << "\"/>\n";
    }
    if (ls.line_type == LineType::virtual_line) {
      out << "    <tag k=\"type\" v=\"virtual\"/>\n";
    } else {
      out << "    <tag k=\"type\" v=\"line_thin\"/>\n";
      if (ls.line_type != LineType::other) {
        out << "    <tag k=\"subtype\" v=\"" << to_string(ls.line_type) << "\"/>\n";
      }
    }
    out << "  </way>\n";
  }
  for (const auto & [id, ll] : map.lanelets()) {
    out << "  <relation id=\"" << id << "\">\n"
        << "    <member type=\"way\" role=\"left\" ref=\"" << ll.left_id << "\"/>\n"
        << "    <member type=\"way\" role=\"right\" ref=\"" << ll.right_id << "\"/>\n"
        << "    <tag k=\"type\" v=\"lanelet\"/>\n"
        << "    <tag k=\"subtype\" v=\"road\"/>\n"
        << "  </relation>\n";
  }
  out << "</osm>\n";
  return out.str();
}

LaneletMap load_lanelet2_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open map file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lanelet2(buf.str());
}

// ---------------------------------------------------------------------------------------------

namespace
{

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string & value)
{
  std::vector<std::string> out;
  std::string cur;
  for (const char c : value) {
    if (c == ',' || c == '/' || c == ';') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  out.erase(
    std::remove_if(out.begin(), out.end(), [](const std::string & v) { return v.empty(); }),
    out.end());
  return out;
}

}  // namespace

LayoutConfig parse_layout_config(std::string_view text)
{
  LayoutConfig config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto line = std::string(raw);
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("layout line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "length_tolerance") {
        config.length_tolerance = parse_double(value, "length_tolerance");
        continue;
      }
      if (key.rfind("location.", 0) != 0) {
        throw ConfigError("unknown key '" + key + "'");
      }
      const auto rest = key.substr(9);
      const auto dot1 = rest.find('.');
      if (dot1 == std::string::npos) {
        throw ConfigError("malformed key '" + key + "'");
      }
      const int loc = static_cast<int>(parse_id(rest.substr(0, dot1), "location"));
      const auto field = rest.substr(dot1 + 1);
      auto & lc = config.locations[loc];
      lc.location_id = loc;
      if (field == "inner" || field == "exit") {
        auto & target = field == "inner" ? lc.inner_lanelets : lc.exit_lanelets;
        for (const auto & v : split_list(value)) {
          target.push_back(parse_id(v, "lanelet"));
        }
        continue;
      }
      if (field.rfind("area", 0) != 0) {
        throw ConfigError("unknown field '" + field + "'");
      }
      const auto area_part = field.substr(4);
      const auto dot2 = area_part.find('.');
      const auto area_text = area_part.substr(0, dot2);
      const auto area = parse_id(area_text, "area");
      if (area < 1 || area > kAreaCount) {
        throw ConfigError("area " + area_text + " out of range 1..5");
      }
      if (dot2 == std::string::npos) {
        for (const auto & v : split_list(value)) {
          lc.area_lanelets[area].push_back(parse_id(v, "lanelet"));
        }
      } else if (area_part.substr(dot2 + 1) == "length") {
        for (const auto & v : split_list(value)) {
          lc.expected_lengths[area].push_back(parse_double(v, "length"));
        }
      } else {
        throw ConfigError("unknown field '" + field + "'");
      }
    } catch (const ParseError & e) {
      throw ConfigError("layout line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError & e) {
      throw ConfigError("layout line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto & [loc, lc] : config.locations) {
    for (int a = 1; a <= kAreaCount; ++a) {
      if (!lc.expected_lengths[a].empty() &&
          lc.expected_lengths[a].size() != lc.area_lanelets[a].size()) {
        throw ConfigError(
          "location " + std::to_string(loc) + " area " + std::to_string(a) +
          ": length count does not match lanelet count");
      }
    }
  }
  return config;
}

LayoutConfig load_layout_config(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open layout file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_layout_config(buf.str());
}

std::string format_layout_config(const LayoutConfig & config)
{
  std::ostringstream out;
  out << "length_tolerance = " << csv::format_double(config.length_tolerance) << "\n";
  auto join_ids = [](const std::vector<ElementId> & ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      s += (i ? "," : "") + std::to_string(ids[i]);
    }
    return s;
  };
  for (const auto & [loc, lc] : config.locations) {
    const auto prefix = "location." + std::to_string(loc) + ".";
    for (int a = 1; a <= kAreaCount; ++a) {
      if (lc.area_lanelets[a].empty()) {
        continue;
      }
      out << prefix << "area" << a << " = " << join_ids(lc.area_lanelets[a]) << "\n";
      if (!lc.expected_lengths[a].empty()) {
        out << prefix << "area" << a << ".length = ";
        for (std::size_t i = 0; i < lc.expected_lengths[a].size(); ++i) {
          out << (i ? "," : "") << csv::format_double(lc.expected_lengths[a][i]);
        }
        out << "\n";
      }
    }
    if (!lc.inner_lanelets.empty()) {
      out << prefix << "inner = " << join_ids(lc.inner_lanelets) << "\n";
    }
    if (!lc.exit_lanelets.empty()) {
      out << prefix << "exit = " << join_ids(lc.exit_lanelets) << "\n";
    }
  }
  return out.str();
}

unsigned MergingAreaLayout::areas_of(ElementId lanelet_id) const
{
  const auto it = membership.find(lanelet_id);
  return it == membership.end() ? 0u : it->second;
}

bool MergingAreaLayout::in_area(ElementId lanelet_id, int area) const
{
  return (areas_of(lanelet_id) & (1u << area)) != 0;
}

std::vector<ElementId> MergingAreaLayout::chain(std::span<const int> areas) const
{
  std::vector<ElementId> out;
  for (const int a : areas) {
    if (a < 1 || a > kAreaCount) {
      throw DomainError("area " + std::to_string(a) + " out of range 1..5");
    }
    out.insert(out.end(), area_lanelets[a].begin(), area_lanelets[a].end());
  }
  return out;
}

namespace
{

void finish_layout(MergingAreaLayout & layout)
{
  for (int a = 1; a <= kAreaCount; ++a) {
    for (const auto id : layout.area_lanelets[a]) {
      layout.membership[id] |= 1u << a;
    }
  }
  for (const auto id : layout.inner_lanelets) {
    layout.membership[id] |= kInner;
  }
  for (const auto id : layout.exit_lanelets) {
    layout.membership[id] |= kExit;
  }
  for (const int a : {1, 2, 3, 5}) {
    if (layout.area_lanelets[a].empty()) {
      throw ConfigError(
        "location " + std::to_string(layout.location_id) + ": area " + std::to_string(a) +
        " has no lanelets");
    }
  }
  layout.merge_window_length = layout.area_length[2] + layout.area_length[3];
  if (!(layout.merge_window_length > 0.0)) {
    throw ConfigError("location " + std::to_string(layout.location_id) + ": empty merge window");
  }
}

}  // namespace

MergingAreaLayout layout_from_config(const LocationLayoutConfig & config)
{
  MergingAreaLayout layout;
  layout.location_id = config.location_id;
  layout.area_lanelets = config.area_lanelets;
  layout.inner_lanelets = config.inner_lanelets;
  layout.exit_lanelets = config.exit_lanelets;
  for (int a = 1; a <= kAreaCount; ++a) {
    if (config.expected_lengths[a].size() != config.area_lanelets[a].size()) {
      throw ConfigError(
        "location " + std::to_string(config.location_id) + " area " + std::to_string(a) +
        " has no configured lengths");
    }
    for (std::size_t i = 0; i < config.area_lanelets[a].size(); ++i) {
      layout.lanelet_length[config.area_lanelets[a][i]] = config.expected_lengths[a][i];
      layout.area_length[a] += config.expected_lengths[a][i];
    }
  }
  finish_layout(layout);
  return layout;
}

MergingAreaLayout load_layout(
  const LaneletMap & map, const LocationLayoutConfig & config, double length_tolerance,
  Diagnostics & diagnostics)
{
  MergingAreaLayout layout;
  layout.location_id = config.location_id;
  layout.area_lanelets = config.area_lanelets;
  layout.inner_lanelets = config.inner_lanelets;
  layout.exit_lanelets = config.exit_lanelets;
  auto check_known = [&](ElementId id) {
    if (!map.has_lanelet(id)) {
      throw ConfigError(
        "location " + std::to_string(config.location_id) + ": unknown lanelet id " +
        std::to_string(id));
    }
  };
  for (int a = 1; a <= kAreaCount; ++a) {
    const auto & ids = config.area_lanelets[a];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      check_known(ids[i]);
      const double len = map.lanelet(ids[i]).length;
      layout.lanelet_length[ids[i]] = len;
      layout.area_length[a] += len;
      if (i < config.expected_lengths[a].size()) {
        const double expected = config.expected_lengths[a][i];
        if (std::abs(len - expected) > length_tolerance) {
          diagnostics.warn(
            "map", "length_mismatch",
            "location " + std::to_string(config.location_id) + " area " + std::to_string(a) +
              " lanelet " + std::to_string(ids[i]) + ": map length " + std::to_string(len) +
              " vs expected " + std::to_string(expected));
        }
      }
      if (i > 0) {
        const auto & prev = map.lanelet(ids[i - 1]);
        const auto & cur = map.lanelet(ids[i]);
        if (distance(prev.centerline.back(), cur.centerline.front()) > 1.0) {
          diagnostics.warn(
            "map", "non_contiguous_area",
            "location " + std::to_string(config.location_id) + " area " + std::to_string(a) +
              ": lanelet " + std::to_string(ids[i]) + " does not continue " +
              std::to_string(ids[i - 1]));
        }
      }
    }
  }
  for (const auto id : config.inner_lanelets) {
    check_known(id);
  }
  for (const auto id : config.exit_lanelets) {
    check_known(id);
  }
  finish_layout(layout);
  return layout;
}

double longitudinal_chain_coordinate(
  const MergingAreaLayout & layout, std::span<const int> areas, const LanePosition & position)
{
  double upstream = 0.0;
  for (const auto id : layout.chain(areas)) {
    const double len = layout.lanelet_length.at(id);
    if (id == position.lanelet_id) {
      if (position.s < -1e-9 || position.s > len + 1e-9) {
        throw DomainError(
          "s = " + std::to_string(position.s) + " outside lanelet " + std::to_string(id) +
          " of length " + std::to_string(len));
      }
      return upstream + position.s;
    }
    upstream += len;
  }
  throw DomainError("lanelet " + std::to_string(position.lanelet_id) + " is not in the chain");
}

ChainAxis ChainAxis::from_centerlines(const LaneletMap & map, std::span<const ElementId> chain)
{
  ChainAxis axis;
  for (const auto id : chain) {
    const auto & line = map.lanelet(id).centerline;
    for (const auto & p : line) {
      if (axis.points_.empty() || distance(axis.points_.back(), p) > 1e-9) {
        axis.points_.push_back(p);
      }
    }
  }
  axis.arc_ = cumulative_arc_length(axis.points_);
  return axis;
}

ChainAxis ChainAxis::from_left_boundaries(const LaneletMap & map, std::span<const ElementId> chain)
{
  ChainAxis axis;
  for (const auto id : chain) {
    for (const auto & p : map.lanelet(id).left) {
      if (axis.points_.empty() || distance(axis.points_.back(), p) > 1e-9) {
        axis.points_.push_back(p);
      }
    }
  }
  axis.arc_ = cumulative_arc_length(axis.points_);
  return axis;
}

PolylineProjection ChainAxis::project(const Vec2 & p) const
{
  if (empty()) {
    throw DomainError("projection onto an empty chain");
  }
  auto proj = project_onto_polyline(points_, arc_, p);
  // Beyond either end the axis continues along its end segment.
  const std::size_t last = points_.size() - 2;
  if (proj.segment == 0 || proj.segment == last) {
    const Vec2 a = points_[proj.segment];
    const Vec2 ab = points_[proj.segment + 1] - a;
    const double len = norm(ab);
    const double along = dot(p - a, ab) / len;
    if ((proj.segment == 0 && along < 0.0) || (proj.segment == last && along > len)) {
      proj.s = arc_[proj.segment] + along;
      proj.distance = std::abs(cross(ab, p - a)) / len;
    }
  }
  return proj;
}

}  // namespace hdmerge
