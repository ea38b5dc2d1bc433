#include "citypulse/geomap.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "citypulse/lines.hpp"

namespace citypulse {

using nlohmann::json;

void CommuneGeometry::recompute_bbox() {
  min_lon = min_lat = std::numeric_limits<double>::infinity();
  max_lon = max_lat = -std::numeric_limits<double>::infinity();
  for (const auto& poly : polygons)
    for (const auto& ring : poly.rings)
      for (const auto& v : ring) {
        min_lon = std::min(min_lon, v.lon);
        max_lon = std::max(max_lon, v.lon);
        min_lat = std::min(min_lat, v.lat);
        max_lat = std::max(max_lat, v.lat);
      }
}

namespace {

Ring parse_ring(const json& coords, size_t feature_idx) {
  Ring ring;
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2)
      throw GeomapError("feature " + std::to_string(feature_idx) +
                        ": bad coordinate pair");
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  if (ring.size() < 4)
    throw GeomapError("feature " + std::to_string(feature_idx) +
                      ": ring has fewer than 4 vertices");
  if (ring.front().lon != ring.back().lon || ring.front().lat != ring.back().lat)
    throw GeomapError("feature " + std::to_string(feature_idx) +
                      ": ring is not closed");
  return ring;
}

Polygon parse_polygon(const json& coords, size_t feature_idx) {
  Polygon poly;
  for (const auto& ring : coords) poly.rings.push_back(parse_ring(ring, feature_idx));
  if (poly.rings.empty())
    throw GeomapError("feature " + std::to_string(feature_idx) +
                      ": polygon has no rings");
  return poly;
}

} // namespace

std::vector<CommuneGeometry> parse_commune_geometry(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GeomapError(std::string("invalid GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    throw GeomapError("not a GeoJSON FeatureCollection");

  std::vector<CommuneGeometry> out;
  std::set<CommuneId> seen;
  size_t idx = 0;
  for (const auto& feat : doc["features"]) {
    CommuneGeometry g;
    const auto& props = feat.value("properties", json::object());
    if (!props.contains("commune") || !props["commune"].is_number_integer())
      throw GeomapError("feature " + std::to_string(idx) +
                        ": missing integer commune property");
    g.id = props["commune"].get<int>();
    if (g.id <= 0)
      throw GeomapError("feature " + std::to_string(idx) +
                        ": commune id must be positive");
    if (!seen.insert(g.id).second)
      throw GeomapError("duplicate commune id " + std::to_string(g.id));
    g.name = props.value("name", "");

    const auto& geom = feat.value("geometry", json::object());
    std::string gtype = geom.value("type", "");
    if (gtype == "Polygon") {
      g.polygons.push_back(parse_polygon(geom["coordinates"], idx));
    } else if (gtype == "MultiPolygon") {
      for (const auto& poly : geom["coordinates"])
        g.polygons.push_back(parse_polygon(poly, idx));
    } else {
      throw GeomapError("feature " + std::to_string(idx) +
                        ": geometry must be Polygon or MultiPolygon");
    }
    g.recompute_bbox();
    out.push_back(std::move(g));
    ++idx;
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::vector<CommuneGeometry> load_commune_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GeomapError("cannot open geometry file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_commune_geometry(ss.str());
}

namespace {

bool on_segment(double lon, double lat, const LonLat& a, const LonLat& b) {
  double cross = (b.lon - a.lon) * (lat - a.lat) - (b.lat - a.lat) * (lon - a.lon);
  if (cross != 0.0) return false;
  return lon >= std::min(a.lon, b.lon) && lon <= std::max(a.lon, b.lon) &&
         lat >= std::min(a.lat, b.lat) && lat <= std::max(a.lat, b.lat);
}

} // namespace

bool polygon_contains(const Polygon& poly, double lon, double lat) {
  // Even-odd ray cast; a point exactly on an edge counts as contained.
  bool inside = false;
  for (const auto& ring : poly.rings) {
    for (size_t i = 0, n = ring.size(); i + 1 < n; ++i) {
      const LonLat& a = ring[i];
      const LonLat& b = ring[i + 1];
      if (on_segment(lon, lat, a, b)) return true;
      if ((a.lat > lat) != (b.lat > lat)) {
        double x = a.lon + (lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
        if (lon < x) inside = !inside;
      }
    }
  }
  return inside;
}

std::optional<CommuneId> point_in_commune(double lon, double lat,
                                          const std::vector<CommuneGeometry>& geoms) {
  // geoms sorted by id at load, so the first hit is the smallest id.
  for (const auto& g : geoms) {
    if (lon < g.min_lon || lon > g.max_lon || lat < g.min_lat || lat > g.max_lat)
      continue;
    for (const auto& poly : g.polygons)
      if (polygon_contains(poly, lon, lat)) return g.id;
  }
  return std::nullopt;
}

AntennaCommuneMap build_antenna_map(const std::vector<AntennaSite>& antennas,
                                    const std::vector<CommuneGeometry>& geoms) {
  AntennaCommuneMap out;
  for (const auto& a : antennas) {
    if (out.mapping.count(a.id) || out.unmapped.count(a.id))
      throw GeomapError("duplicate antenna " + a.id);
    auto c = point_in_commune(a.lon, a.lat, geoms);
    if (c)
      out.mapping.emplace(a.id, *c);
    else
      out.unmapped.insert(a.id);
  }
  return out;
}

std::vector<AntennaSite> load_antenna_registry(const std::string& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw GeomapError("empty antenna registry: " + path);
  std::vector<AntennaSite> out;
  std::set<std::string> seen;
  size_t lineno = 1;
  while (reader.next(line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3)
      throw GeomapError("antenna registry line " + std::to_string(lineno) +
                        ": expected antenna_id,lon,lat");
    AntennaSite site;
    site.id = std::string(f[0]);
    if (site.id.empty() || !seen.insert(site.id).second)
      throw GeomapError("duplicate antenna " + site.id);
    try {
      site.lon = std::stod(std::string(f[1]));
      site.lat = std::stod(std::string(f[2]));
    } catch (const std::exception&) {
      throw GeomapError("antenna registry line " + std::to_string(lineno) +
                        ": bad coordinate");
    }
    out.push_back(std::move(site));
  }
  return out;
}

AntennaCommuneMap load_antenna_map(const std::string& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw GeomapError("empty antenna map: " + path);
  AntennaCommuneMap out;
  size_t lineno = 1;
  while (reader.next(line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 2 || f[0].empty())
      throw GeomapError("antenna map line " + std::to_string(lineno) +
                        ": expected antenna_id,commune_id");
    std::string id(f[0]);
    if (out.mapping.count(id) || out.unmapped.count(id))
      throw GeomapError("duplicate antenna " + id);
    if (f[1].empty() || f[1] == "0") {
      out.unmapped.insert(std::move(id));
      continue;
    }
    int commune = 0;
    auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), commune);
    if (ec != std::errc{} || p != f[1].data() + f[1].size() || commune < 0)
      throw GeomapError("antenna map line " + std::to_string(lineno) +
                        ": bad commune id");
    out.mapping.emplace(std::move(id), commune);
  }
  return out;
}

void save_antenna_map(const AntennaCommuneMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write antenna map: " + path);
  out << "antenna_id,commune_id\n";
  std::vector<std::pair<std::string, CommuneId>> rows(map.mapping.begin(),
                                                      map.mapping.end());
  for (const auto& a : map.unmapped) rows.emplace_back(a, 0);
  std::sort(rows.begin(), rows.end());
  for (const auto& [id, c] : rows) {
    out << id << ',';
    if (c > 0) out << c;
    out << '\n';
  }
}

} // namespace citypulse
