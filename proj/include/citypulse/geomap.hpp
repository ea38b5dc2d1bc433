#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace citypulse {

using CommuneId = int;

struct LonLat {
  double lon;
  double lat;
};

// One closed ring; first vertex == last vertex.
using Ring = std::vector<LonLat>;

// One polygon: outer ring plus optional holes. Containment uses the even-odd
// rule over all rings, so holes fall out naturally.
struct Polygon {
  std::vector<Ring> rings;
};

struct CommuneGeometry {
  CommuneId id = 0;
  std::string name;
  std::vector<Polygon> polygons;

  // Axis-aligned bounding box, precomputed at load.
  double min_lon = 0, min_lat = 0, max_lon = 0, max_lat = 0;
  void recompute_bbox();
};

struct AntennaCommuneMap {
  std::unordered_map<std::string, CommuneId> mapping;
  std::unordered_set<std::string> unmapped;

  std::optional<CommuneId> commune_of(const std::string& antenna) const {
    auto it = mapping.find(antenna);
    if (it == mapping.end()) return std::nullopt;
    return it->second;
  }
};

struct GeomapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// GeoJSON FeatureCollection; each feature is a Polygon or MultiPolygon with
// an integer "commune" property and an optional "name". Result sorted by id.
std::vector<CommuneGeometry> load_commune_geometry(const std::string& path);
std::vector<CommuneGeometry> parse_commune_geometry(const std::string& geojson_text);

// True when the point is inside the polygon by the even-odd rule, or exactly
// on one of its edges.
bool polygon_contains(const Polygon& poly, double lon, double lat);

// Id of the containing commune, smallest id winning on shared boundaries;
// nullopt when no commune contains the point.
std::optional<CommuneId> point_in_commune(double lon, double lat,
                                          const std::vector<CommuneGeometry>& geoms);

struct AntennaSite {
  std::string id;
  double lon;
  double lat;
};

AntennaCommuneMap build_antenna_map(const std::vector<AntennaSite>& antennas,
                                    const std::vector<CommuneGeometry>& geoms);

// CSV `antenna_id,lon,lat`.
std::vector<AntennaSite> load_antenna_registry(const std::string& path);

// CSV `antenna_id,commune_id`; commune 0 or blank means unmapped.
AntennaCommuneMap load_antenna_map(const std::string& path);
void save_antenna_map(const AntennaCommuneMap& map, const std::string& path);

} // namespace citypulse
