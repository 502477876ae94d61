#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dropclust/types.hpp"

namespace dropclust::geo {

inline constexpr double kEarthRadiusKm = 6371.0;

// One decoded AIS position report.
struct RawAisRecord {
    std::string ship_id;
    double lat = 0.0;
    double lon = 0.0;
    std::string timestamp;  // carried through, unused by clustering
};

// Column mapping for delimited AIS tables. Names must match the header.
struct AisFormat {
    std::string ship_id_column = "mmsi";
    std::string lat_column = "lat";
    std::string lon_column = "lon";
    std::string timestamp_column;  // empty: no timestamp column
    char delimiter = ',';
};

struct ParseResult {
    std::vector<RawAisRecord> records;
    std::size_t skipped = 0;  // malformed data rows
};

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

// Simple closed polygon in degrees. First and last vertex are joined
// implicitly; a duplicate closing vertex is not required.
struct RegionPolygon {
    std::vector<LatLon> vertices;

    // Throws DataError unless the polygon has >= 3 finite vertices and is
    // simple (no self-intersection, no repeated vertex, no spike).
    void validate() const;

    // Ray casting; points on the boundary count as inside.
    bool contains(double lat, double lon) const;
};

struct ProjectionOrigin {
    double lat0 = 0.0;
    double lon0 = 0.0;
};

// Reads a delimited text table with a header row. Malformed data rows
// (wrong field count, unparseable or out-of-range coordinates, empty ship
// id) are skipped and counted. Throws DataError if the stream is unreadable
// or a mapped column is missing from the header.
ParseResult parse_ais_file(std::istream& in, const AisFormat& format);

// Keeps records whose position lies inside or on the boundary of the
// region, preserving order.
std::vector<RawAisRecord> filter_region(const std::vector<RawAisRecord>& records,
                                        const RegionPolygon& region);

// Arithmetic mean of lat/lon, the default projection origin.
ProjectionOrigin mean_origin(const std::vector<RawAisRecord>& records);

// Equirectangular projection about the origin:
//   x = R cos(lat0) (lon - lon0) pi/180,  y = R (lat - lat0) pi/180
Vec2 project_point(double lat, double lon, const ProjectionOrigin& origin);
std::vector<PlanarPoint> project(const std::vector<RawAisRecord>& records,
                                 const ProjectionOrigin& origin);
// Origin defaults to the mean lat/lon of the input.
std::vector<PlanarPoint> project(const std::vector<RawAisRecord>& records);

// Inverse of project_point. Throws DataError when the origin is at a pole.
LatLon unproject(Vec2 point, const ProjectionOrigin& origin);

// GeoJSON file holding exactly one polygon (bare geometry, Feature, or a
// one-feature FeatureCollection). Outer ring only; [lon, lat] coordinate
// order per GeoJSON.
RegionPolygon load_region_geojson(const std::string& path);

// Axis-aligned rectangle fallback for --bbox style configuration.
RegionPolygon bbox_region(double lat_min, double lon_min, double lat_max, double lon_max);

// Planar point cache: delimited text with header ship_id,x_km,y_km.
void write_planar_cache(std::ostream& out, const std::vector<PlanarPoint>& points);
std::vector<PlanarPoint> read_planar_cache(std::istream& in);

// True if the header line names the planar-cache columns rather than an
// AIS table.
bool looks_like_planar_cache(const std::string& header_line);

}  // namespace dropclust::geo
