#include "dropclust/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace dropclust::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = strip(s);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

// Reads one line, tolerating CRLF and a missing final newline.
bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (strip(header[i]) == name) return static_cast<int>(i);
    }
    return -1;
}

// --- polygon primitives -------------------------------------------------

double cross(LatLon o, LatLon a, LatLon b) {
    return (a.lat - o.lat) * (b.lon - o.lon) - (a.lon - o.lon) * (b.lat - o.lat);
}

bool in_box(LatLon a, LatLon b, double lat, double lon) {
    return std::min(a.lat, b.lat) <= lat && lat <= std::max(a.lat, b.lat) &&
           std::min(a.lon, b.lon) <= lon && lon <= std::max(a.lon, b.lon);
}

bool on_segment(LatLon a, LatLon b, double lat, double lon) {
    const LatLon p{lat, lon};
    return cross(a, b, p) == 0.0 && in_box(a, b, lat, lon);
}

int orient_sign(LatLon a, LatLon b, LatLon c) {
    const double v = cross(a, b, c);
    return (v > 0.0) - (v < 0.0);
}

bool segments_intersect(LatLon a, LatLon b, LatLon c, LatLon d) {
    const int d1 = orient_sign(c, d, a);
    const int d2 = orient_sign(c, d, b);
    const int d3 = orient_sign(a, b, c);
    const int d4 = orient_sign(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && in_box(c, d, a.lat, a.lon)) return true;
    if (d2 == 0 && in_box(c, d, b.lat, b.lon)) return true;
    if (d3 == 0 && in_box(a, b, c.lat, c.lon)) return true;
    if (d4 == 0 && in_box(a, b, d.lat, d.lon)) return true;
    return false;
}

}  // namespace

void RegionPolygon::validate() const {
    const std::size_t n = vertices.size();
    if (n < 3) throw DataError("region polygon needs at least 3 vertices");
    for (const auto& v : vertices) {
        if (!std::isfinite(v.lat) || !std::isfinite(v.lon))
            throw DataError("region polygon has a non-finite vertex");
        if (v.lat < -90.0 || v.lat > 90.0 || v.lon < -180.0 || v.lon > 180.0)
            throw DataError("region polygon vertex outside lat/lon range");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const LatLon a = vertices[i];
        const LatLon b = vertices[(i + 1) % n];
        if (a.lat == b.lat && a.lon == b.lon)
            throw DataError("region polygon has a zero-length edge");
    }
    // Spikes: an edge that folds straight back over its predecessor.
    for (std::size_t i = 0; i < n; ++i) {
        const LatLon a = vertices[i];
        const LatLon b = vertices[(i + 1) % n];
        const LatLon c = vertices[(i + 2) % n];
        if (orient_sign(a, b, c) == 0) {
            const double dot = (a.lat - b.lat) * (c.lat - b.lat) + (a.lon - b.lon) * (c.lon - b.lon);
            if (dot > 0.0) throw DataError("region polygon is not simple");
        }
    }
    // Non-adjacent edge pairs must not touch.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j],
                                   vertices[(j + 1) % n]))
                throw DataError("region polygon is not simple");
        }
    }
}

bool RegionPolygon::contains(double lat, double lon) const {
    const std::size_t n = vertices.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const LatLon a = vertices[j];
        const LatLon b = vertices[i];
        if (on_segment(a, b, lat, lon)) return true;
        if ((a.lat > lat) != (b.lat > lat)) {
            const double t = (lat - a.lat) / (b.lat - a.lat);
            const double lon_cross = a.lon + t * (b.lon - a.lon);
            if (lon < lon_cross) inside = !inside;
        }
    }
    return inside;
}

ParseResult parse_ais_file(std::istream& in, const AisFormat& format) {
    if (!in) throw DataError("AIS input stream is unreadable");

    std::string line;
    if (!read_line(in, line)) throw DataError("AIS input is empty (no header row)");
    const auto header = split_line(line, format.delimiter);

    const int id_col = find_column(header, format.ship_id_column);
    const int lat_col = find_column(header, format.lat_column);
    const int lon_col = find_column(header, format.lon_column);
    int ts_col = -1;
    std::string missing;
    if (id_col < 0) missing += " '" + format.ship_id_column + "'";
    if (lat_col < 0) missing += " '" + format.lat_column + "'";
    if (lon_col < 0) missing += " '" + format.lon_column + "'";
    if (!format.timestamp_column.empty()) {
        ts_col = find_column(header, format.timestamp_column);
        if (ts_col < 0) missing += " '" + format.timestamp_column + "'";
    }
    if (!missing.empty()) throw DataError("AIS header is missing column(s):" + missing);

    const int max_col = std::max({id_col, lat_col, lon_col, ts_col});

    ParseResult result;
    while (read_line(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_line(line, format.delimiter);
        if (static_cast<int>(fields.size()) <= max_col) {
            ++result.skipped;
            continue;
        }
        RawAisRecord rec;
        rec.ship_id = strip(fields[id_col]);
        if (rec.ship_id.empty() || !parse_double(fields[lat_col], rec.lat) ||
            !parse_double(fields[lon_col], rec.lon) || rec.lat < -90.0 || rec.lat > 90.0 ||
            rec.lon < -180.0 || rec.lon > 180.0) {
            ++result.skipped;
            continue;
        }
        if (ts_col >= 0) rec.timestamp = strip(fields[ts_col]);
        result.records.push_back(std::move(rec));
    }
    if (in.bad()) throw DataError("I/O error while reading AIS input");
    return result;
}

std::vector<RawAisRecord> filter_region(const std::vector<RawAisRecord>& records,
                                        const RegionPolygon& region) {
    region.validate();
    std::vector<RawAisRecord> kept;
    kept.reserve(records.size());
    for (const auto& rec : records) {
        if (region.contains(rec.lat, rec.lon)) kept.push_back(rec);
    }
    return kept;
}

ProjectionOrigin mean_origin(const std::vector<RawAisRecord>& records) {
    if (records.empty()) throw DataError("cannot derive a projection origin from empty input");
    double lat = 0.0, lon = 0.0;
    for (const auto& rec : records) {
        lat += rec.lat;
        lon += rec.lon;
    }
    const double n = static_cast<double>(records.size());
    return {lat / n, lon / n};
}

Vec2 project_point(double lat, double lon, const ProjectionOrigin& origin) {
    return {kEarthRadiusKm * std::cos(origin.lat0 * kDegToRad) * (lon - origin.lon0) * kDegToRad,
            kEarthRadiusKm * (lat - origin.lat0) * kDegToRad};
}

std::vector<PlanarPoint> project(const std::vector<RawAisRecord>& records,
                                 const ProjectionOrigin& origin) {
    std::vector<PlanarPoint> points;
    points.reserve(records.size());
    for (const auto& rec : records) {
        const Vec2 v = project_point(rec.lat, rec.lon, origin);
        points.push_back({v.x, v.y, rec.ship_id});
    }
    return points;
}

std::vector<PlanarPoint> project(const std::vector<RawAisRecord>& records) {
    return project(records, mean_origin(records));
}

LatLon unproject(Vec2 point, const ProjectionOrigin& origin) {
    const double c = std::cos(origin.lat0 * kDegToRad);
    if (std::abs(c) < 1e-12) throw DataError("projection origin must not be at a pole");
    return {origin.lat0 + point.y / (kEarthRadiusKm * kDegToRad),
            origin.lon0 + point.x / (kEarthRadiusKm * c * kDegToRad)};
}

namespace {

RegionPolygon ring_to_polygon(const nlohmann::json& rings) {
    if (!rings.is_array() || rings.empty())
        throw DataError("region polygon has no coordinate rings");
    if (rings.size() > 1)
        throw DataError("region polygon with interior rings is not supported");
    RegionPolygon poly;
    for (const auto& coord : rings[0]) {
        if (!coord.is_array() || coord.size() < 2)
            throw DataError("region polygon coordinate is not a [lon, lat] pair");
        poly.vertices.push_back({coord[1].get<double>(), coord[0].get<double>()});
    }
    // GeoJSON rings repeat the first vertex at the end.
    if (poly.vertices.size() >= 2) {
        const LatLon f = poly.vertices.front();
        const LatLon l = poly.vertices.back();
        if (f.lat == l.lat && f.lon == l.lon) poly.vertices.pop_back();
    }
    poly.validate();
    return poly;
}

}  // namespace

RegionPolygon load_region_geojson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open region file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("region file is not valid JSON: " + std::string(e.what()));
    }

    const nlohmann::json* geometry = nullptr;
    const std::string type = doc.value("type", "");
    if (type == "Polygon") {
        geometry = &doc;
    } else if (type == "Feature") {
        if (!doc.contains("geometry")) throw DataError("region feature has no geometry");
        geometry = &doc["geometry"];
    } else if (type == "FeatureCollection") {
        const auto& features = doc["features"];
        if (!features.is_array() || features.size() != 1)
            throw DataError("region file must contain exactly one polygon feature");
        geometry = &features[0]["geometry"];
    } else {
        throw DataError("region file must be a GeoJSON Polygon, Feature, or FeatureCollection");
    }
    if (geometry->value("type", "") != "Polygon")
        throw DataError("region geometry must be a Polygon");
    return ring_to_polygon((*geometry)["coordinates"]);
}

RegionPolygon bbox_region(double lat_min, double lon_min, double lat_max, double lon_max) {
    if (!(lat_min < lat_max) || !(lon_min < lon_max))
        throw ConfigError("bounding box must satisfy lat_min < lat_max and lon_min < lon_max");
    RegionPolygon poly;
    poly.vertices = {{lat_min, lon_min}, {lat_min, lon_max}, {lat_max, lon_max}, {lat_max, lon_min}};
    poly.validate();
    return poly;
}

void write_planar_cache(std::ostream& out, const std::vector<PlanarPoint>& points) {
    out << "ship_id,x_km,y_km\n";
    char buf[80];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", p.x, p.y);
        out << p.ship_id << buf;
    }
    if (!out) throw DataError("failed to write planar cache");
}

std::vector<PlanarPoint> read_planar_cache(std::istream& in) {
    if (!in) throw DataError("planar cache stream is unreadable");
    std::string line;
    if (!read_line(in, line)) throw DataError("planar cache is empty");
    const auto header = split_line(line, ',');
    const int id_col = find_column(header, "ship_id");
    const int x_col = find_column(header, "x_km");
    const int y_col = find_column(header, "y_km");
    if (id_col < 0 || x_col < 0 || y_col < 0)
        throw DataError("planar cache header must name ship_id, x_km, y_km");
    const int max_col = std::max({id_col, x_col, y_col});

    std::vector<PlanarPoint> points;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_line(line, ',');
        PlanarPoint p;
        if (static_cast<int>(fields.size()) <= max_col || !parse_double(fields[x_col], p.x) ||
            !parse_double(fields[y_col], p.y))
            throw DataError("planar cache line " + std::to_string(line_no) + " is malformed");
        p.ship_id = strip(fields[id_col]);
        if (p.ship_id.empty())
            throw DataError("planar cache line " + std::to_string(line_no) + " has an empty ship_id");
        points.push_back(std::move(p));
    }
    return points;
}

bool looks_like_planar_cache(const std::string& header_line) {
    const auto header = split_line(header_line, ',');
    return find_column(header, "ship_id") >= 0 && find_column(header, "x_km") >= 0 &&
           find_column(header, "y_km") >= 0;
}

}  // namespace dropclust::geo
