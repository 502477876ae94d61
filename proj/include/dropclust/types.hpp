#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dropclust {

// Planar coordinates in kilometers (local projected frame).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double squared_distance(Vec2 a, Vec2 b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(Vec2 a, Vec2 b) { return std::sqrt(squared_distance(a, b)); }

// Observation point in the planar frame; ship_id groups points into tracks.
struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;
    std::string ship_id;

    Vec2 pos() const { return {x, y}; }
};

// Ordered list of cluster-center coordinates (km).
using CenterSet = std::vector<Vec2>;

// Failure model: each center drops out independently with probability p;
// a point counts as detected within radius_km of a surviving center.
struct DropoutParams {
    double p = 0.3;
    int k = 5;
    double radius_km = 10.0;

    void validate() const;
};

// Usage / configuration problems. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data problems (parse failures, bad region, too few points). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void DropoutParams::validate() const {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must be in [0, 1)");
    if (k < 1) throw ConfigError("center count must be >= 1");
    if (!(radius_km > 0.0)) throw ConfigError("detection radius must be > 0");
}

// x^n by repeated multiplication; libm-independent so results are identical
// across platforms and match the enumeration routes bit for bit.
inline double pow_int(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

}  // namespace dropclust
