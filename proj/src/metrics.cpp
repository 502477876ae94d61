#include "dropclust/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace dropclust {

namespace {

void check_metric_inputs(const ShipGrouping& ships, const CenterSet& centers,
                         const DropoutParams& params) {
    params.validate();
    if (ships.ship_count() == 0) throw DataError("no ships to evaluate");
    if (centers.empty()) throw ConfigError("no centers to evaluate");
}

void check_bruteforce_k(std::size_t k) {
    if (k > 20) throw ConfigError("brute-force enumeration limited to K <= 20");
}

// Bitmask over centers within radius of at least one of the ship's points.
std::uint32_t coverage_mask(const std::vector<int>& group, std::span<const PlanarPoint> points,
                            const CenterSet& centers, double radius_km) {
    const double r2 = radius_km * radius_km;
    std::uint32_t mask = 0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        for (int i : group) {
            if (squared_distance(points[i].pos(), centers[k]) <= r2) {
                mask |= std::uint32_t{1} << k;
                break;
            }
        }
    }
    return mask;
}

}  // namespace

ShipGrouping build_ship_grouping(std::span<const PlanarPoint> points) {
    ShipGrouping out;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [it, inserted] = index.try_emplace(points[i].ship_id, out.groups.size());
        if (inserted) {
            out.ship_ids.push_back(points[i].ship_id);
            out.groups.emplace_back();
        }
        out.groups[it->second].push_back(static_cast<int>(i));
    }
    return out;
}

double detection_probability(const ShipGrouping& ships, std::span<const PlanarPoint> points,
                             const CenterSet& centers, const DropoutParams& params) {
    check_metric_inputs(ships, centers, params);
    const double r2 = params.radius_km * params.radius_km;
    double sum = 0.0;
    for (const auto& group : ships.groups) {
        int covering = 0;
        for (const auto& c : centers) {
            for (int i : group) {
                if (squared_distance(points[i].pos(), c) <= r2) {
                    ++covering;
                    break;
                }
            }
        }
        sum += 1.0 - pow_int(params.p, covering);
    }
    return sum / static_cast<double>(ships.ship_count());
}

double detection_probability_bruteforce(const ShipGrouping& ships,
                                        std::span<const PlanarPoint> points,
                                        const CenterSet& centers, const DropoutParams& params) {
    check_metric_inputs(ships, centers, params);
    check_bruteforce_k(centers.size());
    const std::size_t k = centers.size();
    std::vector<std::uint32_t> masks;
    masks.reserve(ships.groups.size());
    for (const auto& group : ships.groups) {
        masks.push_back(coverage_mask(group, points, centers, params.radius_km));
    }
    double total = 0.0;
    for (std::uint32_t s = 0; s < (std::uint32_t{1} << k); ++s) {
        int alive = std::popcount(s);
        double prob = pow_int(1.0 - params.p, alive) * pow_int(params.p, static_cast<int>(k) - alive);
        int detected = 0;
        for (auto m : masks) {
            if ((m & s) != 0) ++detected;
        }
        total += prob * detected;
    }
    return total / static_cast<double>(ships.ship_count());
}

double dropout_rmsd(std::span<const PlanarPoint> points, const CenterSet& centers, double p) {
    if (points.empty()) throw DataError("RMSD requires at least one point");
    if (centers.empty()) throw ConfigError("no centers to evaluate");
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must be in [0, 1)");
    const std::size_t k = centers.size();
    // identical kernel to the dropout k-means objective
    std::vector<double> d2(k);
    std::vector<std::size_t> order(k);
    double num = 0.0;
    for (const auto& pt : points) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            d2[kk] = squared_distance(pt.pos(), centers[kk]);
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (d2[a] != d2[b]) return d2[a] < d2[b];
            return a < b;
        });
        double pj = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            num += pj * (1.0 - p) * d2[order[j]];
            pj *= p;
        }
    }
    double denom = (1.0 - pow_int(p, static_cast<int>(k))) * static_cast<double>(points.size());
    return std::sqrt(num / denom);
}

double dropout_rmsd_bruteforce(std::span<const PlanarPoint> points, const CenterSet& centers,
                               double p) {
    if (points.empty()) throw DataError("RMSD requires at least one point");
    if (centers.empty()) throw ConfigError("no centers to evaluate");
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must be in [0, 1)");
    check_bruteforce_k(centers.size());
    const std::size_t k = centers.size();
    double num = 0.0;
    double den = 0.0;
    for (std::uint32_t s = 1; s < (std::uint32_t{1} << k); ++s) {
        int alive = std::popcount(s);
        double prob = pow_int(1.0 - p, alive) * pow_int(p, static_cast<int>(k) - alive);
        double inner = 0.0;
        for (const auto& pt : points) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t kk = 0; kk < k; ++kk) {
                if (s & (std::uint32_t{1} << kk)) {
                    best = std::min(best, squared_distance(pt.pos(), centers[kk]));
                }
            }
            inner += best;
        }
        num += prob * inner;
        den += prob * static_cast<double>(points.size());
    }
    return std::sqrt(num / den);
}

MetricsResult evaluate_placement(const ShipGrouping& ships, std::span<const PlanarPoint> points,
                                 const CenterSet& centers, const DropoutParams& params) {
    MetricsResult out;
    out.p_d = detection_probability(ships, points, centers, params);
    out.rmsd_km = dropout_rmsd(points, centers, params.p);
    return out;
}

}  // namespace dropclust
