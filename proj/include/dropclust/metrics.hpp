#pragma once

#include <span>
#include <string>
#include <vector>

#include "dropclust/types.hpp"

namespace dropclust {

// Point indices grouped by ship, in first-appearance order. Every point
// index lands in exactly one group; ships are weighted uniformly.
struct ShipGrouping {
    std::vector<std::string> ship_ids;
    std::vector<std::vector<int>> groups;

    std::size_t ship_count() const { return ship_ids.size(); }
};

ShipGrouping build_ship_grouping(std::span<const PlanarPoint> points);

// P_d = (1/|M|) sum_V (1 - p^{m_V}) where m_V counts the centers within
// radius of at least one of ship V's points. O(N K).
double detection_probability(const ShipGrouping& ships, std::span<const PlanarPoint> points,
                             const CenterSet& centers, const DropoutParams& params);

// Direct enumeration of all 2^K survivor subsets, P(S) = (1-p)^{|S|} p^{K-|S|}.
// Validation oracle; refuses K > 20.
double detection_probability_bruteforce(const ShipGrouping& ships,
                                        std::span<const PlanarPoint> points,
                                        const CenterSet& centers, const DropoutParams& params);

// sqrt( sum_i sum_k w_ik d_ik^2 / ((1 - p^K) N) ): root of the expected
// mean squared distance to the nearest surviving center, conditioned on at
// least one center surviving.
double dropout_rmsd(std::span<const PlanarPoint> points, const CenterSet& centers, double p);

// Power-set form of the same quantity; refuses K > 20.
double dropout_rmsd_bruteforce(std::span<const PlanarPoint> points, const CenterSet& centers,
                               double p);

struct MetricsResult {
    double p_d = 0.0;
    double rmsd_km = 0.0;
};

MetricsResult evaluate_placement(const ShipGrouping& ships, std::span<const PlanarPoint> points,
                                 const CenterSet& centers, const DropoutParams& params);

}  // namespace dropclust
