#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dropclust/types.hpp"

namespace dropclust {

// Per-point center ranking: row i holds the center indices sorted by
// increasing distance to point i (ties broken by lower index).
class RankMatrix {
public:
    RankMatrix() = default;
    RankMatrix(std::size_t n, std::size_t k) : n_(n), k_(k), perm_(n * k, 0) {}

    std::span<int> row(std::size_t i) { return {perm_.data() + i * k_, k_}; }
    std::span<const int> row(std::size_t i) const { return {perm_.data() + i * k_, k_}; }
    std::size_t n() const { return n_; }
    std::size_t k() const { return k_; }

    friend bool operator==(const RankMatrix&, const RankMatrix&) = default;

private:
    std::size_t n_ = 0, k_ = 0;
    std::vector<int> perm_;
};

// Survival weights w[i][k]: probability that center k is the nearest
// surviving center to point i. Each row sums to 1 - p^K.
class WeightMatrix {
public:
    WeightMatrix() = default;
    WeightMatrix(std::size_t n, std::size_t k) : n_(n), k_(k), w_(n * k, 0.0) {}

    std::span<double> row(std::size_t i) { return {w_.data() + i * k_, k_}; }
    std::span<const double> row(std::size_t i) const { return {w_.data() + i * k_, k_}; }
    double at(std::size_t i, std::size_t k) const { return w_[i * k_ + k]; }
    std::size_t n() const { return n_; }
    std::size_t k() const { return k_; }

private:
    std::size_t n_ = 0, k_ = 0;
    std::vector<double> w_;
};

// Center indices sorted by increasing distance to the point; equidistant
// centers keep index order.
std::vector<int> rank_centers(Vec2 point, const CenterSet& centers);
RankMatrix rank_all(std::span<const PlanarPoint> points, const CenterSet& centers);

// Weight of the rank-j center (0-based): p^j (1-p).
std::vector<double> rank_weights(std::size_t k, double p);

// Per-center weights for one point, given its ranking.
std::vector<double> survival_weights(std::span<const int> ranking, double p);
WeightMatrix survival_weight_matrix(const RankMatrix& ranks, double p);

double classic_kmeans_objective(std::span<const PlanarPoint> points, const CenterSet& centers);
double classic_kmedian_objective(std::span<const PlanarPoint> points, const CenterSet& centers);

// Expected squared (respectively plain) distance to the nearest surviving
// center, summed over points: the grouped form of the all-outcomes sum.
double dropout_kmeans_objective(std::span<const PlanarPoint> points, const CenterSet& centers,
                                double p);
double dropout_kmedian_objective(std::span<const PlanarPoint> points, const CenterSet& centers,
                                 double p);

// c_k = sum_i w_ik x_i / sum_i w_ik. Centers whose weight column sums to
// zero (possible only at p = 0) are reported in `empty` and left at the
// origin for the caller's empty-cluster rule.
struct MeanUpdateResult {
    CenterSet centers;
    std::vector<int> empty;
};
MeanUpdateResult update_centers_dropout_mean(std::span<const PlanarPoint> points,
                                             const WeightMatrix& weights);

// One weighted Weiszfeld solve: iterates the fixed point
//   c <- sum_i w_i x_i / d_i  /  sum_i w_i / d_i,   d_i = max(|x_i - c|, 1e-9)
// until the step is below tol or inner_iters is reached.
Vec2 update_center_dropout_median(std::span<const PlanarPoint> points,
                                  std::span<const double> weights, Vec2 current, int inner_iters,
                                  double tol);

// k-means++ seeding: first center uniform over the points, each next chosen
// with probability proportional to squared distance to the nearest chosen
// center. Deterministic given the seed.
CenterSet kmeanspp_init(std::span<const PlanarPoint> points, int k, std::uint64_t seed);

// K distinct data points drawn uniformly (init over the support).
CenterSet uniform_support_init(std::span<const PlanarPoint> points, int k, std::uint64_t seed);

struct RunResult {
    CenterSet centers;
    int iterations = 0;
    bool converged = false;
    // objective_trace[0] is the objective at the initial centers,
    // objective_trace[t] after iteration t; trajectory is indexed the same.
    std::vector<double> objective_trace;
    std::vector<CenterSet> trajectory;
    std::vector<int> reseed_iterations;  // iterations where an empty cluster was reseeded
    double wall_seconds = 0.0;
};

// Lloyd iterations, terminating when the nearest-center assignment repeats.
RunResult run_classic_kmeans(std::span<const PlanarPoint> points, const CenterSet& init,
                             int max_iters = 1000);

// Nearest-center assignment with per-cluster Weiszfeld updates; terminates
// on assignment stability.
RunResult run_classic_kmedian(std::span<const PlanarPoint> points, const CenterSet& init,
                              int max_iters = 1000, int inner_iters = 50, double tol = 1e-6);

// Ranking-weighted Lloyd iterations; terminates when the full ranking
// matrix repeats. The traced objective is non-increasing.
RunResult run_dropout_kmeans(std::span<const PlanarPoint> points, const CenterSet& init, double p,
                             int max_iters = 1000);

// Ranking-weighted Weiszfeld variant; terminates on ranking stability.
RunResult run_dropout_kmedian(std::span<const PlanarPoint> points, const CenterSet& init, double p,
                              int max_iters = 1000, int inner_iters = 50, double tol = 1e-6);

// Baseline from earlier work: every iteration drops each center with
// probability p (resampling an all-dropped mask), then runs one classic
// k-means iteration on the survivors while dropped centers stay put. The
// run stops early only on an iteration in which every center was updated
// and moved less than radius_km / 4; dropped centers have no fresh update,
// so iterations with dropouts never terminate the run.
RunResult run_stochastic_dropout_kmeans(std::span<const PlanarPoint> points, const CenterSet& init,
                                        double p, double radius_km, int max_iters,
                                        std::uint64_t seed);

}  // namespace dropclust
