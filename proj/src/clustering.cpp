#include "dropclust/clustering.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "dropclust/rng.hpp"

namespace dropclust {

namespace {

constexpr double kWeiszfeldFloor = 1e-9;  // km

// Compensated accumulator. Objective traces feed a strict non-increase
// assertion, so plain summation error is not acceptable there.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void check_run_inputs(std::span<const PlanarPoint> points, const CenterSet& init) {
    if (points.empty()) throw DataError("clustering requires at least one point");
    if (init.empty()) throw ConfigError("initial center set is empty");
}

void check_p(double p) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must be in [0, 1)");
}

int nearest_center(Vec2 pt, const CenterSet& centers) {
    int best = 0;
    double best_d = squared_distance(pt, centers[0]);
    for (int k = 1; k < static_cast<int>(centers.size()); ++k) {
        double d = squared_distance(pt, centers[k]);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::vector<int> nearest_assignment(std::span<const PlanarPoint> points,
                                    const CenterSet& centers) {
    std::vector<int> assign(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        assign[i] = nearest_center(points[i].pos(), centers);
    }
    return assign;
}

// Moves centers[target] to the point farthest from its nearest center,
// where "nearest" ranges over `candidates`. The caller then appends the
// target to the candidate list so a second reseed picks a different point.
void reseed_center(std::span<const PlanarPoint> points, CenterSet& centers, int target,
                   const std::vector<int>& candidates) {
    double best = -1.0;
    Vec2 best_pt = points[0].pos();
    for (const auto& pt : points) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int k : candidates) {
            nearest = std::min(nearest, squared_distance(pt.pos(), centers[k]));
        }
        if (nearest > best) {
            best = nearest;
            best_pt = pt.pos();
        }
    }
    centers[target] = best_pt;
}

// Reseeds every center listed in `empty`; `candidates` holds the non-empty
// centers and grows as reseeds land.
void reseed_all(std::span<const PlanarPoint> points, CenterSet& centers,
                const std::vector<int>& empty, std::vector<int>& candidates) {
    for (int e : empty) {
        reseed_center(points, centers, e, candidates);
        candidates.push_back(e);
    }
}

std::vector<int> complement(const std::vector<int>& empty, int k) {
    std::vector<int> out;
    out.reserve(k - empty.size());
    for (int i = 0; i < k; ++i) {
        if (!std::binary_search(empty.begin(), empty.end(), i)) out.push_back(i);
    }
    return out;
}

double dropout_objective_ranked(std::span<const PlanarPoint> points, const CenterSet& centers,
                                const RankMatrix& ranks, std::span<const double> rankw,
                                bool squared) {
    KahanSum s;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto row = ranks.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            double d2 = squared_distance(points[i].pos(), centers[row[j]]);
            s.add(rankw[j] * (squared ? d2 : std::sqrt(d2)));
        }
    }
    return s.sum;
}

// Weighted-mean update driven by the rank matrix directly; bitwise equal to
// update_centers_dropout_mean on the expanded weight matrix (the skipped
// terms are exact zeros).
MeanUpdateResult update_from_ranks(std::span<const PlanarPoint> points, const RankMatrix& ranks,
                                   std::span<const double> rankw) {
    std::size_t k = ranks.k();
    std::vector<double> sx(k, 0.0), sy(k, 0.0), sw(k, 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto row = ranks.row(i);
        for (std::size_t j = 0; j < k; ++j) {
            double w = rankw[j];
            if (w == 0.0) break;  // rank weights only trail off at p = 0
            sx[row[j]] += w * points[i].x;
            sy[row[j]] += w * points[i].y;
            sw[row[j]] += w;
        }
    }
    MeanUpdateResult out;
    out.centers.resize(k);
    for (std::size_t kk = 0; kk < k; ++kk) {
        if (sw[kk] == 0.0) {
            out.empty.push_back(static_cast<int>(kk));
            out.centers[kk] = Vec2{0.0, 0.0};
        } else {
            out.centers[kk] = Vec2{sx[kk] / sw[kk], sy[kk] / sw[kk]};
        }
    }
    return out;
}

}  // namespace

std::vector<int> rank_centers(Vec2 point, const CenterSet& centers) {
    if (centers.empty()) throw ConfigError("rank_centers requires at least one center");
    std::vector<int> idx(centers.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> d2(centers.size());
    for (std::size_t k = 0; k < centers.size(); ++k) {
        d2[k] = squared_distance(point, centers[k]);
    }
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (d2[a] != d2[b]) return d2[a] < d2[b];
        return a < b;
    });
    return idx;
}

RankMatrix rank_all(std::span<const PlanarPoint> points, const CenterSet& centers) {
    if (centers.empty()) throw ConfigError("rank_all requires at least one center");
    std::size_t k = centers.size();
    RankMatrix ranks(points.size(), k);
    std::vector<double> d2(k);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            d2[kk] = squared_distance(points[i].pos(), centers[kk]);
        }
        auto row = ranks.row(i);
        std::iota(row.begin(), row.end(), 0);
        std::sort(row.begin(), row.end(), [&](int a, int b) {
            if (d2[a] != d2[b]) return d2[a] < d2[b];
            return a < b;
        });
    }
    return ranks;
}

std::vector<double> rank_weights(std::size_t k, double p) {
    check_p(p);
    std::vector<double> w(k);
    double pj = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
        w[j] = pj * (1.0 - p);
        pj *= p;
    }
    return w;
}

std::vector<double> survival_weights(std::span<const int> ranking, double p) {
    auto rankw = rank_weights(ranking.size(), p);
    std::vector<double> w(ranking.size());
    for (std::size_t j = 0; j < ranking.size(); ++j) {
        w[ranking[j]] = rankw[j];
    }
    return w;
}

WeightMatrix survival_weight_matrix(const RankMatrix& ranks, double p) {
    auto rankw = rank_weights(ranks.k(), p);
    WeightMatrix w(ranks.n(), ranks.k());
    for (std::size_t i = 0; i < ranks.n(); ++i) {
        auto rrow = ranks.row(i);
        auto wrow = w.row(i);
        for (std::size_t j = 0; j < rrow.size(); ++j) {
            wrow[rrow[j]] = rankw[j];
        }
    }
    return w;
}

double classic_kmeans_objective(std::span<const PlanarPoint> points, const CenterSet& centers) {
    if (centers.empty()) throw ConfigError("objective requires at least one center");
    KahanSum s;
    for (const auto& pt : points) {
        double best = squared_distance(pt.pos(), centers[0]);
        for (std::size_t k = 1; k < centers.size(); ++k) {
            best = std::min(best, squared_distance(pt.pos(), centers[k]));
        }
        s.add(best);
    }
    return s.sum;
}

double classic_kmedian_objective(std::span<const PlanarPoint> points, const CenterSet& centers) {
    if (centers.empty()) throw ConfigError("objective requires at least one center");
    KahanSum s;
    for (const auto& pt : points) {
        double best = squared_distance(pt.pos(), centers[0]);
        for (std::size_t k = 1; k < centers.size(); ++k) {
            best = std::min(best, squared_distance(pt.pos(), centers[k]));
        }
        s.add(std::sqrt(best));
    }
    return s.sum;
}

double dropout_kmeans_objective(std::span<const PlanarPoint> points, const CenterSet& centers,
                                double p) {
    check_p(p);
    auto ranks = rank_all(points, centers);
    auto rankw = rank_weights(centers.size(), p);
    return dropout_objective_ranked(points, centers, ranks, rankw, true);
}

double dropout_kmedian_objective(std::span<const PlanarPoint> points, const CenterSet& centers,
                                 double p) {
    check_p(p);
    auto ranks = rank_all(points, centers);
    auto rankw = rank_weights(centers.size(), p);
    return dropout_objective_ranked(points, centers, ranks, rankw, false);
}

MeanUpdateResult update_centers_dropout_mean(std::span<const PlanarPoint> points,
                                             const WeightMatrix& weights) {
    std::size_t k = weights.k();
    std::vector<double> sx(k, 0.0), sy(k, 0.0), sw(k, 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto row = weights.row(i);
        for (std::size_t kk = 0; kk < k; ++kk) {
            sx[kk] += row[kk] * points[i].x;
            sy[kk] += row[kk] * points[i].y;
            sw[kk] += row[kk];
        }
    }
    MeanUpdateResult out;
    out.centers.resize(k);
    for (std::size_t kk = 0; kk < k; ++kk) {
        if (sw[kk] == 0.0) {
            out.empty.push_back(static_cast<int>(kk));
            out.centers[kk] = Vec2{0.0, 0.0};
        } else {
            out.centers[kk] = Vec2{sx[kk] / sw[kk], sy[kk] / sw[kk]};
        }
    }
    return out;
}

Vec2 update_center_dropout_median(std::span<const PlanarPoint> points,
                                  std::span<const double> weights, Vec2 current, int inner_iters,
                                  double tol) {
    Vec2 c = current;
    for (int it = 0; it < inner_iters; ++it) {
        double nx = 0.0, ny = 0.0, den = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double w = weights[i];
            if (w == 0.0) continue;
            double d = std::max(distance(points[i].pos(), c), kWeiszfeldFloor);
            nx += w * points[i].x / d;
            ny += w * points[i].y / d;
            den += w / d;
        }
        if (den == 0.0) return c;
        Vec2 next{nx / den, ny / den};
        double step = distance(next, c);
        c = next;
        if (step < tol) break;
    }
    return c;
}

CenterSet kmeanspp_init(std::span<const PlanarPoint> points, int k, std::uint64_t seed) {
    if (points.empty()) throw DataError("k-means++ requires at least one point");
    if (k < 1) throw ConfigError("K must be at least 1");
    Rng rng(seed);
    CenterSet centers;
    centers.reserve(k);
    centers.push_back(points[rng.uniform_index(points.size())].pos());
    std::vector<double> d2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        d2[i] = squared_distance(points[i].pos(), centers[0]);
    }
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        if (total == 0.0) {
            // every point coincides with a chosen center
            centers.push_back(points[rng.uniform_index(points.size())].pos());
        } else {
            double u = rng.uniform01() * total;
            double acc = 0.0;
            std::size_t pick = points.size() - 1;
            for (std::size_t i = 0; i < points.size(); ++i) {
                acc += d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            centers.push_back(points[pick].pos());
        }
        for (std::size_t i = 0; i < points.size(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(points[i].pos(), centers.back()));
        }
    }
    return centers;
}

CenterSet uniform_support_init(std::span<const PlanarPoint> points, int k, std::uint64_t seed) {
    if (points.empty()) throw DataError("initialization requires at least one point");
    if (k < 1) throw ConfigError("K must be at least 1");
    Rng rng(seed);
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    CenterSet centers;
    centers.reserve(k);
    for (std::size_t j = 0; j < idx.size() && static_cast<int>(centers.size()) < k; ++j) {
        std::swap(idx[j], idx[j + rng.uniform_index(idx.size() - j)]);
        Vec2 cand = points[idx[j]].pos();
        bool dup = std::any_of(centers.begin(), centers.end(),
                               [&](Vec2 c) { return c == cand; });
        if (!dup) centers.push_back(cand);
    }
    if (static_cast<int>(centers.size()) < k) {
        throw DataError("fewer than K distinct points");
    }
    return centers;
}

RunResult run_classic_kmeans(std::span<const PlanarPoint> points, const CenterSet& init,
                             int max_iters) {
    check_run_inputs(points, init);
    Stopwatch timer;
    const int k = static_cast<int>(init.size());
    RunResult r;
    CenterSet centers = init;
    auto assign = nearest_assignment(points, centers);
    r.objective_trace.push_back(classic_kmeans_objective(points, centers));
    r.trajectory.push_back(centers);
    for (int iter = 1; iter <= max_iters; ++iter) {
        std::vector<double> sx(k, 0.0), sy(k, 0.0);
        std::vector<int> cnt(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            int c = assign[i];
            sx[c] += points[i].x;
            sy[c] += points[i].y;
            ++cnt[c];
        }
        CenterSet next(k);
        std::vector<int> empty;
        for (int kk = 0; kk < k; ++kk) {
            if (cnt[kk] == 0) {
                empty.push_back(kk);
                next[kk] = centers[kk];
            } else {
                next[kk] = Vec2{sx[kk] / cnt[kk], sy[kk] / cnt[kk]};
            }
        }
        if (!empty.empty()) {
            auto candidates = complement(empty, k);
            reseed_all(points, next, empty, candidates);
            r.reseed_iterations.push_back(iter);
        }
        auto next_assign = nearest_assignment(points, next);
        r.objective_trace.push_back(classic_kmeans_objective(points, next));
        r.trajectory.push_back(next);
        centers = std::move(next);
        r.iterations = iter;
        if (next_assign == assign) {
            r.converged = true;
            break;
        }
        assign = std::move(next_assign);
    }
    r.centers = std::move(centers);
    r.wall_seconds = timer.seconds();
    return r;
}

RunResult run_classic_kmedian(std::span<const PlanarPoint> points, const CenterSet& init,
                              int max_iters, int inner_iters, double tol) {
    check_run_inputs(points, init);
    Stopwatch timer;
    const int k = static_cast<int>(init.size());
    RunResult r;
    CenterSet centers = init;
    auto assign = nearest_assignment(points, centers);
    r.objective_trace.push_back(classic_kmedian_objective(points, centers));
    r.trajectory.push_back(centers);
    std::vector<double> w(points.size());
    for (int iter = 1; iter <= max_iters; ++iter) {
        CenterSet next(k);
        std::vector<int> empty;
        for (int kk = 0; kk < k; ++kk) {
            int cnt = 0;
            double mx = 0.0, my = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                w[i] = (assign[i] == kk) ? 1.0 : 0.0;
                cnt += (assign[i] == kk);
                mx += w[i] * points[i].x;
                my += w[i] * points[i].y;
            }
            if (cnt == 0) {
                empty.push_back(kk);
                next[kk] = centers[kk];
            } else {
                // inner start at the cluster mean: a data point is a fixed
                // point of the floored update, so starting there would freeze
                // the center at its k-means++ seed
                Vec2 start{mx / cnt, my / cnt};
                next[kk] = update_center_dropout_median(points, w, start, inner_iters, tol);
            }
        }
        if (!empty.empty()) {
            auto candidates = complement(empty, k);
            reseed_all(points, next, empty, candidates);
            r.reseed_iterations.push_back(iter);
        }
        auto next_assign = nearest_assignment(points, next);
        r.objective_trace.push_back(classic_kmedian_objective(points, next));
        r.trajectory.push_back(next);
        centers = std::move(next);
        r.iterations = iter;
        if (next_assign == assign) {
            r.converged = true;
            break;
        }
        assign = std::move(next_assign);
    }
    r.centers = std::move(centers);
    r.wall_seconds = timer.seconds();
    return r;
}

RunResult run_dropout_kmeans(std::span<const PlanarPoint> points, const CenterSet& init, double p,
                             int max_iters) {
    check_run_inputs(points, init);
    check_p(p);
    Stopwatch timer;
    const int k = static_cast<int>(init.size());
    RunResult r;
    CenterSet centers = init;
    auto rankw = rank_weights(k, p);
    auto ranks = rank_all(points, centers);
    r.objective_trace.push_back(dropout_objective_ranked(points, centers, ranks, rankw, true));
    r.trajectory.push_back(centers);
    for (int iter = 1; iter <= max_iters; ++iter) {
        auto upd = update_from_ranks(points, ranks, rankw);
        CenterSet next = std::move(upd.centers);
        if (!upd.empty.empty()) {
            for (int e : upd.empty) next[e] = centers[e];
            auto candidates = complement(upd.empty, k);
            reseed_all(points, next, upd.empty, candidates);
            r.reseed_iterations.push_back(iter);
        }
        auto next_ranks = rank_all(points, next);
        r.objective_trace.push_back(dropout_objective_ranked(points, next, next_ranks, rankw, true));
        r.trajectory.push_back(next);
        centers = std::move(next);
        r.iterations = iter;
        if (next_ranks == ranks) {
            r.converged = true;
            break;
        }
        ranks = std::move(next_ranks);
    }
    r.centers = std::move(centers);
    r.wall_seconds = timer.seconds();
    return r;
}

RunResult run_dropout_kmedian(std::span<const PlanarPoint> points, const CenterSet& init, double p,
                              int max_iters, int inner_iters, double tol) {
    check_run_inputs(points, init);
    check_p(p);
    Stopwatch timer;
    const int k = static_cast<int>(init.size());
    RunResult r;
    CenterSet centers = init;
    auto rankw = rank_weights(k, p);
    auto ranks = rank_all(points, centers);
    r.objective_trace.push_back(dropout_objective_ranked(points, centers, ranks, rankw, false));
    r.trajectory.push_back(centers);
    std::vector<double> col(points.size());
    for (int iter = 1; iter <= max_iters; ++iter) {
        auto weights = survival_weight_matrix(ranks, p);
        CenterSet next(k);
        std::vector<int> empty;
        for (int kk = 0; kk < k; ++kk) {
            double colsum = 0.0, mx = 0.0, my = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                col[i] = weights.at(i, kk);
                colsum += col[i];
                mx += col[i] * points[i].x;
                my += col[i] * points[i].y;
            }
            if (colsum == 0.0) {
                empty.push_back(kk);
                next[kk] = centers[kk];
            } else {
                // inner start at the weighted mean, never at a data point
                Vec2 start{mx / colsum, my / colsum};
                next[kk] = update_center_dropout_median(points, col, start, inner_iters, tol);
            }
        }
        if (!empty.empty()) {
            auto candidates = complement(empty, k);
            reseed_all(points, next, empty, candidates);
            r.reseed_iterations.push_back(iter);
        }
        auto next_ranks = rank_all(points, next);
        r.objective_trace.push_back(dropout_objective_ranked(points, next, next_ranks, rankw, false));
        r.trajectory.push_back(next);
        centers = std::move(next);
        r.iterations = iter;
        if (next_ranks == ranks) {
            r.converged = true;
            break;
        }
        ranks = std::move(next_ranks);
    }
    r.centers = std::move(centers);
    r.wall_seconds = timer.seconds();
    return r;
}

RunResult run_stochastic_dropout_kmeans(std::span<const PlanarPoint> points, const CenterSet& init,
                                        double p, double radius_km, int max_iters,
                                        std::uint64_t seed) {
    check_run_inputs(points, init);
    check_p(p);
    if (!(radius_km > 0.0)) throw ConfigError("radius must be positive");
    Stopwatch timer;
    const int k = static_cast<int>(init.size());
    const double threshold = radius_km / 4.0;
    Rng rng(seed);
    RunResult r;
    CenterSet centers = init;
    r.objective_trace.push_back(classic_kmeans_objective(points, centers));
    r.trajectory.push_back(centers);
    std::vector<char> dropped(k);
    for (int iter = 1; iter <= max_iters; ++iter) {
        int survivors = 0;
        do {
            survivors = 0;
            for (int kk = 0; kk < k; ++kk) {
                dropped[kk] = rng.bernoulli(p) ? 1 : 0;
                survivors += dropped[kk] ? 0 : 1;
            }
        } while (survivors == 0);
        std::vector<int> surviving;
        surviving.reserve(survivors);
        for (int kk = 0; kk < k; ++kk) {
            if (!dropped[kk]) surviving.push_back(kk);
        }

        // one classic k-means iteration over the survivors; dropped centers
        // take no part and stay put
        std::vector<double> sx(k, 0.0), sy(k, 0.0);
        std::vector<int> cnt(k, 0);
        for (const auto& pt : points) {
            int best = surviving[0];
            double best_d = squared_distance(pt.pos(), centers[best]);
            for (std::size_t s = 1; s < surviving.size(); ++s) {
                double d = squared_distance(pt.pos(), centers[surviving[s]]);
                if (d < best_d) {
                    best_d = d;
                    best = surviving[s];
                }
            }
            sx[best] += pt.x;
            sy[best] += pt.y;
            ++cnt[best];
        }
        CenterSet next = centers;
        std::vector<int> empty;
        std::vector<int> nonempty;
        for (int kk : surviving) {
            if (cnt[kk] == 0) {
                empty.push_back(kk);
            } else {
                next[kk] = Vec2{sx[kk] / cnt[kk], sy[kk] / cnt[kk]};
                nonempty.push_back(kk);
            }
        }
        if (!empty.empty()) {
            reseed_all(points, next, empty, nonempty);
            r.reseed_iterations.push_back(iter);
        }

        // the movement test runs only when every center got a fresh update;
        // dropped centers carry no movement information this iteration
        bool stop = survivors == k;
        if (stop) {
            for (int kk = 0; kk < k; ++kk) {
                if (distance(next[kk], centers[kk]) >= threshold) {
                    stop = false;
                    break;
                }
            }
        }
        r.objective_trace.push_back(classic_kmeans_objective(points, next));
        r.trajectory.push_back(next);
        centers = std::move(next);
        r.iterations = iter;
        if (stop) {
            r.converged = true;
            break;
        }
    }
    r.centers = std::move(centers);
    r.wall_seconds = timer.seconds();
    return r;
}

}  // namespace dropclust
