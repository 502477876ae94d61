// Acceptance gate: one line per criterion, PASS/FAIL/SKIP, nonzero exit on
// any failure. Each check states its tolerance and measured margin so a
// failure is diagnosable from the log alone.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "dropclust/clustering.hpp"
#include "dropclust/experiment.hpp"
#include "dropclust/metrics.hpp"
#include "dropclust/rng.hpp"
#include "oracles.hpp"

using namespace dropclust;

namespace {

int failures = 0;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++failures;
}

std::string fmt(const char* f, ...) {
    va_list ap;
    va_start(ap, f);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::vector<PlanarPoint> random_fleet(int n, int ships, double scale, Rng& rng) {
    std::vector<PlanarPoint> pts(n);
    for (int i = 0; i < n; ++i) {
        pts[i] = {(rng.uniform01() * 2 - 1) * scale, (rng.uniform01() * 2 - 1) * scale,
                  "V" + std::to_string(i % ships)};
    }
    return pts;
}

CenterSet random_centers(int k, double scale, Rng& rng) {
    CenterSet c(k);
    for (int i = 0; i < k; ++i) {
        c[i] = {(rng.uniform01() * 2 - 1) * scale, (rng.uniform01() * 2 - 1) * scale};
    }
    return c;
}

// 50 seeded instances cycling K in 1..10 and p in {0, 0.3, 0.7}.
struct Instance {
    std::vector<PlanarPoint> points;
    CenterSet centers;
    double p;
    int k;
};

std::vector<Instance> oracle_sweep() {
    std::vector<Instance> out;
    Rng rng(0xACCE55);
    const double ps[3] = {0.0, 0.3, 0.7};
    for (int i = 0; i < 50; ++i) {
        Instance inst;
        inst.k = 1 + i % 10;
        inst.p = ps[i % 3];
        const int n = 20 + static_cast<int>(rng.uniform_index(181));  // <= 200
        inst.points = random_fleet(n, 1 + n / 5, 40.0, rng);
        inst.centers = random_centers(inst.k, 40.0, rng);
        out.push_back(std::move(inst));
    }
    return out;
}

void ac1_pd_oracle() {
    const double t0 = now_seconds();
    double worst = 0.0;
    for (const auto& inst : oracle_sweep()) {
        auto ships = build_ship_grouping(inst.points);
        DropoutParams params{inst.p, inst.k, 10.0};
        const double grouped = detection_probability(ships, inst.points, inst.centers, params);
        const double brute =
            detection_probability_bruteforce(ships, inst.points, inst.centers, params);
        worst = std::max(worst, std::abs(grouped - brute));
    }
    const double dt = now_seconds() - t0;
    report("AC1", worst <= 1e-12 && dt < 10.0,
           fmt("detection probability grouped vs 2^K enumeration: max abs diff %.3e "
               "(tol 1e-12) over 50 instances, %.2f s (budget 10 s)",
               worst, dt));
}

void ac2_objective_oracle() {
    const double t0 = now_seconds();
    double worst = 0.0;
    for (const auto& inst : oracle_sweep()) {
        const double mean_g = dropout_kmeans_objective(inst.points, inst.centers, inst.p);
        const double mean_b = oracle::dropout_objective_enum(inst.points, inst.centers, inst.p, true);
        worst = std::max(worst, std::abs(mean_g - mean_b) / std::max(1.0, std::abs(mean_b)));
        const double med_g = dropout_kmedian_objective(inst.points, inst.centers, inst.p);
        const double med_b = oracle::dropout_objective_enum(inst.points, inst.centers, inst.p, false);
        worst = std::max(worst, std::abs(med_g - med_b) / std::max(1.0, std::abs(med_b)));
        const double rmsd_g = dropout_rmsd(inst.points, inst.centers, inst.p);
        const double rmsd_b = dropout_rmsd_bruteforce(inst.points, inst.centers, inst.p);
        worst = std::max(worst, std::abs(rmsd_g - rmsd_b) / std::max(1.0, std::abs(rmsd_b)));
    }
    const double dt = now_seconds() - t0;
    report("AC2", worst <= 1e-9 && dt < 30.0,
           fmt("objectives and RMSD grouped vs power-set enumeration: max rel diff %.3e "
               "(tol 1e-9) over 50 instances, %.2f s (budget 30 s)",
               worst, dt));
}

void ac3_monotonicity() {
    Rng rng(0x303);
    int violations = 0;
    int runs = 0;
    const int ks[3] = {2, 5, 10};
    for (int i = 0; i < 100; ++i) {
        const int k = ks[i % 3];
        auto pts = random_fleet(150, 10, 60.0, rng);
        auto init = kmeanspp_init(pts, k, rng.next_u64());
        auto r = run_dropout_kmeans(pts, init, 0.3);
        ++runs;
        for (std::size_t t = 1; t < r.objective_trace.size(); ++t) {
            if (r.objective_trace[t] > r.objective_trace[t - 1]) ++violations;
        }
    }
    report("AC3", violations == 0,
           fmt("dropout k-means objective trace non-increasing: %d violations over %d runs "
               "(required 0)",
               violations, runs));
}

void ac4_degeneration() {
    Rng rng(0x404);
    bool means_exact = true;
    double median_worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        auto pts = random_fleet(120, 8, 50.0, rng);
        auto init = kmeanspp_init(pts, 4, rng.next_u64());

        auto classic = run_classic_kmeans(pts, init);
        auto dropout = run_dropout_kmeans(pts, init, 0.0);
        const std::size_t common =
            std::min(classic.trajectory.size(), dropout.trajectory.size());
        for (std::size_t t = 0; t < common; ++t) {
            if (!(dropout.trajectory[t] == classic.trajectory[t])) means_exact = false;
        }
        if (!(dropout.centers == classic.centers)) means_exact = false;

        auto cmed = run_classic_kmedian(pts, init);
        auto dmed = run_dropout_kmedian(pts, init, 0.0);
        for (std::size_t kk = 0; kk < cmed.centers.size(); ++kk) {
            median_worst = std::max(median_worst, distance(cmed.centers[kk], dmed.centers[kk]));
        }
    }
    report("AC4", means_exact && median_worst <= 1e-6,
           fmt("p=0 degeneration over 20 runs: k-means trajectories exact %s, k-median final "
               "center max diff %.3e km (tol 1e-6)",
               means_exact ? "yes" : "NO", median_worst));
}

void ac5_weight_normalization() {
    auto pts = generate_synthetic(default_fixture_spec());
    const double p = 0.3;
    const int k = 5;
    auto init = kmeanspp_init(pts, k, derive_seed(42, 0));
    auto run = run_dropout_kmeans(pts, init, p);
    const double want = 1.0 - pow_int(p, k);
    double worst = 0.0;
    for (const auto& centers : run.trajectory) {
        auto weights = survival_weight_matrix(rank_all(pts, centers), p);
        for (std::size_t i = 0; i < weights.n(); ++i) {
            double sum = 0.0;
            for (int kk = 0; kk < k; ++kk) sum += weights.at(i, kk);
            worst = std::max(worst, std::abs(sum - want));
        }
    }
    report("AC5", worst <= 1e-12,
           fmt("weight rows sum to 1-p^K at every point of every logged iteration "
               "(K=5, p=0.3, %d iterations): max |sum-(1-p^K)| = %.3e (tol 1e-12)",
               run.iterations, worst));
}

void ac6_direction_of_effect() {
    const double t0 = now_seconds();
    ExperimentConfig config;  // defaults: bundled fixture, K=5, p=0.3, r=10, 30 trials
    auto data = load_dataset(config);
    auto rep = run_experiment(config, data);
    const AlgorithmSummary* by_alg[5] = {};
    for (const auto& s : rep.summaries) by_alg[static_cast<int>(s.algorithm)] = &s;
    const auto& ck = *by_alg[static_cast<int>(Algorithm::ClassicKmeans)];
    const auto& dk = *by_alg[static_cast<int>(Algorithm::DropoutKmeans)];
    const auto& cm = *by_alg[static_cast<int>(Algorithm::ClassicKmedian)];
    const auto& dm = *by_alg[static_cast<int>(Algorithm::DropoutKmedian)];
    const double dt = now_seconds() - t0;
    const bool ok = dk.rmsd_mean < ck.rmsd_mean && dk.pd_mean > ck.pd_mean &&
                    dm.pd_mean >= cm.pd_mean && dt < 120.0;
    report("AC6", ok,
           fmt("bundled fixture, 30 trials: RMSD dropout %.2f < classic %.2f km; P_d dropout "
               "%.4f > classic %.4f; P_d k-median dropout %.4f >= classic %.4f; %.1f s "
               "(budget 120 s)",
               dk.rmsd_mean, ck.rmsd_mean, dk.pd_mean, ck.pd_mean, dm.pd_mean, cm.pd_mean, dt));
}

void ac7_complexity() {
    const double t0 = now_seconds();
    SynthSpec spec;
    spec.blobs = 10;
    spec.points_per_blob = 5000;  // N = 50000
    spec.spread_km = 25.0;
    spec.ships_per_blob = 10;
    spec.extent_km = 150.0;
    spec.seed = 99;
    auto pts = generate_synthetic(spec);

    const int ks[3] = {4, 16, 64};
    double per_iter[3] = {};
    for (int j = 0; j < 3; ++j) {
        auto init = uniform_support_init(pts, ks[j], 7);
        double best = 1e300;
        for (int rep = 0; rep < 3; ++rep) {
            auto r = run_dropout_kmeans(pts, init, 0.3, 5);
            best = std::min(best, r.wall_seconds / std::max(1, r.iterations));
        }
        per_iter[j] = best;
    }
    // least-squares slope of log(time) against log(K)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j < 3; ++j) {
        const double x = std::log(static_cast<double>(ks[j]));
        const double y = std::log(per_iter[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    const double dt = now_seconds() - t0;
    report("AC7", slope < 1.5 && dt < 300.0,
           fmt("per-iteration scaling at N=50000: %.3f / %.3f / %.3f ms for K=4/16/64, fitted "
               "exponent %.3f (required < 1.5), %.1f s (budget 300 s)",
               per_iter[0] * 1e3, per_iter[1] * 1e3, per_iter[2] * 1e3, slope, dt));
}

void ac8_conditional_replication() {
    const char* csv = std::getenv("DROPCLUST_AIS_CSV");
    if (!csv || !*csv) {
        std::printf("AC8 SKIP  conditional replication check: set DROPCLUST_AIS_CSV (and "
                    "optionally DROPCLUST_REGION_GEOJSON) to a Gabonese-EEZ AIS extract to "
                    "run the five-algorithm comparison with defaults\n");
        return;
    }
    ExperimentConfig config;
    config.input_path = csv;
    if (const char* region = std::getenv("DROPCLUST_REGION_GEOJSON"); region && *region) {
        config.region_path = region;
    }
    auto data = load_dataset(config);
    auto rep = run_experiment(config, data);
    struct Target {
        Algorithm alg;
        double pd;
        double rmsd;
    };
    const Target targets[5] = {{Algorithm::ClassicKmeans, 0.38, 154.0},
                               {Algorithm::DropoutKmeans, 0.45, 140.0},
                               {Algorithm::StochasticKmeans, 0.45, 144.0},
                               {Algorithm::ClassicKmedian, 0.48, 151.0},
                               {Algorithm::DropoutKmedian, 0.52, 141.0}};
    bool ok = true;
    std::string detail = "replication vs reference results:";
    for (const auto& t : targets) {
        for (const auto& s : rep.summaries) {
            if (s.algorithm != t.alg) continue;
            const bool here = std::abs(s.pd_mean - t.pd) <= 0.05 &&
                              std::abs(s.rmsd_mean - t.rmsd) <= 10.0;
            ok = ok && here;
            detail += fmt(" %s P_d %.3f (want %.2f +-0.05) RMSD %.1f (want %.0f +-10);",
                          algorithm_token(t.alg).c_str(), s.pd_mean, t.pd, s.rmsd_mean, t.rmsd);
        }
    }
    report("AC8", ok, detail);
}

void ac9_stochastic_cap() {
    SynthSpec spec;
    spec.blobs = 1;
    spec.points_per_blob = 1500;
    spec.spread_km = 250.0;
    spec.ships_per_blob = 6;
    spec.extent_km = 0.0;
    spec.seed = 11;

    ExperimentConfig config;
    config.k = 2;
    config.trials = 20;
    config.seed = 42;
    config.algorithms = {Algorithm::StochasticKmeans, Algorithm::DropoutKmeans};

    Dataset data;
    data.points = generate_synthetic(spec);
    data.ships = build_ship_grouping(data.points);
    auto rep = run_experiment(config, data);

    int caps = 0;
    int dropout_slow = 0;
    int dropout_max = 0;
    for (const auto& row : rep.rows) {
        if (row.algorithm == Algorithm::StochasticKmeans) {
            if (!row.converged && row.iterations == config.stochastic_max_iters) ++caps;
        } else {
            dropout_max = std::max(dropout_max, row.iterations);
            if (!row.converged || row.iterations >= 50) ++dropout_slow;
        }
    }
    report("AC9", caps > 10 && dropout_slow == 0,
           fmt("single-blob K=2 fixture: stochastic baseline hit the 300-iteration cap in "
               "%d/20 runs (majority required); dropout k-means converged in every run, max "
               "%d iterations (required < 50)",
               caps, dropout_max));
}

}  // namespace

int main() {
    now_seconds();  // pin the clock origin
    ac1_pd_oracle();
    ac2_objective_oracle();
    ac3_monotonicity();
    ac4_degeneration();
    ac5_weight_normalization();
    ac6_direction_of_effect();
    ac7_complexity();
    ac8_conditional_replication();
    ac9_stochastic_cap();
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
