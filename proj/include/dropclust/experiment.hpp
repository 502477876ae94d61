#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dropclust/geo.hpp"
#include "dropclust/metrics.hpp"
#include "dropclust/types.hpp"

namespace dropclust {

enum class Algorithm {
    ClassicKmeans,
    DropoutKmeans,
    StochasticKmeans,
    ClassicKmedian,
    DropoutKmedian,
};

// Report order; also the order rows appear in emitted files.
std::vector<Algorithm> all_algorithms();

// CLI token, e.g. "dropout-kmeans".
std::string algorithm_token(Algorithm a);
// Human name, e.g. "dropout k-means".
std::string algorithm_display(Algorithm a);
// Accepts a token; throws ConfigError on unknown names.
Algorithm parse_algorithm(const std::string& token);

struct SynthSpec {
    int blobs = 5;
    int points_per_blob = 200;
    double spread_km = 20.0;
    int ships_per_blob = 8;
    double extent_km = 250.0;  // blob centers drawn uniformly in [-extent, extent]^2
    std::uint64_t seed = 7;
};

// Gaussian blobs in planar km; points within a blob are dealt round-robin
// to ships_per_blob synthetic ship ids. Deterministic given the spec.
std::vector<PlanarPoint> generate_synthetic(const SynthSpec& spec);

// The dataset `run` uses when no --input is given; also checked into the
// test data as a planar cache.
SynthSpec default_fixture_spec();

struct ExperimentConfig {
    std::string input_path;   // empty: bundled synthetic fixture
    std::string region_path;  // optional GeoJSON polygon
    std::optional<std::array<double, 4>> bbox;  // lat_min, lon_min, lat_max, lon_max
    geo::AisFormat ais;
    int k = 5;
    double p = 0.3;
    double radius_km = 10.0;
    int trials = 30;
    std::uint64_t seed = 42;
    std::vector<Algorithm> algorithms = all_algorithms();
    int max_iters = 1000;
    int stochastic_max_iters = 300;
    int weiszfeld_inner_iters = 50;
    double weiszfeld_tol = 1e-6;
    bool uniform_init = false;  // k-means++ otherwise

    void validate() const;
};

struct Dataset {
    std::vector<PlanarPoint> points;
    ShipGrouping ships;
    // set when the points came from geographic input; planar caches carry
    // it in a sidecar, synthetic data has none
    std::optional<geo::ProjectionOrigin> origin;
};

Dataset load_dataset(const ExperimentConfig& config);

struct TrialRow {
    Algorithm algorithm;
    int trial = 0;
    std::uint64_t trial_seed = 0;
    int iterations = 0;
    bool converged = false;
    double runtime_s = 0.0;
    double rmsd_km = 0.0;
    double p_d = 0.0;
    CenterSet init;
    CenterSet centers;
};

struct AlgorithmSummary {
    Algorithm algorithm;
    int trials = 0;
    double iterations_mean = 0.0, iterations_std = 0.0;
    double runtime_mean = 0.0, runtime_std = 0.0;
    double rmsd_mean = 0.0, rmsd_std = 0.0;
    double pd_mean = 0.0, pd_std = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialRow> rows;
    std::vector<AlgorithmSummary> summaries;
};

// Runs every selected algorithm from one shared k-means++ initialization
// per trial and aggregates metrics. Throws DataError when the dataset has
// fewer than K distinct points.
ExperimentReport run_experiment(const ExperimentConfig& config, const Dataset& data);

// Plain-text summary table. Columns: algorithm, iterations, runtime_s,
// rmsd_km, p_d. Cells are mean ± sample std (n-1; zero for one trial).
std::string report_table(const ExperimentReport& report);

// Full structured report: config echo, per-algorithm summaries, raw trial
// rows. Stable key order.
std::string report_json(const ExperimentReport& report);

// Final centers per algorithm per trial as GeoJSON points (unprojected via
// the dataset origin; origin (0,0) when the dataset is purely planar).
std::string placements_geojson(const ExperimentReport& report,
                               const std::optional<geo::ProjectionOrigin>& origin);

// Writes table.txt / report.json / placements.geojson for the selected
// formats ("table", "structured", "geo") under out_dir.
void emit_report(const ExperimentReport& report, const std::optional<geo::ProjectionOrigin>& origin,
                 const std::string& out_dir, const std::vector<std::string>& formats);

struct PlacementGroup {
    std::string algorithm;
    int trial = 0;
    CenterSet centers;
};

// Parses a placements GeoJSON back into planar center groups using its
// embedded projection origin.
std::vector<PlacementGroup> read_placements_geojson(const std::string& path);

}  // namespace dropclust
