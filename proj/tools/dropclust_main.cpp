#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dropclust/experiment.hpp"
#include "dropclust/geo.hpp"
#include "dropclust/metrics.hpp"
#include "dropclust/types.hpp"

namespace {

using dropclust::ConfigError;
using dropclust::DataError;

struct DatasetFlags {
    std::string input;
    std::string region;
    std::vector<double> bbox;
    dropclust::geo::AisFormat ais;
    std::string delimiter = ",";
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f, bool input_required) {
    auto* in = cmd->add_option("--input", f.input,
                               "Input file: AIS table or planar cache (omit for the bundled "
                               "synthetic fixture)");
    if (input_required) in->required();
    cmd->add_option("--region", f.region, "GeoJSON polygon filtering AIS input");
    cmd->add_option("--bbox", f.bbox, "lat_min,lon_min,lat_max,lon_max filter for AIS input")
        ->delimiter(',')
        ->expected(4);
    cmd->add_option("--ship-col", f.ais.ship_id_column, "AIS ship id column")
        ->capture_default_str();
    cmd->add_option("--lat-col", f.ais.lat_column, "AIS latitude column")->capture_default_str();
    cmd->add_option("--lon-col", f.ais.lon_column, "AIS longitude column")->capture_default_str();
    cmd->add_option("--timestamp-col", f.ais.timestamp_column,
                    "AIS timestamp column (optional, carried through)");
    cmd->add_option("--delimiter", f.delimiter, "AIS field delimiter")->capture_default_str();
}

void apply_dataset_flags(const DatasetFlags& f, dropclust::ExperimentConfig& cfg) {
    cfg.input_path = f.input;
    cfg.region_path = f.region;
    if (!f.bbox.empty()) {
        cfg.bbox = std::array<double, 4>{f.bbox[0], f.bbox[1], f.bbox[2], f.bbox[3]};
    }
    cfg.ais = f.ais;
    if (f.delimiter.size() != 1) throw ConfigError("delimiter must be a single character");
    cfg.ais.delimiter = f.delimiter[0];
}

void write_origin_sidecar(const std::string& cache_path, const dropclust::geo::ProjectionOrigin& o) {
    nlohmann::ordered_json j{{"lat0", o.lat0}, {"lon0", o.lon0}};
    const std::string path = cache_path + ".meta.json";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Buoy placement by dropout-aware clustering"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file; keys mirror the long flags");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse, filter and project AIS data into a "
                                                "planar point cache");
    DatasetFlags ingest_flags;
    std::string ingest_out;
    add_dataset_flags(ingest, ingest_flags, true);
    ingest->add_option("--out", ingest_out, "Planar cache file to write")->required();
    ingest->callback([&] {
        dropclust::ExperimentConfig cfg;
        apply_dataset_flags(ingest_flags, cfg);
        auto data = dropclust::load_dataset(cfg);
        std::ofstream out(ingest_out);
        if (!out) throw ConfigError("cannot write " + ingest_out);
        dropclust::geo::write_planar_cache(out, data.points);
        out.flush();
        if (!out) throw ConfigError("failed writing " + ingest_out);
        if (data.origin) write_origin_sidecar(ingest_out, *data.origin);
        std::cout << "wrote " << data.points.size() << " points ("
                  << data.ships.ship_count() << " ships) to " << ingest_out << "\n";
    });

    // run
    auto* run = app.add_subcommand("run", "Run the placement experiment");
    DatasetFlags run_flags;
    int k = 5;
    double p = 0.3;
    double radius_km = 10.0;
    int trials = 30;
    std::uint64_t seed = 42;
    std::vector<std::string> algorithm_tokens;
    int max_iters = 1000;
    int stochastic_max_iters = 300;
    std::string init_method = "kmeanspp";
    std::string out_dir;
    std::vector<std::string> formats;
    add_dataset_flags(run, run_flags, false);
    run->add_option("--k", k, "Number of centers")->capture_default_str();
    run->add_option("--p", p, "Dropout probability")->capture_default_str();
    run->add_option("--radius-km", radius_km, "Detection radius in km")->capture_default_str();
    run->add_option("--trials", trials, "Number of seeded trials")->capture_default_str();
    run->add_option("--seed", seed, "Base seed; trial seeds derive from it")
        ->capture_default_str();
    run->add_option("--algorithms", algorithm_tokens,
                    "Comma-separated subset of: classic-kmeans, dropout-kmeans, "
                    "stochastic-kmeans, classic-kmedian, dropout-kmedian (default: all)")
        ->delimiter(',');
    run->add_option("--max-iters", max_iters, "Iteration cap for the deterministic algorithms")
        ->capture_default_str();
    run->add_option("--stochastic-max-iters", stochastic_max_iters,
                    "Iteration cap for the stochastic baseline")
        ->capture_default_str();
    run->add_option("--init", init_method, "Initialization: kmeanspp or uniform")
        ->check(CLI::IsMember({"kmeanspp", "uniform"}))
        ->capture_default_str();
    run->add_option("--out", out_dir, "Directory for report files");
    run->add_option("--format", formats,
                    "Report formats to write under --out: table, structured, geo "
                    "(repeatable; default all)")
        ->check(CLI::IsMember({"table", "structured", "geo"}));
    run->callback([&] {
        dropclust::ExperimentConfig cfg;
        apply_dataset_flags(run_flags, cfg);
        cfg.k = k;
        cfg.p = p;
        cfg.radius_km = radius_km;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.max_iters = max_iters;
        cfg.stochastic_max_iters = stochastic_max_iters;
        cfg.uniform_init = init_method == "uniform";
        if (!algorithm_tokens.empty()) {
            cfg.algorithms.clear();
            for (const auto& tok : algorithm_tokens) {
                auto a = dropclust::parse_algorithm(tok);
                bool seen = false;
                for (auto existing : cfg.algorithms) seen = seen || existing == a;
                if (!seen) cfg.algorithms.push_back(a);
            }
        }
        if (!formats.empty() && out_dir.empty()) {
            throw ConfigError("--format requires --out");
        }
        auto data = dropclust::load_dataset(cfg);
        auto report = dropclust::run_experiment(cfg, data);
        std::cout << dropclust::report_table(report);
        if (!out_dir.empty()) {
            auto selected = formats;
            if (selected.empty()) selected = {"table", "structured", "geo"};
            dropclust::emit_report(report, data.origin, out_dir, selected);
        }
    });

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic planar dataset");
    dropclust::SynthSpec spec;
    std::string synth_out;
    synth->add_option("--blobs", spec.blobs, "Number of Gaussian blobs")->capture_default_str();
    synth->add_option("--points-per-blob", spec.points_per_blob, "Points per blob")
        ->capture_default_str();
    synth->add_option("--spread-km", spec.spread_km, "Blob standard deviation in km")
        ->capture_default_str();
    synth->add_option("--ships-per-blob", spec.ships_per_blob,
                      "Synthetic ships per blob (points dealt round-robin)")
        ->capture_default_str();
    synth->add_option("--extent-km", spec.extent_km,
                      "Blob centers drawn uniformly in [-extent, extent]^2")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Planar cache file to write")->required();
    synth->callback([&] {
        auto points = dropclust::generate_synthetic(spec);
        std::ofstream out(synth_out);
        if (!out) throw ConfigError("cannot write " + synth_out);
        dropclust::geo::write_planar_cache(out, points);
        out.flush();
        if (!out) throw ConfigError("failed writing " + synth_out);
        std::cout << "wrote " << points.size() << " points to " << synth_out << "\n";
    });

    // metrics
    auto* metrics = app.add_subcommand("metrics",
                                       "Evaluate a placements file against a dataset");
    DatasetFlags metrics_flags;
    std::string placements_path;
    double metrics_p = 0.3;
    double metrics_radius = 10.0;
    add_dataset_flags(metrics, metrics_flags, false);
    metrics->add_option("--placements", placements_path, "Placements GeoJSON to evaluate")
        ->required();
    metrics->add_option("--p", metrics_p, "Dropout probability")->capture_default_str();
    metrics->add_option("--radius-km", metrics_radius, "Detection radius in km")
        ->capture_default_str();
    metrics->callback([&] {
        dropclust::ExperimentConfig cfg;
        apply_dataset_flags(metrics_flags, cfg);
        cfg.p = metrics_p;
        cfg.radius_km = metrics_radius;
        auto data = dropclust::load_dataset(cfg);
        auto groups = dropclust::read_placements_geojson(placements_path);
        if (groups.empty()) throw DataError("no placements found in " + placements_path);
        std::printf("%-24s  %5s  %3s  %12s  %8s\n", "algorithm", "trial", "k", "rmsd_km", "p_d");
        for (const auto& g : groups) {
            dropclust::DropoutParams params{metrics_p, static_cast<int>(g.centers.size()),
                                            metrics_radius};
            auto m = dropclust::evaluate_placement(data.ships, data.points, g.centers, params);
            std::printf("%-24s  %5d  %3zu  %12.3f  %8.4f\n", g.algorithm.c_str(), g.trial,
                        g.centers.size(), m.rmsd_km, m.p_d);
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
