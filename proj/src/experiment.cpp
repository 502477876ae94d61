#include "dropclust/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "dropclust/clustering.hpp"
#include "dropclust/rng.hpp"

namespace dropclust {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string mean_pm_std(double mean, double sd, const char* f) {
    return fmt(f, mean) + " ± " + fmt(f, sd);
}

struct MeanStd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    double s = 0.0;
    for (double x : xs) s += x;
    out.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

// column padding that treats UTF-8 continuation bytes as zero width
std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) {
        w += (c & 0xC0) != 0x80;
    }
    return w;
}

std::string pad_right(std::string s, std::size_t w) {
    while (display_width(s) < w) s += ' ';
    return s;
}

std::string pad_left(std::string s, std::size_t w) {
    while (display_width(s) < w) s.insert(s.begin(), ' ');
    return s;
}

}  // namespace

std::vector<Algorithm> all_algorithms() {
    return {Algorithm::ClassicKmeans, Algorithm::DropoutKmeans, Algorithm::StochasticKmeans,
            Algorithm::ClassicKmedian, Algorithm::DropoutKmedian};
}

std::string algorithm_token(Algorithm a) {
    switch (a) {
    case Algorithm::ClassicKmeans: return "classic-kmeans";
    case Algorithm::DropoutKmeans: return "dropout-kmeans";
    case Algorithm::StochasticKmeans: return "stochastic-kmeans";
    case Algorithm::ClassicKmedian: return "classic-kmedian";
    case Algorithm::DropoutKmedian: return "dropout-kmedian";
    }
    throw ConfigError("unknown algorithm");
}

std::string algorithm_display(Algorithm a) {
    switch (a) {
    case Algorithm::ClassicKmeans: return "classic k-means";
    case Algorithm::DropoutKmeans: return "dropout k-means";
    case Algorithm::StochasticKmeans: return "stochastic dropout k-means";
    case Algorithm::ClassicKmedian: return "classic k-median";
    case Algorithm::DropoutKmedian: return "dropout k-median";
    }
    throw ConfigError("unknown algorithm");
}

Algorithm parse_algorithm(const std::string& token) {
    for (Algorithm a : all_algorithms()) {
        if (algorithm_token(a) == token) return a;
    }
    throw ConfigError("unknown algorithm '" + token +
                      "' (expected classic-kmeans, dropout-kmeans, stochastic-kmeans, "
                      "classic-kmedian or dropout-kmedian)");
}

std::vector<PlanarPoint> generate_synthetic(const SynthSpec& spec) {
    if (spec.blobs < 1 || spec.points_per_blob < 1 || spec.ships_per_blob < 1) {
        throw ConfigError("synthetic spec counts must be >= 1");
    }
    if (!(spec.spread_km >= 0.0) || !(spec.extent_km >= 0.0)) {
        throw ConfigError("synthetic spec distances must be >= 0");
    }
    Rng rng(spec.seed);
    std::vector<PlanarPoint> out;
    out.reserve(static_cast<std::size_t>(spec.blobs) * spec.points_per_blob);
    char ship[16];
    for (int b = 0; b < spec.blobs; ++b) {
        const double cx = (rng.uniform01() * 2.0 - 1.0) * spec.extent_km;
        const double cy = (rng.uniform01() * 2.0 - 1.0) * spec.extent_km;
        for (int j = 0; j < spec.points_per_blob; ++j) {
            PlanarPoint pt;
            pt.x = cx + spec.spread_km * rng.normal();
            pt.y = cy + spec.spread_km * rng.normal();
            const int ship_index = b * spec.ships_per_blob + j % spec.ships_per_blob;
            std::snprintf(ship, sizeof ship, "V%04d", ship_index);
            pt.ship_id = ship;
            out.push_back(std::move(pt));
        }
    }
    return out;
}

// Compact overlapping blobs: close enough that redundancy near the dense
// middle pays off under dropout, far enough apart that classic clustering
// still separates them.
SynthSpec default_fixture_spec() {
    SynthSpec spec;
    spec.blobs = 5;
    spec.points_per_blob = 150;
    spec.spread_km = 6.0;
    spec.ships_per_blob = 6;
    spec.extent_km = 50.0;
    spec.seed = 4;
    return spec;
}

void ExperimentConfig::validate() const {
    DropoutParams{p, k, radius_km}.validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (max_iters < 1) throw ConfigError("max iterations must be >= 1");
    if (stochastic_max_iters < 1) throw ConfigError("stochastic max iterations must be >= 1");
    if (weiszfeld_inner_iters < 1) throw ConfigError("inner iterations must be >= 1");
    if (!(weiszfeld_tol > 0.0)) throw ConfigError("tolerance must be > 0");
    if (algorithms.empty()) throw ConfigError("no algorithms selected");
    if (!region_path.empty() && bbox) {
        throw ConfigError("give either a region file or a bbox, not both");
    }
}

Dataset load_dataset(const ExperimentConfig& config) {
    config.validate();
    Dataset data;
    if (config.input_path.empty()) {
        if (!config.region_path.empty() || config.bbox) {
            throw ConfigError("region filtering requires geographic input");
        }
        data.points = generate_synthetic(default_fixture_spec());
    } else {
        std::ifstream in(config.input_path);
        if (!in) throw DataError("cannot open input file: " + config.input_path);
        std::string header;
        if (!std::getline(in, header)) {
            throw DataError("empty input file: " + config.input_path);
        }
        in.clear();
        in.seekg(0);
        if (geo::looks_like_planar_cache(header)) {
            if (!config.region_path.empty() || config.bbox) {
                throw ConfigError("region filtering requires geographic input");
            }
            data.points = geo::read_planar_cache(in);
            const std::string meta_path = config.input_path + ".meta.json";
            std::ifstream meta(meta_path);
            if (meta) {
                try {
                    auto j = nlohmann::json::parse(meta);
                    data.origin = geo::ProjectionOrigin{j.at("lat0").get<double>(),
                                                        j.at("lon0").get<double>()};
                } catch (const nlohmann::json::exception&) {
                    throw DataError("malformed projection metadata: " + meta_path);
                }
            }
        } else {
            auto parsed = geo::parse_ais_file(in, config.ais);
            auto records = std::move(parsed.records);
            if (!config.region_path.empty()) {
                auto region = geo::load_region_geojson(config.region_path);
                records = geo::filter_region(records, region);
            } else if (config.bbox) {
                const auto& b = *config.bbox;
                auto region = geo::bbox_region(b[0], b[1], b[2], b[3]);
                records = geo::filter_region(records, region);
            }
            if (records.empty()) {
                throw DataError("no data points remain after parsing and filtering");
            }
            auto origin = geo::mean_origin(records);
            data.points = geo::project(records, origin);
            data.origin = origin;
        }
    }
    if (data.points.empty()) throw DataError("dataset is empty");
    data.ships = build_ship_grouping(data.points);
    return data;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const Dataset& data) {
    config.validate();
    if (data.points.empty()) throw DataError("dataset is empty");
    std::set<std::pair<double, double>> distinct;
    for (const auto& pt : data.points) {
        distinct.emplace(pt.x, pt.y);
        if (static_cast<int>(distinct.size()) >= config.k) break;
    }
    if (static_cast<int>(distinct.size()) < config.k) {
        throw DataError("dataset has only " + std::to_string(distinct.size()) +
                        " distinct points, need at least K = " + std::to_string(config.k));
    }

    ExperimentReport report;
    report.config = config;
    const DropoutParams params{config.p, config.k, config.radius_km};
    for (int t = 0; t < config.trials; ++t) {
        const std::uint64_t trial_seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
        const std::uint64_t init_seed = derive_seed(trial_seed, 0);
        const std::uint64_t stoch_seed = derive_seed(trial_seed, 1);
        const CenterSet init = config.uniform_init
                                   ? uniform_support_init(data.points, config.k, init_seed)
                                   : kmeanspp_init(data.points, config.k, init_seed);
        for (Algorithm a : config.algorithms) {
            RunResult rr;
            switch (a) {
            case Algorithm::ClassicKmeans:
                rr = run_classic_kmeans(data.points, init, config.max_iters);
                break;
            case Algorithm::DropoutKmeans:
                rr = run_dropout_kmeans(data.points, init, config.p, config.max_iters);
                break;
            case Algorithm::StochasticKmeans:
                rr = run_stochastic_dropout_kmeans(data.points, init, config.p, config.radius_km,
                                                   config.stochastic_max_iters, stoch_seed);
                break;
            case Algorithm::ClassicKmedian:
                rr = run_classic_kmedian(data.points, init, config.max_iters,
                                         config.weiszfeld_inner_iters, config.weiszfeld_tol);
                break;
            case Algorithm::DropoutKmedian:
                rr = run_dropout_kmedian(data.points, init, config.p, config.max_iters,
                                         config.weiszfeld_inner_iters, config.weiszfeld_tol);
                break;
            }
            TrialRow row;
            row.algorithm = a;
            row.trial = t;
            row.trial_seed = trial_seed;
            row.iterations = rr.iterations;
            row.converged = rr.converged;
            row.runtime_s = rr.wall_seconds;
            const MetricsResult m = evaluate_placement(data.ships, data.points, rr.centers, params);
            row.rmsd_km = m.rmsd_km;
            row.p_d = m.p_d;
            row.init = init;
            row.centers = std::move(rr.centers);
            report.rows.push_back(std::move(row));
        }
    }
    for (Algorithm a : config.algorithms) {
        std::vector<double> iters, runtimes, rmsds, pds;
        for (const auto& row : report.rows) {
            if (row.algorithm != a) continue;
            iters.push_back(row.iterations);
            runtimes.push_back(row.runtime_s);
            rmsds.push_back(row.rmsd_km);
            pds.push_back(row.p_d);
        }
        AlgorithmSummary s;
        s.algorithm = a;
        s.trials = static_cast<int>(iters.size());
        const auto mi = mean_std(iters);
        s.iterations_mean = mi.mean;
        s.iterations_std = mi.sd;
        const auto mr = mean_std(runtimes);
        s.runtime_mean = mr.mean;
        s.runtime_std = mr.sd;
        const auto md = mean_std(rmsds);
        s.rmsd_mean = md.mean;
        s.rmsd_std = md.sd;
        const auto mp = mean_std(pds);
        s.pd_mean = mp.mean;
        s.pd_std = mp.sd;
        report.summaries.push_back(s);
    }
    return report;
}

std::string report_table(const ExperimentReport& report) {
    const auto& c = report.config;
    std::ostringstream os;
    os << "# k=" << c.k << " p=" << c.p << " radius_km=" << c.radius_km << " trials=" << c.trials
       << " seed=" << c.seed << " init=" << (c.uniform_init ? "uniform" : "kmeanspp") << "\n";
    os << "# cells: mean ± std, sample std (n-1), 0 for a single trial\n";
    std::vector<std::array<std::string, 5>> rows;
    rows.push_back({"algorithm", "iterations", "runtime_s", "rmsd_km", "p_d"});
    for (const auto& s : report.summaries) {
        rows.push_back({algorithm_display(s.algorithm),
                        mean_pm_std(s.iterations_mean, s.iterations_std, "%.1f"),
                        mean_pm_std(s.runtime_mean, s.runtime_std, "%.4f"),
                        mean_pm_std(s.rmsd_mean, s.rmsd_std, "%.3f"),
                        mean_pm_std(s.pd_mean, s.pd_std, "%.4f")});
    }
    std::array<std::size_t, 5> width{};
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            width[i] = std::max(width[i], display_width(row[i]));
        }
    }
    for (const auto& row : rows) {
        os << pad_right(row[0], width[0]);
        for (std::size_t i = 1; i < row.size(); ++i) {
            os << "  " << pad_left(row[i], width[i]);
        }
        os << "\n";
    }
    return os.str();
}

namespace {

ordered_json mean_std_json(double mean, double sd) {
    return ordered_json{{"mean", mean}, {"std", sd}};
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
    const auto& c = report.config;
    std::vector<std::string> tokens;
    tokens.reserve(c.algorithms.size());
    for (Algorithm a : c.algorithms) tokens.push_back(algorithm_token(a));
    ordered_json j;
    j["config"] = ordered_json{{"input", c.input_path},
                               {"region", c.region_path},
                               {"k", c.k},
                               {"p", c.p},
                               {"radius_km", c.radius_km},
                               {"trials", c.trials},
                               {"seed", c.seed},
                               {"algorithms", tokens},
                               {"max_iters", c.max_iters},
                               {"stochastic_max_iters", c.stochastic_max_iters},
                               {"weiszfeld_inner_iters", c.weiszfeld_inner_iters},
                               {"weiszfeld_tol", c.weiszfeld_tol},
                               {"init", c.uniform_init ? "uniform" : "kmeanspp"}};
    if (c.bbox) j["config"]["bbox"] = *c.bbox;
    j["std_convention"] = "sample (n-1); 0 for a single trial";
    j["summary"] = ordered_json::array();
    for (const auto& s : report.summaries) {
        ordered_json row;
        row["algorithm"] = algorithm_display(s.algorithm);
        row["token"] = algorithm_token(s.algorithm);
        row["trials"] = s.trials;
        row["iterations"] = mean_std_json(s.iterations_mean, s.iterations_std);
        row["runtime_s"] = mean_std_json(s.runtime_mean, s.runtime_std);
        row["rmsd_km"] = mean_std_json(s.rmsd_mean, s.rmsd_std);
        row["p_d"] = mean_std_json(s.pd_mean, s.pd_std);
        j["summary"].push_back(std::move(row));
    }
    j["trials"] = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json r;
        r["algorithm"] = algorithm_token(row.algorithm);
        r["trial"] = row.trial;
        r["seed"] = row.trial_seed;
        r["iterations"] = row.iterations;
        r["converged"] = row.converged;
        r["runtime_s"] = row.runtime_s;
        r["rmsd_km"] = row.rmsd_km;
        r["p_d"] = row.p_d;
        ordered_json centers = ordered_json::array();
        for (const auto& ctr : row.centers) centers.push_back({ctr.x, ctr.y});
        r["centers"] = std::move(centers);
        j["trials"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

std::string placements_geojson(const ExperimentReport& report,
                               const std::optional<geo::ProjectionOrigin>& origin) {
    const geo::ProjectionOrigin o = origin.value_or(geo::ProjectionOrigin{0.0, 0.0});
    ordered_json features = ordered_json::array();
    for (const auto& row : report.rows) {
        for (std::size_t ci = 0; ci < row.centers.size(); ++ci) {
            const auto ll = geo::unproject(row.centers[ci], o);
            ordered_json f;
            f["type"] = "Feature";
            f["geometry"] = ordered_json{{"type", "Point"}, {"coordinates", {ll.lon, ll.lat}}};
            f["properties"] = ordered_json{{"algorithm", algorithm_token(row.algorithm)},
                                           {"trial", row.trial},
                                           {"center", static_cast<int>(ci)}};
            features.push_back(std::move(f));
        }
    }
    ordered_json j;
    j["type"] = "FeatureCollection";
    j["projection_origin"] = ordered_json{{"lat0", o.lat0}, {"lon0", o.lon0}};
    j["features"] = std::move(features);
    return j.dump(2) + "\n";
}

void emit_report(const ExperimentReport& report, const std::optional<geo::ProjectionOrigin>& origin,
                 const std::string& out_dir, const std::vector<std::string>& formats) {
    namespace fs = std::filesystem;
    if (out_dir.empty()) throw ConfigError("output directory not set");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + out_dir);
    auto write = [&](const std::string& name, const std::string& body) {
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write " + path.string());
        out << body;
        out.flush();
        if (!out) throw ConfigError("failed writing " + path.string());
    };
    for (const auto& f : formats) {
        if (f == "table") {
            write("table.txt", report_table(report));
        } else if (f == "structured") {
            write("report.json", report_json(report));
        } else if (f == "geo") {
            write("placements.geojson", placements_geojson(report, origin));
        } else {
            throw ConfigError("unknown format '" + f + "' (expected table, structured or geo)");
        }
    }
}

std::vector<PlacementGroup> read_placements_geojson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open placements file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed placements file: " + std::string(e.what()));
    }
    try {
        geo::ProjectionOrigin o{0.0, 0.0};
        if (j.contains("projection_origin")) {
            o.lat0 = j.at("projection_origin").at("lat0").get<double>();
            o.lon0 = j.at("projection_origin").at("lon0").get<double>();
        }
        std::vector<PlacementGroup> groups;
        auto group_for = [&](const std::string& alg, int trial) -> PlacementGroup& {
            for (auto& g : groups) {
                if (g.algorithm == alg && g.trial == trial) return g;
            }
            groups.push_back(PlacementGroup{alg, trial, {}});
            return groups.back();
        };
        for (const auto& f : j.at("features")) {
            const auto& geom = f.at("geometry");
            if (geom.at("type").get<std::string>() != "Point") {
                throw DataError("placements file must contain point features only");
            }
            const double lon = geom.at("coordinates").at(0).get<double>();
            const double lat = geom.at("coordinates").at(1).get<double>();
            std::string alg = "unknown";
            int trial = 0;
            if (f.contains("properties") && f.at("properties").is_object()) {
                const auto& pr = f.at("properties");
                if (pr.contains("algorithm")) alg = pr.at("algorithm").get<std::string>();
                if (pr.contains("trial")) trial = pr.at("trial").get<int>();
            }
            group_for(alg, trial).centers.push_back(geo::project_point(lat, lon, o));
        }
        return groups;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed placements file: " + std::string(e.what()));
    }
}

}  // namespace dropclust
