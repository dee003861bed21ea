#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "resfi/analysis.hpp"
#include "resfi/errors.hpp"
#include "resfi/runner.hpp"
#include "resfi/scenario.hpp"

namespace {

using namespace resfi;

// Reports go to stdout by default so runs compose in pipelines; --out
// redirects them to a file.  Human-readable chatter stays on stderr.
void emit(const std::string& out_path, const std::string& body) {
    if (out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write output file: " + out_path);
    out << body;
}

struct AppSelection {
    std::optional<bool> channel;
    std::optional<bool> cluster;
};

AppSelection parse_apps(const std::string& spec) {
    AppSelection sel;
    if (spec.empty()) return sel;
    sel.channel = false;
    sel.cluster = false;
    if (spec == "none") return sel;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "channel")
            sel.channel = true;
        else if (item == "cluster")
            sel.cluster = true;
        else if (item == "all")
            sel.channel = sel.cluster = true;
        else
            throw ConfigError("unknown application '" + item +
                              "' (expected channel, cluster, all or none)");
    }
    return sel;
}

int cmd_run(const std::string& scenario_path, std::optional<double> duration,
            std::optional<uint64_t> seed, const std::string& apps,
            const std::string& out_path, const std::string& trace_path) {
    auto config = load_scenario(scenario_path);
    RunOptions opt;
    opt.duration_ms = duration;
    opt.seed = seed;
    auto sel = parse_apps(apps);
    opt.channel_app = sel.channel;
    opt.cluster_app = sel.cluster;
    opt.keep_trace = !trace_path.empty();

    auto started = std::chrono::steady_clock::now();
    RunReport report = run_scenario(config, opt);
    double wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();

    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw ConfigError("cannot write trace file: " + trace_path);
        write_trace_jsonl(out, report.trace);
        report.trace.clear();
    }

    emit(out_path, report.to_json().dump(2) + "\n");
    std::cerr << "ran " << report.aps.size() << " APs for " << report.virtual_ms
              << " virtual ms (" << wall_ms << " wall ms): wired sent "
              << report.wire.wired_sent << ", delivered "
              << report.wire.wired_delivered << ", scans "
              << report.wire.scans_full + report.wire.scans_single << "\n";
    return 0;
}

int cmd_curves(const std::string& params_path, const std::string& out_path) {
    std::vector<BandProfile> bands{BandProfile::band2g4(),
                                   BandProfile::band5g()};
    std::vector<double> periods{60.0};
    std::vector<double> densities;
    for (int n = 1; n <= 40; ++n) densities.push_back(double(n));
    double t_scan_s = 0.030;
    nlohmann::json overrides = nlohmann::json::object();

    if (!params_path.empty()) {
        std::ifstream in(params_path);
        if (!in) throw ConfigError("cannot open params file: " + params_path);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(params_path + ": " + e.what());
        }
        if (!doc.is_object())
            throw ConfigError(params_path + ": expected an object");
        for (const auto& [key, value] : doc.items()) {
            if (key == "periods_s" || key == "n_values") {
                if (!value.is_array() || value.empty())
                    throw ConfigError(params_path + ": '" + key +
                                      "' must be a non-empty array");
                auto& dst = key == "periods_s" ? periods : densities;
                dst.clear();
                for (const auto& v : value) {
                    if (!v.is_number())
                        throw ConfigError(params_path + ": '" + key +
                                          "' entries must be numbers");
                    dst.push_back(v.get<double>());
                }
            } else if (key == "bands") {
                if (!value.is_array() || value.empty())
                    throw ConfigError(params_path +
                                      ": 'bands' must be a non-empty array");
                bands.clear();
                for (const auto& v : value) {
                    if (v == "2.4")
                        bands.push_back(BandProfile::band2g4());
                    else if (v == "5")
                        bands.push_back(BandProfile::band5g());
                    else
                        throw ConfigError(params_path +
                                          ": bands entries must be \"2.4\" or \"5\"");
                }
            } else if (key == "t_scan_s") {
                if (!value.is_number())
                    throw ConfigError(params_path + ": 't_scan_s' must be a number");
                t_scan_s = value.get<double>();
            } else if (key == "overrides") {
                overrides = value;
            } else {
                throw ConfigError(params_path + ": unknown key '" + key + "'");
            }
        }
    }

    std::vector<CurveRow> rows;
    if (overrides.empty()) {
        rows = airtime_curves(bands, periods, densities, t_scan_s);
    } else {
        // Per-point model overrides: instantiate each grid point from its
        // band, then apply the requested field values on top.
        for (const auto& band : bands)
            for (double period : periods)
                for (double n : densities) {
                    auto p = params_from_json(
                        overrides, band.params(n, period, t_scan_s));
                    CurveRow row;
                    row.band = band.band;
                    row.n = n;
                    row.period_s = period;
                    row.airtime_resfi =
                        std::clamp(1.0 - overhead_resfi(p), 0.0, 1.0);
                    row.airtime_rxipp =
                        std::clamp(1.0 - overhead_rxipp(p), 0.0, 1.0);
                    rows.push_back(row);
                }
    }

    std::ostringstream csv;
    write_curves_csv(csv, rows);
    emit(out_path, csv.str());
    std::cerr << "wrote " << rows.size() << " curve rows\n";
    return 0;
}

int cmd_latency(const std::string& scenario_path, std::optional<uint64_t> seed,
                int rounds, const std::string& out_path) {
    auto config = load_scenario(scenario_path);
    RunOptions opt;
    opt.seed = seed;
    LatencyReport report = latency_experiment(config, opt, rounds);
    emit(out_path, report.to_json().dump(2) + "\n");
    std::cerr << "measured " << report.samples_ms.size() << " installs over "
              << report.rotations << " rotations: mean " << report.mean_ms
              << " ms, p90 " << report.p90_ms << " ms\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wireless-backhaul coordination emulator and overhead model"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, trace_path, params_path, apps;
    double duration = -1.0;
    long long seed = -1;
    int rounds = 20;

    auto* run = app.add_subcommand("run", "Run a scenario and report counters");
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--duration-ms", duration, "Override the scenario duration");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--apps", apps,
                    "Applications to run: comma list of channel,cluster; "
                    "or all / none");
    run->add_option("--out", out_path, "Write the report JSON here");
    run->add_option("--trace", trace_path, "Write the event trace (JSONL) here");

    auto* curves =
        app.add_subcommand("curves", "Emit overhead-vs-density curves as CSV");
    curves->add_option("--params", params_path, "Curve parameter JSON file");
    curves->add_option("--out", out_path, "Write the CSV here");

    auto* latency = app.add_subcommand(
        "latency", "Measure key-rotation recovery latency across neighbors");
    latency->add_option("scenario", scenario_path, "Scenario JSON file")
        ->required();
    latency->add_option("--seed", seed, "Override the scenario seed");
    latency->add_option("--rounds", rounds, "Rotations per AP")
        ->check(CLI::PositiveNumber);
    latency->add_option("--out", out_path, "Write the report JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    std::optional<double> duration_opt;
    if (duration >= 0) duration_opt = duration;
    std::optional<uint64_t> seed_opt;
    if (seed >= 0) seed_opt = uint64_t(seed);

    try {
        if (run->parsed())
            return cmd_run(scenario_path, duration_opt, seed_opt, apps, out_path,
                           trace_path);
        if (curves->parsed()) return cmd_curves(params_path, out_path);
        if (latency->parsed())
            return cmd_latency(scenario_path, seed_opt, rounds, out_path);
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
