#ifndef RESFI_RUNNER_HPP
#define RESFI_RUNNER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "resfi/agent.hpp"
#include "resfi/apps.hpp"
#include "resfi/netemu.hpp"
#include "resfi/scenario.hpp"

namespace resfi {

struct RunOptions {
    std::optional<double> duration_ms; // overrides the scenario
    std::optional<uint64_t> seed;
    std::optional<bool> channel_app; // overrides the scenario's app selection
    std::optional<bool> cluster_app;
    bool keep_trace = false; // retain the full event trace in the report
};

struct ApReport {
    AgentCounters counters;
    uint64_t epoch = 1;
    ChannelId channel = 0;
    double deaf_ms = 0.0;
    long scans = 0; // sweeps this AP ran (boot plus key rescans)
    std::vector<ApId> neighbors;
};

struct RunReport {
    double virtual_ms = 0.0;
    Emulator::Counters wire;
    uint64_t wired_in_flight = 0;
    std::map<ApId, ApReport> aps;
    std::map<ApId, ChannelId> channel_map;    // present when the channel app ran
    std::map<ApId, ClusterState> cluster_map; // present when the cluster app ran
    std::vector<TraceRecord> trace;           // only with keep_trace

    // Stable, sorted-key document; byte-identical for identical runs.
    nlohmann::json to_json() const;
};

// Boots every AP, runs the enabled applications, advances the virtual clock
// to the configured duration and collects counters.  Throws InvariantError
// if the wired accounting identity breaks.
RunReport run_scenario(const ScenarioConfig& config,
                       const RunOptions& options = RunOptions());

struct LatencyReport {
    int rotations = 0;
    std::vector<double> samples_ms; // sorted ascending
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p90_ms = 0.0;
    double p95_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;

    nlohmann::json to_json() const;
};

// Measures how long neighbors take to recover a rotated credential: each AP
// is told to change its key `rounds` times (staggered so samples never
// overlap), and every key-change event is paired with the neighbors' install
// events.  Scheduled rotations and applications stay off so each sample is
// attributable; neighbor expiry is held beyond the rotation spacing.
LatencyReport latency_experiment(const ScenarioConfig& config,
                                 const RunOptions& options = RunOptions(),
                                 int rounds = 20);

} // namespace resfi

#endif
