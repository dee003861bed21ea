#ifndef RESFI_SCENARIO_HPP
#define RESFI_SCENARIO_HPP

#include <map>
#include <string>

#include "json.hpp"

#include "resfi/apps.hpp"
#include "resfi/netemu.hpp"
#include "resfi/topology.hpp"

namespace resfi {

// A fully validated run description.  The JSON shape:
//
//   {
//     "band": "2.4" | "5",                     // default "2.4"
//     "channels": [1, 6, 11],                  // default {1, 6, 11}
//     "aps": [ { "id": "ap0",                  // required, unique
//                "ssid": "...",                // default: the id
//                "channel": 6,                 // default: cycle the plan
//                "wired": "lan"|"cable"|"dsl", // default "lan"
//                "wired_latency": { "lo_ms": .., "hi_ms": .. },  // override
//                "address": "10.0.0.1",        // default: auto-assigned
//                "load": 1, "tx_bytes": 0, "key_seed": 100 } ],
//     "links": [["ap0","ap1"], ...]            // or "density": 0..1
//     "wireless": { "bitrate_bps": .., "dwell_ms": .., "loss": ..,
//                   "per_link_delay_ms": .. }, // bitrate defaults per band
//     "sim": { "duration_ms": 1000, "seed": 1 },
//     "kcmi_ms": 60000, "jitter_fraction": 0.1, "rotate_keys": true,
//     "boot": { "start_ms": 10, "stagger_ms": 200 },
//     "apps": { "channel": { "period_ms": .., "jitter_ms": ..,
//                            "margin": .., "min_dwell_ms": .. },
//               "cluster": { "round_ms": .. } }
//   }
//
// Listing an app under "apps" enables it for the run (the runner's options
// can still override).  Unknown keys anywhere are rejected.
struct ScenarioConfig {
    Topology topology;
    WirelessModel wireless;
    // Latency overrides for APs whose "wired_latency" was given explicitly;
    // everyone else uses their technology's default.
    std::map<ApId, WiredLinkModel> wired_models;

    double duration_ms = 1000.0;
    uint64_t seed = 1;

    double kcmi_ms = 60000.0;
    double jitter_fraction = 0.1;
    bool rotate_keys = true; // schedule periodic key changes after boot

    double boot_start_ms = 10.0;    // first AP boots here...
    double boot_stagger_ms = 200.0; // ...the rest follow at this spacing

    bool run_channel_app = false;
    bool run_cluster_app = false;
    ChannelSelectionOptions channel_opts;
    DcaOptions cluster_opts;
};

// Throws ConfigError; `origin` names the document in error messages.
ScenarioConfig parse_scenario(const nlohmann::json& doc,
                              const std::string& origin = "scenario");

// Reads and parses a scenario file.  Syntax errors are reported with
// line/column positions.
ScenarioConfig load_scenario(const std::string& path);

} // namespace resfi

#endif
