#ifndef RESFI_TOPOLOGY_HPP
#define RESFI_TOPOLOGY_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "resfi/rng.hpp"

namespace resfi {

using ApId = std::string;
using ChannelId = int;

enum class Band { Band2g4, Band5g };
enum class WiredTechnology { GigabitLan, Cable, Dsl };

const char* to_string(Band band);
const char* to_string(WiredTechnology tech);

// Static description of one AP in a scenario.  Load figures are synthetic
// inputs for the management applications, not emulator state.
struct ApSpec {
    ApId id;
    std::string ssid;
    ChannelId channel = 1;
    WiredTechnology wired = WiredTechnology::GigabitLan;
    std::string address;   // dotted quad; scenario loading assigns if empty
    long load_stas = 0;    // associated station count
    long tx_bytes = 0;     // downlink volume counter
    uint64_t key_seed = 0; // identity keypair seed
};

// Who can hear whom over the air, plus the channel plan.  Wireless
// adjacency is symmetric; the wired overlay reaches everyone.
struct Topology {
    std::vector<ApSpec> aps;
    std::vector<std::pair<ApId, ApId>> links; // normalized: first < second, sorted
    std::vector<ChannelId> channels;
    Band band = Band::Band2g4;

    bool adjacent(const ApId& a, const ApId& b) const;
    std::vector<ApId> neighbors_of(const ApId& a) const;
    const ApSpec* find(const ApId& a) const;
    bool has_channel(ChannelId c) const;
};

// Validates and normalizes: rejects duplicate ids, self-links, links with
// unknown endpoints, APs on channels outside the plan, empty channel plans.
Topology build_topology(std::vector<ApSpec> aps,
                        std::vector<std::pair<ApId, ApId>> links,
                        std::vector<ChannelId> channels, Band band);

// Random symmetric link set: each unordered pair is wired up independently
// with probability `density` (Gilbert model), pairs drawn in id order.
std::vector<std::pair<ApId, ApId>> random_links(const std::vector<ApId>& ids,
                                                double density, Rng& rng);

} // namespace resfi

#endif
