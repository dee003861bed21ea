#include "resfi/topology.hpp"

#include <algorithm>
#include <set>

#include "resfi/errors.hpp"

namespace resfi {

const char* to_string(Band band) {
    return band == Band::Band2g4 ? "2.4" : "5";
}

const char* to_string(WiredTechnology tech) {
    switch (tech) {
    case WiredTechnology::GigabitLan: return "gigabit_lan";
    case WiredTechnology::Cable: return "cable";
    case WiredTechnology::Dsl: return "dsl";
    }
    return "?";
}

bool Topology::adjacent(const ApId& a, const ApId& b) const {
    if (a == b) return false;
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    return std::binary_search(links.begin(), links.end(), key);
}

std::vector<ApId> Topology::neighbors_of(const ApId& a) const {
    std::vector<ApId> out;
    for (const auto& [x, y] : links) {
        if (x == a) out.push_back(y);
        else if (y == a) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    return out;
}

const ApSpec* Topology::find(const ApId& a) const {
    for (const auto& ap : aps)
        if (ap.id == a) return &ap;
    return nullptr;
}

bool Topology::has_channel(ChannelId c) const {
    return std::find(channels.begin(), channels.end(), c) != channels.end();
}

Topology build_topology(std::vector<ApSpec> aps,
                        std::vector<std::pair<ApId, ApId>> links,
                        std::vector<ChannelId> channels, Band band) {
    if (aps.empty()) throw ConfigError("topology has no APs");
    if (channels.empty()) throw ConfigError("topology has no channels");

    std::set<ApId> ids;
    for (const auto& ap : aps) {
        if (ap.id.empty()) throw ConfigError("AP with empty id");
        if (!ids.insert(ap.id).second) throw ConfigError("duplicate AP id: " + ap.id);
    }
    std::set<ChannelId> chan_set(channels.begin(), channels.end());
    if (chan_set.size() != channels.size())
        throw ConfigError("duplicate channel in channel plan");
    for (const auto& ap : aps)
        if (!chan_set.count(ap.channel))
            throw ConfigError("AP " + ap.id + " starts on channel " +
                              std::to_string(ap.channel) + " outside the plan");

    for (auto& [a, b] : links) {
        if (a == b) throw ConfigError("self-link on " + a);
        if (!ids.count(a)) throw ConfigError("link endpoint unknown: " + a);
        if (!ids.count(b)) throw ConfigError("link endpoint unknown: " + b);
        if (b < a) std::swap(a, b);
    }
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());

    Topology topo;
    topo.aps = std::move(aps);
    topo.links = std::move(links);
    topo.channels = std::move(channels);
    std::sort(topo.channels.begin(), topo.channels.end());
    topo.band = band;
    return topo;
}

std::vector<std::pair<ApId, ApId>> random_links(const std::vector<ApId>& ids,
                                                double density, Rng& rng) {
    if (density < 0.0 || density > 1.0)
        throw ConfigError("link density must be within [0,1]");
    std::vector<ApId> sorted(ids);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<ApId, ApId>> links;
    for (size_t i = 0; i < sorted.size(); ++i)
        for (size_t j = i + 1; j < sorted.size(); ++j)
            if (rng.chance(density)) links.emplace_back(sorted[i], sorted[j]);
    return links;
}

} // namespace resfi
