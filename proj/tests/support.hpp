#ifndef RESFI_TESTS_SUPPORT_HPP
#define RESFI_TESTS_SUPPORT_HPP

// Shared fixtures for the suites: a mesh-of-agents builder on top of the
// emulator, plus small brute-force graph oracles the protocol results are
// checked against.  The oracles are deliberately naive — independent of
// the code under test.

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "resfi/agent.hpp"
#include "resfi/netemu.hpp"
#include "resfi/rng.hpp"
#include "resfi/southbound.hpp"
#include "resfi/topology.hpp"

namespace testsupport {

inline resfi::ApId ap_name(int i) { return "ap" + std::to_string(i); }

using Links = std::vector<std::pair<resfi::ApId, resfi::ApId>>;

inline Links clique_links(int n) {
    Links links;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            links.emplace_back(ap_name(i), ap_name(j));
    return links;
}

inline Links chain_links(int n) {
    Links links;
    for (int i = 0; i + 1 < n; ++i) links.emplace_back(ap_name(i), ap_name(i + 1));
    return links;
}

// Random connected graph: a random attachment tree plus independent extra
// edges.  Deterministic in the rng.
inline Links random_connected_links(int n, double extra_edge_prob, resfi::Rng& rng) {
    Links links;
    for (int i = 1; i < n; ++i)
        links.emplace_back(ap_name(int(rng.next_below(uint64_t(i)))), ap_name(i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            resfi::ApId a = ap_name(i), b = ap_name(j);
            bool have = false;
            for (auto& [x, y] : links)
                if ((x == a && y == b) || (x == b && y == a)) have = true;
            if (!have && rng.chance(extra_edge_prob)) links.emplace_back(a, b);
        }
    return links;
}

// --- mesh fixture ----------------------------------------------------------

struct MeshSpec {
    int n = 0;
    Links links;
    std::vector<resfi::ChannelId> channels = {1, 6, 11};
    std::vector<long> loads;                       // per-AP; empty → i+1
    std::vector<resfi::ChannelId> start_channels;  // per-AP; empty → cycle plan
    resfi::WiredTechnology wired = resfi::WiredTechnology::GigabitLan;
    resfi::WirelessModel wireless{};
    double kcmi_ms = 60000.0;
    uint64_t emu_seed = 42;
    uint64_t agent_seed_base = 1000;
    uint64_t key_seed_base = 100;
};

struct Mesh {
    std::unique_ptr<resfi::Emulator> emu;
    std::vector<std::unique_ptr<resfi::EmulatedBackend>> backends;
    std::vector<std::unique_ptr<resfi::ResFiAgent>> agents;

    resfi::ResFiAgent& ap(size_t i) { return *agents[i]; }
    double now() { return emu->clock().now_ms(); }
    void settle(double ms) { emu->clock().run_until(now() + ms); }
    void boot_all(double gap_ms = 200.0) {
        for (auto& a : agents) {
            a->boot();
            settle(gap_ms);
        }
    }
};

inline Mesh make_mesh(const MeshSpec& ms) {
    std::vector<resfi::ApSpec> specs;
    for (int i = 0; i < ms.n; ++i) {
        resfi::ApSpec s;
        s.id = ap_name(i);
        s.ssid = "net" + std::to_string(i);
        s.channel = ms.start_channels.empty()
                        ? ms.channels[size_t(i) % ms.channels.size()]
                        : ms.start_channels[size_t(i)];
        s.wired = ms.wired;
        s.address = "10.0." + std::to_string(i / 250) + "." +
                    std::to_string(i % 250 + 1);
        s.load_stas = ms.loads.empty() ? i + 1 : ms.loads[size_t(i)];
        s.key_seed = ms.key_seed_base + uint64_t(i);
        specs.push_back(std::move(s));
    }
    Mesh m;
    m.emu = std::make_unique<resfi::Emulator>(
        resfi::build_topology(specs, ms.links, ms.channels, resfi::Band::Band2g4),
        ms.wireless, resfi::Rng(ms.emu_seed));
    for (int i = 0; i < ms.n; ++i) {
        m.backends.push_back(
            std::make_unique<resfi::EmulatedBackend>(*m.emu, specs[size_t(i)].id));
        resfi::AgentConfig cfg;
        cfg.id = specs[size_t(i)].id;
        cfg.ssid = specs[size_t(i)].ssid;
        cfg.channel = specs[size_t(i)].channel;
        cfg.key_seed = specs[size_t(i)].key_seed;
        cfg.kcmi_ms = ms.kcmi_ms;
        m.agents.push_back(std::make_unique<resfi::ResFiAgent>(
            cfg, *m.backends.back(), resfi::Rng(ms.agent_seed_base + uint64_t(i))));
    }
    return m;
}

// --- graph oracles -----------------------------------------------------------

inline std::vector<std::vector<int>> adjacency(int n, const Links& links) {
    auto adj = std::vector<std::vector<int>>(size_t(n));
    auto index = [](const resfi::ApId& id) { return std::stoi(id.substr(2)); };
    for (auto& [a, b] : links) {
        int i = index(a), j = index(b);
        adj[size_t(i)].push_back(j);
        adj[size_t(j)].push_back(i);
    }
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return adj;
}

// Hop counts from src; -1 for unreachable.
inline std::vector<int> bfs_hops(const std::vector<std::vector<int>>& adj, int src) {
    std::vector<int> dist(adj.size(), -1);
    std::queue<int> q;
    dist[size_t(src)] = 0;
    q.push(src);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[size_t(u)])
            if (dist[size_t(v)] < 0) {
                dist[size_t(v)] = dist[size_t(u)] + 1;
                q.push(v);
            }
    }
    return dist;
}

inline bool is_connected(const std::vector<std::vector<int>>& adj) {
    if (adj.empty()) return true;
    for (int d : bfs_hops(adj, 0))
        if (d < 0) return false;
    return true;
}

inline int graph_diameter(const std::vector<std::vector<int>>& adj) {
    int best = 0;
    for (int s = 0; s < int(adj.size()); ++s)
        for (int d : bfs_hops(adj, s)) {
            if (d < 0) return -1;
            best = std::max(best, d);
        }
    return best;
}

// Fewest conflicting edges over every k-coloring (exhaustive; keep n small).
inline int min_color_conflicts(const std::vector<std::vector<int>>& adj, int k) {
    int n = int(adj.size());
    std::vector<int> color(size_t(n), 0);
    int best = std::numeric_limits<int>::max();
    while (true) {
        int conflicts = 0;
        for (int u = 0; u < n; ++u)
            for (int v : adj[size_t(u)])
                if (u < v && color[size_t(u)] == color[size_t(v)]) ++conflicts;
        best = std::min(best, conflicts);
        int i = 0;
        while (i < n && ++color[size_t(i)] == k) color[size_t(i++)] = 0;
        if (i == n) break;
    }
    return best;
}

inline int chromatic_number(const std::vector<std::vector<int>>& adj) {
    for (int k = 1;; ++k)
        if (min_color_conflicts(adj, k) == 0) return k;
}

// Independent dominating set check: no two heads adjacent, every non-head
// adjacent to at least one head.
inline bool is_independent_dominating(const std::vector<std::vector<int>>& adj,
                                      const std::vector<bool>& head) {
    int n = int(adj.size());
    for (int u = 0; u < n; ++u) {
        if (head[size_t(u)]) {
            for (int v : adj[size_t(u)])
                if (head[size_t(v)]) return false;
        } else {
            bool covered = false;
            for (int v : adj[size_t(u)])
                if (head[size_t(v)]) covered = true;
            if (!covered) return false;
        }
    }
    return true;
}

} // namespace testsupport

#endif
