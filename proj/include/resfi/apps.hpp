#ifndef RESFI_APPS_HPP
#define RESFI_APPS_HPP

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "resfi/agent.hpp"
#include "resfi/rng.hpp"

namespace resfi {

// ---------------------------------------------------------------------------
// Distributed channel selection.
//
// Each AP advertises {node, ch, load} to its neighbors and moves to the
// channel whose worst shared congestion is smallest.  The decision rule is
// a pure function so it can be checked against brute force.

struct NeighborChannelInfo {
    long load = 0;
    ChannelId ch = 0;
};

// Worst-case congestion on channel c if we sat there: the heaviest
// (self + neighbor) pairing among neighbors using c, zero if none do.
long hminmax_cost(long self_load, const std::map<ApId, NeighborChannelInfo>& nb_info,
                  ChannelId c);

// The channel minimizing hminmax_cost; ties go to the lowest channel id.
// Throws std::invalid_argument on an empty channel list.
ChannelId channel_selection_step(long self_load,
                                 const std::map<ApId, NeighborChannelInfo>& nb_info,
                                 std::vector<ChannelId> channels);

struct ChannelSelectionOptions {
    double period_ms = 1000.0; // announce cadence
    double jitter_ms = 500.0;  // extra per-cycle backoff, U(0, jitter/2)
    long margin = 0;           // required strict cost improvement to move
    // Minimum stay on a channel after hopping.  Breaks chase loops between
    // peers reacting to each other's stale positions; negative = period_ms.
    double min_dwell_ms = -1.0;
};

class ChannelSelectionApp {
public:
    using Options = ChannelSelectionOptions;

    static constexpr const char* kNamespace = "de.tu-berlin.ch-assign";

    ChannelSelectionApp(ResFiAgent& agent, Rng rng, Options opt = Options());
    void start();
    void stop();

    ChannelId current_channel() const;
    const std::map<ApId, NeighborChannelInfo>& nb_info() const { return nb_info_; }
    uint64_t switches() const { return switches_; }

private:
    void cycle();
    void announce();
    // Re-runs the decision rule; switches (and returns true) on a strict
    // improvement beyond the configured margin.
    bool evaluate();
    long own_load() const;

    ResFiAgent* agent_;
    Rng rng_;
    Options opt_;
    AppHandle* handle_ = nullptr;
    std::vector<ChannelId> channels_;
    std::map<ApId, NeighborChannelInfo> nb_info_;
    uint64_t timer_ = 0;
    uint64_t switches_ = 0;
    double last_switch_ms_ = 0.0;
    bool ever_switched_ = false;
    bool running_ = false;
};

// ---------------------------------------------------------------------------
// Distributed clustering.
//
// Nodes partition themselves into one-hop clusters by weight, heavier
// nodes deciding first.  Weight is (load, id), so it is a total order.

enum class ClusterRole { Undecided, Head, Member };

const char* to_string(ClusterRole role);

struct ClusterState {
    ClusterRole role = ClusterRole::Undecided;
    ApId head; // set when role == Member
};

struct ClusterPeerState {
    long load = 0;
    ClusterRole role = ClusterRole::Undecided;
};

bool cluster_weight_less(long load_a, const ApId& a, long load_b, const ApId& b);

// One synchronous decision step for one node.  Decisions are final: a
// decided state passes through unchanged.  An undecided node joins the
// heaviest adjacent declared head if any exists, and declares itself head
// once no heavier neighbor is still undecided.
ClusterState dca_round(const ApId& self, long self_load, const ClusterState& current,
                       const std::map<ApId, ClusterPeerState>& peers);

struct DcaOptions {
    double round_ms = 500.0;
};

class DcaApp {
public:
    using Options = DcaOptions;

    static constexpr const char* kNamespace = "de.tu-berlin.dca";

    DcaApp(ResFiAgent& agent, Options opt = Options());
    // Announces the initial undecided state immediately; decision rounds
    // follow every round_ms.
    void start();
    void stop();

    const ClusterState& state() const { return state_; }
    bool decided() const { return state_.role != ClusterRole::Undecided; }
    // This node and every peer it has heard from are decided.
    bool settled() const;
    // Decision rounds it took this node to leave Undecided.
    int rounds_to_decide() const { return rounds_to_decide_; }

private:
    void round();
    void announce();

    ResFiAgent* agent_;
    Options opt_;
    AppHandle* handle_ = nullptr;
    std::map<ApId, ClusterPeerState> peers_;
    ClusterState state_;
    int rounds_to_decide_ = 0;
    uint64_t timer_ = 0;
    bool running_ = false;
};

// ---------------------------------------------------------------------------
// End-to-end security on top of flooding.
//
// A cluster head floods its public key over a bounded number of hops;
// members reply in kind.  Payloads sealed to one recipient cross relays
// that cannot read them.

class E2eSecurityApp {
public:
    static constexpr const char* kNamespace = "de.tu-berlin.e2e-sec";

    E2eSecurityApp(ResFiAgent& agent, Rng rng);

    // Head side: flood our public key `ttl` hops; everyone who hears it
    // answers with their own key over the same budget.
    void announce_head_key(int ttl);

    // Sealed so that only `to` can open it, then flooded `ttl` hops.
    // Requires to's key in the directory.
    void send_secure(const ApId& to, const nlohmann::json& doc, int ttl);

    // Public keys learned so far, own key included.
    const std::map<ApId, Bytes>& key_directory() const { return directory_; }
    // The subset of `expected` whose keys never arrived (budget too small,
    // partition, or loss).
    std::vector<ApId> unreached(const std::vector<ApId>& expected) const;

    struct SecureMessage {
        ApId from;
        nlohmann::json doc;
    };
    const std::vector<SecureMessage>& inbox() const { return inbox_; }

private:
    void on_rx(const ApId& origin, const nlohmann::json& doc);

    ResFiAgent* agent_;
    Rng rng_;
    AppHandle* handle_ = nullptr;
    ApId self_;
    std::map<ApId, Bytes> directory_;
    std::vector<SecureMessage> inbox_;
    int reply_ttl_ = 1;
};

} // namespace resfi

#endif
