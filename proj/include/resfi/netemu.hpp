#ifndef RESFI_NETEMU_HPP
#define RESFI_NETEMU_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "resfi/bytes.hpp"
#include "resfi/clock.hpp"
#include "resfi/frames.hpp"
#include "resfi/rng.hpp"
#include "resfi/topology.hpp"

namespace resfi {

// Per-endpoint wired latency: each hop through an endpoint's access line
// draws uniformly from [lo, hi]; a wired transfer pays both endpoints.
struct WiredLinkModel {
    double lo_ms = 0.05;
    double hi_ms = 0.25;

    double sample(Rng& rng) const {
        return lo_ms >= hi_ms ? lo_ms : rng.uniform(lo_ms, hi_ms);
    }

    static WiredLinkModel for_technology(WiredTechnology tech) {
        switch (tech) {
        case WiredTechnology::GigabitLan: return {0.05, 0.25};
        case WiredTechnology::Cable: return {0.0, 10.0};
        case WiredTechnology::Dsl: return {20.0, 60.0};
        }
        return {};
    }
};

struct WirelessModel {
    double bitrate_bps = kMgmtBitrate5gBps; // management frame bitrate
    double per_link_delay_ms = 0.0;
    double loss = 0.0;     // probe-response loss probability
    double dwell_ms = kDefaultDwellMs;
};

struct TraceRecord {
    double t_ms = 0.0;
    std::string kind;
    ApId src;
    ApId dst;
    nlohmann::json detail;
};

struct ProbeResponse {
    ApId responder;
    std::string ssid;
    ChannelId channel = 0;
    Bytes ie;              // may be empty (non-participating AP)
    double arrival_ms = 0.0;
};

struct ScanOutcome {
    std::vector<ProbeResponse> responses;
    double completes_at_ms = 0.0; // scanner is deaf until then
    int probes_sent = 0;
};

// Desk-scale network emulator: one wireless broadcast domain per adjacency
// edge for management frames, plus a lossless pub/sub overlay over the
// wired backhaul.  All timing runs on a virtual clock; all randomness comes
// from the owned seeded stream, so runs are reproducible bit for bit.
class Emulator {
public:
    using ProbeHook =
        std::function<std::optional<Bytes>(const ApId& requester,
                                           const std::optional<Bytes>& request_ie)>;
    using WiredRxHandler = std::function<void(const Bytes& payload)>;
    using WireTap =
        std::function<void(const ApId& from, const ApId& to, const Bytes& payload)>;

    struct Counters {
        uint64_t wired_sent = 0;
        uint64_t wired_delivered = 0;
        uint64_t wired_dropped_unsubscribed = 0;
        uint64_t wired_dropped_unroutable = 0;
        uint64_t probes_sent = 0;
        uint64_t probe_responses = 0;
        uint64_t probe_responses_lost = 0;
        uint64_t scans_single = 0;
        uint64_t scans_full = 0;
    };

    Emulator(Topology topo, WirelessModel wireless, Rng rng);

    VirtualClock& clock() { return clock_; }
    const Topology& topology() const { return topo_; }
    const WirelessModel& wireless() const { return wireless_; }

    // --- node wiring -----------------------------------------------------
    void set_wired_rx(const ApId& ap, WiredRxHandler handler);
    void set_probe_hook(const ApId& ap, ProbeHook hook);
    void set_default_response_ie(const ApId& ap, Bytes ie);
    void set_channel(const ApId& ap, ChannelId channel);
    ChannelId channel_of(const ApId& ap) const;
    void set_address(const ApId& ap, const std::string& dotted);
    const std::string& address_of(const ApId& ap) const;
    std::optional<ApId> resolve_address(const std::string& dotted) const;
    void set_wired_model(const ApId& ap, WiredLinkModel model);

    // --- wireless --------------------------------------------------------
    // channel == nullopt sweeps every channel in the plan in order.  The
    // scanner is deaf (accounted) until the outcome's completion time.
    ScanOutcome active_scan(const ApId& requester, std::optional<ChannelId> channel,
                            const std::optional<std::string>& ssid_filter,
                            const std::optional<Bytes>& request_ie);

    // --- wired overlay ---------------------------------------------------
    // Subscriptions are directed: subscribe(a, addr_of(b)) makes a receive
    // b's publications.  Returns false if the address resolves nowhere.
    bool subscribe(const ApId& subscriber, const std::string& publisher_address);
    void unsubscribe(const ApId& subscriber, const std::string& publisher_address);
    bool is_subscribed(const ApId& subscriber, const ApId& publisher) const;
    void publish(const ApId& from, const Bytes& payload);
    // Directed delivery to one address; still requires the receiver's
    // subscription to the sender (connection-oriented overlay).
    bool send_unicast(const ApId& from, const std::string& to_address, Bytes payload);
    // Raw frame entry for tests and adversarial injection: delivers `payload`
    // to `to` as if `claimed_from` had sent it.
    void inject_wired(const ApId& claimed_from, const ApId& to, Bytes payload);

    // --- accounting ------------------------------------------------------
    const Counters& counters() const { return counters_; }
    uint64_t wired_in_flight() const { return in_flight_; }
    double deaf_ms(const ApId& ap) const;
    void set_wire_tap(WireTap tap) { tap_ = std::move(tap); }
    const std::vector<TraceRecord>& trace() const { return trace_; }
    void record(TraceRecord rec); // external components may add trace lines

private:
    struct Node {
        const ApSpec* spec = nullptr;
        ChannelId channel = 0;
        std::string address;
        WiredLinkModel wired;
        WiredRxHandler rx;
        ProbeHook hook;
        Bytes default_ie;
        std::set<ApId> subscribers; // who listens to this node's publications
        double deaf_ms = 0.0;
    };

    Node& node(const ApId& ap);
    const Node& node(const ApId& ap) const;
    void transmit(const ApId& from, const ApId& to, Bytes payload);
    double airtime_ms(double octets) const {
        return octets * 8.0 * 1000.0 / wireless_.bitrate_bps;
    }
    void trace_at(double t, std::string kind, ApId src, ApId dst, nlohmann::json detail);

    Topology topo_;
    WirelessModel wireless_;
    Rng rng_;
    VirtualClock clock_;
    std::map<ApId, Node> nodes_;
    std::map<std::string, ApId> address_index_;
    std::map<std::pair<ApId, ApId>, double> fifo_horizon_;
    Counters counters_;
    uint64_t in_flight_ = 0;
    WireTap tap_;
    std::vector<TraceRecord> trace_;
};

void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace);

} // namespace resfi

#endif
