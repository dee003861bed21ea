#include "resfi/netemu.hpp"

#include <algorithm>
#include <ostream>

#include "resfi/errors.hpp"

namespace resfi {

Emulator::Emulator(Topology topo, WirelessModel wireless, Rng rng)
    : topo_(std::move(topo)), wireless_(wireless), rng_(rng) {
    if (wireless_.bitrate_bps <= 0) throw ConfigError("wireless bitrate must be positive");
    if (wireless_.dwell_ms <= 0) throw ConfigError("scan dwell must be positive");
    if (wireless_.loss < 0 || wireless_.loss > 1)
        throw ConfigError("loss probability must be within [0,1]");

    for (const auto& spec : topo_.aps) {
        Node n;
        n.spec = &spec;
        n.channel = spec.channel;
        n.address = spec.address;
        n.wired = WiredLinkModel::for_technology(spec.wired);
        if (n.address.empty()) throw ConfigError("AP " + spec.id + " has no address");
        if (!address_index_.emplace(n.address, spec.id).second)
            throw ConfigError("duplicate wired address " + n.address);
        nodes_.emplace(spec.id, std::move(n));
    }
}

Emulator::Node& Emulator::node(const ApId& ap) {
    auto it = nodes_.find(ap);
    if (it == nodes_.end()) throw ConfigError("unknown AP id: " + ap);
    return it->second;
}

const Emulator::Node& Emulator::node(const ApId& ap) const {
    auto it = nodes_.find(ap);
    if (it == nodes_.end()) throw ConfigError("unknown AP id: " + ap);
    return it->second;
}

void Emulator::set_wired_rx(const ApId& ap, WiredRxHandler handler) {
    node(ap).rx = std::move(handler);
}

void Emulator::set_probe_hook(const ApId& ap, ProbeHook hook) {
    node(ap).hook = std::move(hook);
}

void Emulator::set_default_response_ie(const ApId& ap, Bytes ie) {
    node(ap).default_ie = std::move(ie);
}

void Emulator::set_channel(const ApId& ap, ChannelId channel) {
    if (!topo_.has_channel(channel))
        throw ConfigError("channel " + std::to_string(channel) + " not in the plan");
    Node& n = node(ap);
    if (n.channel == channel) return;
    trace_at(clock_.now_ms(), "rf_retune", ap, {},
             {{"from", n.channel}, {"to", channel}});
    n.channel = channel;
}

ChannelId Emulator::channel_of(const ApId& ap) const { return node(ap).channel; }

void Emulator::set_address(const ApId& ap, const std::string& dotted) {
    Node& n = node(ap);
    if (dotted == n.address) return;
    if (address_index_.count(dotted))
        throw ConfigError("address " + dotted + " already in use");

    // A renumbered endpoint tears down every overlay connection touching it:
    // its subscribers lose the publication stream, and its own subscriptions
    // to others die with the old source address.
    trace_at(clock_.now_ms(), "address_change", ap, {},
             {{"from", n.address}, {"to", dotted}});
    address_index_.erase(n.address);
    n.address = dotted;
    address_index_.emplace(dotted, ap);
    for (const ApId& sub : n.subscribers)
        trace_at(clock_.now_ms(), "subscription_broken", sub, ap, {});
    n.subscribers.clear();
    for (auto& [id, other] : nodes_) {
        if (id == ap) continue;
        if (other.subscribers.erase(ap))
            trace_at(clock_.now_ms(), "subscription_broken", ap, id, {});
    }
}

const std::string& Emulator::address_of(const ApId& ap) const { return node(ap).address; }

std::optional<ApId> Emulator::resolve_address(const std::string& dotted) const {
    auto it = address_index_.find(dotted);
    if (it == address_index_.end()) return std::nullopt;
    return it->second;
}

void Emulator::set_wired_model(const ApId& ap, WiredLinkModel model) {
    node(ap).wired = model;
}

ScanOutcome Emulator::active_scan(const ApId& requester, std::optional<ChannelId> channel,
                                  const std::optional<std::string>& ssid_filter,
                                  const std::optional<Bytes>& request_ie) {
    Node& req = node(requester);
    if (channel && !topo_.has_channel(*channel))
        throw ConfigError("scan channel " + std::to_string(*channel) + " not in the plan");

    std::vector<ChannelId> sweep =
        channel ? std::vector<ChannelId>{*channel} : topo_.channels;

    const double t0 = clock_.now_ms();
    const double req_air = airtime_ms(kProbeRequestOctets +
                                      double(request_ie ? request_ie->size() : 0));
    ScanOutcome out;
    double window_start = t0;
    for (ChannelId ch : sweep) {
        ++counters_.probes_sent;
        ++out.probes_sent;
        trace_at(window_start, "probe_request", requester, {},
                 {{"channel", ch},
                  {"ie_octets", request_ie ? request_ie->size() : 0},
                  {"ssid", ssid_filter ? nlohmann::json(*ssid_filter) : nlohmann::json()}});

        for (auto& [bid, responder] : nodes_) {
            if (bid == requester) continue;
            if (responder.channel != ch) continue;
            if (!topo_.adjacent(requester, bid)) continue;
            if (ssid_filter && responder.spec->ssid != *ssid_filter) continue;

            // The responder hears the request; its hook may both react to
            // the embedded element and override the advertised response
            // element.  Contention is idealized away, so responders answer
            // even mid-scan and responses never collide.
            std::optional<Bytes> override_ie;
            if (responder.hook) override_ie = responder.hook(requester, request_ie);
            const Bytes& ie = override_ie ? *override_ie : responder.default_ie;

            ++counters_.probe_responses;
            if (wireless_.loss > 0 && rng_.chance(wireless_.loss)) {
                ++counters_.probe_responses_lost;
                trace_at(window_start, "probe_response_lost", bid, requester,
                         {{"channel", ch}});
                continue;
            }
            double arrival = window_start + req_air + wireless_.per_link_delay_ms +
                             airtime_ms(kProbeResponseOctets + double(ie.size()));
            if (arrival > window_start + wireless_.dwell_ms) {
                trace_at(arrival, "probe_response_missed", bid, requester,
                         {{"channel", ch}});
                continue;
            }
            trace_at(arrival, "probe_response", bid, requester,
                     {{"channel", ch}, {"ie_octets", ie.size()}});
            out.responses.push_back({bid, responder.spec->ssid, ch, ie, arrival});
        }
        window_start += wireless_.dwell_ms;
    }
    out.completes_at_ms = window_start;

    // Deafness: while sweeping, the scanner serves no station traffic.
    req.deaf_ms += window_start - t0;
    if (channel) ++counters_.scans_single;
    else ++counters_.scans_full;
    trace_at(out.completes_at_ms, "scan_done", requester, {},
             {{"channels", sweep.size()},
              {"responses", out.responses.size()},
              {"deaf_ms", window_start - t0}});
    return out;
}

bool Emulator::subscribe(const ApId& subscriber, const std::string& publisher_address) {
    node(subscriber); // existence check
    auto pub = resolve_address(publisher_address);
    if (!pub) {
        trace_at(clock_.now_ms(), "subscribe_failed", subscriber, {},
                 {{"address", publisher_address}});
        return false;
    }
    if (*pub == subscriber) return false;
    if (nodes_.at(*pub).subscribers.insert(subscriber).second)
        trace_at(clock_.now_ms(), "subscribe", subscriber, *pub, {});
    return true;
}

void Emulator::unsubscribe(const ApId& subscriber, const std::string& publisher_address) {
    node(subscriber);
    auto pub = resolve_address(publisher_address);
    if (!pub) return;
    if (nodes_.at(*pub).subscribers.erase(subscriber))
        trace_at(clock_.now_ms(), "unsubscribe", subscriber, *pub, {});
}

bool Emulator::is_subscribed(const ApId& subscriber, const ApId& publisher) const {
    return node(publisher).subscribers.count(subscriber) > 0;
}

void Emulator::publish(const ApId& from, const Bytes& payload) {
    // std::set iteration gives a stable delivery (and latency-draw) order.
    for (const ApId& to : node(from).subscribers) transmit(from, to, payload);
}

bool Emulator::send_unicast(const ApId& from, const std::string& to_address,
                            Bytes payload) {
    node(from);
    auto to = resolve_address(to_address);
    if (!to) {
        ++counters_.wired_dropped_unroutable;
        trace_at(clock_.now_ms(), "wired_unroutable", from, {},
                 {{"address", to_address}});
        return false;
    }
    transmit(from, *to, std::move(payload));
    return true;
}

void Emulator::inject_wired(const ApId& claimed_from, const ApId& to, Bytes payload) {
    transmit(claimed_from, to, std::move(payload));
}

void Emulator::transmit(const ApId& from, const ApId& to, Bytes payload) {
    Node& src = node(from);
    Node& dst = node(to);
    if (!src.subscribers.count(to)) {
        // Overlay is connection-oriented: no subscription, no delivery.
        ++counters_.wired_dropped_unsubscribed;
        trace_at(clock_.now_ms(), "wired_drop_unsubscribed", from, to,
                 {{"octets", payload.size()}});
        return;
    }

    double latency = src.wired.sample(rng_) + dst.wired.sample(rng_);
    double deliver_at = clock_.now_ms() + latency;
    // Per-sender-receiver FIFO: a message never overtakes an earlier one.
    double& horizon = fifo_horizon_[{from, to}];
    if (deliver_at < horizon) deliver_at = horizon;
    horizon = deliver_at;

    ++counters_.wired_sent;
    ++in_flight_;
    trace_at(clock_.now_ms(), "wired_send", from, to, {{"octets", payload.size()}});
    if (tap_) tap_(from, to, payload);

    clock_.schedule_at(deliver_at, [this, from, to, payload = std::move(payload)]() {
        ++counters_.wired_delivered;
        --in_flight_;
        trace_at(clock_.now_ms(), "wired_deliver", from, to, {{"octets", payload.size()}});
        Node& receiver = nodes_.at(to);
        if (receiver.rx) receiver.rx(payload);
    });
}

double Emulator::deaf_ms(const ApId& ap) const { return node(ap).deaf_ms; }

void Emulator::record(TraceRecord rec) { trace_.push_back(std::move(rec)); }

void Emulator::trace_at(double t, std::string kind, ApId src, ApId dst,
                        nlohmann::json detail) {
    trace_.push_back({t, std::move(kind), std::move(src), std::move(dst),
                      std::move(detail)});
}

void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace) {
    // Records are appended when known, which for in-flight frames is before
    // their timestamp; present them in time order.
    std::vector<TraceRecord> sorted(trace);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TraceRecord& a, const TraceRecord& b) { return a.t_ms < b.t_ms; });
    for (const TraceRecord& rec : sorted) {
        nlohmann::json line{{"t_ms", rec.t_ms},
                            {"kind", rec.kind},
                            {"src", rec.src},
                            {"dst", rec.dst},
                            {"detail", rec.detail}};
        out << line.dump() << '\n';
    }
}

} // namespace resfi
