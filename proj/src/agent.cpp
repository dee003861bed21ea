#include "resfi/agent.hpp"

#include <algorithm>

#include "resfi/errors.hpp"

namespace resfi {

void AppHandle::send_to_neighbors(const nlohmann::json& doc, int ttl) {
    agent_->send_to_neighbors(ns_, doc, ttl);
}

void AppHandle::send_to_neighbor(const ApId& to, const nlohmann::json& doc) {
    agent_->send_to_neighbor(ns_, to, doc);
}

std::vector<ApId> AppHandle::neighbors() const { return agent_->get_neighbors(); }

uint64_t AppHandle::schedule(double delay_ms, std::function<void()> fn) {
    return agent_->backend().schedule(delay_ms, std::move(fn));
}

void AppHandle::cancel_timer(uint64_t id) { agent_->backend().cancel_timer(id); }

double AppHandle::now_ms() const { return agent_->backend().now_ms(); }

ResFiAgent::ResFiAgent(AgentConfig cfg, SouthboundBackend& backend, Rng rng)
    : cfg_(std::move(cfg)), backend_(&backend), rng_(rng) {
    keys_ = crypto::generate_identity(cfg_.key_seed);
    group_key_ = crypto::generate_group_key(rng_, 1);
    key_history_.push_back(group_key_);

    WiredEndpoint ep = backend_->wired_endpoint();
    identity_.ap_id = cfg_.id;
    identity_.wired_address = ep.address;
    identity_.port = ep.port;
    identity_.public_key_der = keys_.public_der;
    identity_.ssid = cfg_.ssid;
    identity_.channel = cfg_.channel;

    // Credentials exist from construction: the AP answers neighbor probes
    // (and learns requesters) even before its own boot sweep runs.
    backend_->on_probe_request(
        [this](const ApId& who, const std::optional<Bytes>& ie) {
            return on_probe_request(who, ie);
        });
    backend_->set_response_element(small_element());
    backend_->on_wired([this](const Bytes& raw) { on_wired(raw); });
    backend_->set_rf_channel(cfg_.channel);

    expiry_timer_ = backend_->schedule(cfg_.expiry_tick_ms, [this] { sweep_expired(); });
}

Bytes ResFiAgent::big_element() const {
    return encode_ie(make_big_ie(group_key_, identity_.wired_address,
                                 identity_.public_key_der),
                     cfg_.vendor);
}

Bytes ResFiAgent::small_element() const {
    return encode_ie(make_small_ie(group_key_), cfg_.vendor);
}

void ResFiAgent::boot() {
    ScanOutcome outcome =
        backend_->active_scan(std::nullopt, std::nullopt, big_element());
    double delay = outcome.completes_at_ms - backend_->now_ms();
    backend_->schedule(delay, [this, outcome = std::move(outcome)] {
        for (const ProbeResponse& resp : outcome.responses) {
            if (resp.ie.empty()) continue; // non-participating AP
            auto ie = decode_ie(resp.ie, cfg_.vendor);
            if (!ie || ie->variant != ResFiIe::Variant::Big) {
                ++counters_.ie_rejected;
                continue;
            }
            upsert_neighbor(resp.responder, ie->wired_address, ie->group_key,
                            &ie->public_key_der, &resp.ssid, resp.channel);
        }
        booted_ = true;
        backend_->record_event("boot_done", {},
                               {{"neighbors", neighbors_.size()}});
    });
}

std::optional<Bytes> ResFiAgent::on_probe_request(const ApId& requester,
                                                  const std::optional<Bytes>& request_ie) {
    if (!request_ie) return small_element(); // key-refresh scan
    auto ie = decode_ie(*request_ie, cfg_.vendor);
    if (!ie) {
        ++counters_.ie_rejected;
        return small_element();
    }
    if (ie->variant == ResFiIe::Variant::Big) {
        // Bootstrap peer: learn it, subscribe back, answer with full
        // credentials so the exchange is mutual.
        upsert_neighbor(requester, ie->wired_address, ie->group_key,
                        &ie->public_key_der, nullptr, std::nullopt);
        return big_element();
    }
    return small_element();
}

void ResFiAgent::upsert_neighbor(const ApId& id, const std::string& fixed_address,
                                 const crypto::GroupKey& key, const Bytes* public_der,
                                 const std::string* ssid,
                                 std::optional<ChannelId> channel) {
    if (id == cfg_.id) return;
    std::string address = strip_address_padding(fixed_address);

    auto it = neighbors_.find(id);
    if (it == neighbors_.end()) {
        NeighborRecord rec;
        rec.identity.ap_id = id;
        rec.identity.wired_address = address;
        if (public_der) rec.identity.public_key_der = *public_der;
        if (ssid) rec.identity.ssid = *ssid;
        if (channel) rec.identity.channel = *channel;
        rec.group_key = key;
        // Elements carry no epoch; the record counts credentials seen, and
        // the first one aligns with the owner's initial epoch.
        rec.group_key.epoch = 1;
        rec.last_kcm_ms = backend_->now_ms();
        rec.subscribed = backend_->overlay_subscribe(address);
        neighbors_.emplace(id, std::move(rec));
        backend_->record_event("neighbor_added", id, {{"address", address}});
        for (auto& [ns, reg] : apps_)
            if (reg.cbs.new_link) reg.cbs.new_link(id);
        return;
    }

    NeighborRecord& rec = it->second;
    if (rec.identity.wired_address != address) {
        // Re-bootstrap after renumbering: move the subscription over.
        backend_->overlay_unsubscribe(rec.identity.wired_address);
        rec.identity.wired_address = address;
        rec.subscribed = backend_->overlay_subscribe(address);
        backend_->record_event("neighbor_readdressed", id, {{"address", address}});
    } else if (!rec.subscribed) {
        rec.subscribed = backend_->overlay_subscribe(address);
    }
    if (public_der) rec.identity.public_key_der = *public_der;
    if (ssid) rec.identity.ssid = *ssid;
    if (channel) rec.identity.channel = *channel;
    uint64_t seen = rec.group_key.epoch;
    bool fresh = !rec.group_key.same_material(key);
    rec.group_key = key;
    rec.group_key.epoch = fresh ? seen + 1 : seen;
    rec.last_kcm_ms = backend_->now_ms();
    rec.suspect = false;
}

void ResFiAgent::remove_neighbor(const ApId& id, const char* reason) {
    auto it = neighbors_.find(id);
    if (it == neighbors_.end()) return;
    backend_->overlay_unsubscribe(it->second.identity.wired_address);
    backend_->record_event("neighbor_removed", id, {{"reason", reason}});
    neighbors_.erase(it);
    blocked_senders_.erase(id);
    deferred_.erase(id);
    for (auto& [ns, reg] : apps_)
        if (reg.cbs.link_failure) reg.cbs.link_failure(id);
}

std::vector<ApId> ResFiAgent::get_neighbors() const {
    std::vector<ApId> out;
    out.reserve(neighbors_.size());
    for (const auto& [id, rec] : neighbors_) out.push_back(id);
    return out;
}

const NeighborRecord* ResFiAgent::neighbor(const ApId& id) const {
    auto it = neighbors_.find(id);
    return it == neighbors_.end() ? nullptr : &it->second;
}

bool ResFiAgent::check_and_mark(uint64_t seq, uint64_t& hwm, uint64_t& window) {
    if (seq == 0) return false;
    if (seq > hwm) {
        uint64_t shift = seq - hwm;
        window = shift >= 64 ? 0 : window << shift;
        window |= 1; // bit 0 = hwm itself
        hwm = seq;
        return true;
    }
    uint64_t age = hwm - seq;
    if (age >= 64) return false; // too old to judge: treat as replay
    uint64_t bit = uint64_t(1) << age;
    if (window & bit) return false;
    window |= bit;
    return true;
}

void ResFiAgent::on_wired(const Bytes& raw) {
    ++counters_.received;
    auto decoded = decode_envelope(raw);
    if (!decoded) {
        ++counters_.drop_malformed;
        return;
    }
    ControlMessage msg = std::move(*decoded);
    if (msg.sender == cfg_.id) return; // own echo; nothing to do

    auto it = neighbors_.find(msg.sender);
    if (it == neighbors_.end()) {
        ++counters_.drop_unknown_sender;
        return;
    }
    if (!crypto::verify(signing_input(msg), msg.signature,
                        it->second.identity.public_key_der)) {
        ++counters_.drop_bad_signature;
        backend_->record_event("drop_bad_signature", msg.sender, {{"seq", msg.seq}});
        return;
    }
    if (blocked_senders_.count(msg.sender)) {
        // Blocking-scan contract: this sender's traffic waits until the key
        // refresh for it completes; other senders flow freely.
        deferred_[msg.sender].push_back(std::move(msg));
        ++counters_.deferred;
        return;
    }
    process(std::move(msg));
}

void ResFiAgent::process(ControlMessage msg) {
    auto it = neighbors_.find(msg.sender);
    if (it == neighbors_.end()) { // removed while deferred
        ++counters_.drop_unknown_sender;
        return;
    }
    NeighborRecord& rec = it->second;
    if (!check_and_mark(msg.seq, rec.seq_hwm, rec.seq_window)) {
        ++counters_.drop_replay;
        backend_->record_event("drop_replay", msg.sender, {{"seq", msg.seq}});
        return;
    }

    auto opened = crypto::open_group(msg.body, rec.group_key);
    if (!opened) {
        ++counters_.drop_wrong_key;
        backend_->record_event("drop_wrong_key", msg.sender, {{"seq", msg.seq}});
        return;
    }

    if (msg.type == MsgType::Kcm) {
        nlohmann::json body = nlohmann::json::parse(*opened, nullptr, false);
        if (body.is_discarded() || !body.is_object() ||
            !body.contains("channel") || !body["channel"].is_number_integer() ||
            !body.contains("ssid") || !body["ssid"].is_string()) {
            ++counters_.drop_malformed;
            return;
        }
        handle_kcm(msg.sender, body);
        return;
    }

    Bytes plain = std::move(*opened);
    if (msg.unicast) {
        auto inner = crypto::open_unicast(plain, keys_.private_der);
        if (!inner) {
            ++counters_.drop_wrong_key;
            return;
        }
        plain = std::move(*inner);
    }
    nlohmann::json doc = nlohmann::json::parse(plain, nullptr, false);
    if (doc.is_discarded()) {
        ++counters_.drop_malformed;
        return;
    }

    FloodState& flood = flood_[msg.origin];
    bool fresh = check_and_mark(msg.oseq, flood.hwm, flood.window);
    if (fresh) dispatch(msg, doc);
    else ++counters_.drop_duplicate;
    if (!msg.unicast) maybe_forward(msg, doc);
}

void ResFiAgent::dispatch(const ControlMessage& msg, const nlohmann::json& doc) {
    auto it = apps_.find(msg.ns);
    if (it == apps_.end()) it = apps_.find("*");
    if (it == apps_.end()) {
        ++counters_.drop_unroutable;
        return;
    }
    ++counters_.delivered;
    if (it->second.cbs.rx) it->second.cbs.rx(msg.origin, doc);
}

void ResFiAgent::maybe_forward(const ControlMessage& msg, const nlohmann::json& doc) {
    int budget = msg.ttl - 1;
    if (budget < 1) return;
    FloodState& flood = flood_[msg.origin];
    auto it = flood.forwarded_budget.find(msg.oseq);
    if (it != flood.forwarded_budget.end() && it->second >= budget) return;
    flood.forwarded_budget[msg.oseq] = budget;
    // Trim state that can no longer matter for dedup.
    while (!flood.forwarded_budget.empty() &&
           flood.forwarded_budget.begin()->first + 64 < flood.hwm)
        flood.forwarded_budget.erase(flood.forwarded_budget.begin());

    // Per-hop re-encryption: the copy we pass on is sealed with OUR current
    // key and signed by us; origin/oseq survive for dedup downstream.
    ++counters_.forwarded;
    broadcast(MsgType::Data, msg.ns, doc, budget, msg.origin, msg.oseq, group_key_);
}

void ResFiAgent::broadcast(MsgType type, const std::string& ns,
                           const nlohmann::json& doc, int ttl, const ApId& origin,
                           uint64_t oseq, const crypto::GroupKey& seal_key) {
    ControlMessage msg;
    msg.sender = cfg_.id;
    msg.seq = ++seq_;
    msg.type = type;
    msg.ttl = ttl;
    msg.ns = ns;
    msg.origin = origin;
    msg.oseq = oseq;
    msg.unicast = false;
    msg.body = crypto::seal_group(to_bytes(doc.dump()), seal_key);
    msg.signature = crypto::sign(signing_input(msg), keys_.private_der);
    ++counters_.sent;
    backend_->overlay_publish(encode_envelope(msg));
}

void ResFiAgent::send_to_neighbors(const std::string& ns, const nlohmann::json& doc,
                                   int ttl) {
    if (ttl < 1) throw std::invalid_argument("ttl must be >= 1");
    uint64_t oseq = seq_ + 1; // broadcast() assigns this seq
    // Mark our own flood so echoes from forwarders are ignored.
    FloodState& flood = flood_[cfg_.id];
    check_and_mark(oseq, flood.hwm, flood.window);
    flood.forwarded_budget[oseq] = ttl;
    broadcast(MsgType::Data, ns, doc, ttl, cfg_.id, oseq, group_key_);
}

void ResFiAgent::send_to_neighbor(const std::string& ns, const ApId& to,
                                  const nlohmann::json& doc) {
    auto it = neighbors_.find(to);
    if (it == neighbors_.end()) throw UnknownNeighbor(to);

    ControlMessage msg;
    msg.sender = cfg_.id;
    msg.seq = ++seq_;
    msg.type = MsgType::Data;
    msg.ttl = 1;
    msg.ns = ns;
    msg.origin = cfg_.id;
    msg.oseq = msg.seq;
    msg.unicast = true;
    // Inner layer: only the destination's private key opens it.  Outer
    // layer: our group credential, like every wired payload.
    Bytes inner = crypto::seal_unicast(to_bytes(doc.dump()),
                                       it->second.identity.public_key_der, rng_);
    msg.body = crypto::seal_group(inner, group_key_);
    msg.signature = crypto::sign(signing_input(msg), keys_.private_der);
    ++counters_.sent;
    backend_->overlay_send(it->second.identity.wired_address, encode_envelope(msg));
}

void ResFiAgent::reg_callbacks(AppCallbacks cbs) { pending_cbs_ = std::move(cbs); }

AppHandle* ResFiAgent::register_new_application(const std::string& ns) {
    if (apps_.count(ns)) throw DuplicateNamespace(ns);
    Registration reg;
    reg.cbs = std::move(pending_cbs_);
    pending_cbs_ = {};
    reg.handle.reset(new AppHandle(this, ns));
    AppHandle* out = reg.handle.get();
    auto [it, ok] = apps_.emplace(ns, std::move(reg));
    // Late registrants still learn the current neighborhood, so newLink
    // always precedes any rx from that neighbor.
    if (it->second.cbs.new_link)
        for (const auto& [id, rec] : neighbors_) it->second.cbs.new_link(id);
    return out;
}

std::variant<std::string, Bytes> ResFiAgent::get_resfi_credentials(int param) const {
    if (param == 1) return identity_.wired_address;
    if (param == 2) return identity_.public_key_der;
    throw std::invalid_argument("credential selector must be 1 or 2");
}

std::optional<Bytes> ResFiAgent::use_private_rsa_key(ByteView data, int mode) const {
    if (mode == 1) return crypto::sign(data, keys_.private_der);
    if (mode == 2) return crypto::open_unicast(data, keys_.private_der);
    throw std::invalid_argument("key usage mode must be 1 or 2");
}

void ResFiAgent::perform_key_change() {
    crypto::GroupKey next = crypto::generate_group_key(rng_, group_key_.epoch + 1);
    // The announcement is sealed with the key neighbors currently hold;
    // everything after it uses the new one (FIFO keeps that ordering).
    nlohmann::json body{{"channel", identity_.channel}, {"ssid", identity_.ssid}};
    broadcast(MsgType::Kcm, "", body, 1, cfg_.id, seq_ + 1, group_key_);
    group_key_ = next;
    key_history_.push_back(next);
    backend_->set_response_element(small_element());
    backend_->record_event("key_change", {}, {{"epoch", next.epoch}});
}

void ResFiAgent::schedule_key_changes(double kcmi_ms, double jitter_fraction) {
    if (kcmi_ms <= 0) throw std::invalid_argument("key change interval must be > 0");
    if (jitter_fraction < 0) throw std::invalid_argument("jitter must be >= 0");
    stop_key_changes();
    rotation_kcmi_ms_ = kcmi_ms;
    rotation_jitter_ = jitter_fraction;
    double delay = kcmi_ms + rng_.uniform(0.0, jitter_fraction * kcmi_ms);
    rotation_timer_ = backend_->schedule(delay, [this] {
        perform_key_change();
        if (rotation_kcmi_ms_ > 0)
            schedule_key_changes(rotation_kcmi_ms_, rotation_jitter_);
    });
}

void ResFiAgent::stop_key_changes() {
    if (rotation_timer_) backend_->cancel_timer(rotation_timer_);
    rotation_timer_ = 0;
    rotation_kcmi_ms_ = 0.0;
}

void ResFiAgent::handle_kcm(const ApId& sender, const nlohmann::json& body) {
    ChannelId channel = body["channel"].get<int>();
    std::string ssid = body["ssid"].get<std::string>();
    auto it = neighbors_.find(sender);
    if (it == neighbors_.end()) return;
    it->second.identity.channel = channel;
    it->second.identity.ssid = ssid;
    blocked_senders_.insert(sender);
    run_rescan(sender, channel, ssid, 1);
}

void ResFiAgent::run_rescan(const ApId& sender, ChannelId channel,
                            const std::string& ssid, int attempts_left) {
    ++counters_.kcm_rescans;
    // Empty probe request: the changing AP answers with its short element
    // carrying the fresh credential.
    ScanOutcome outcome = backend_->active_scan(channel, ssid, std::nullopt);
    double delay = outcome.completes_at_ms - backend_->now_ms();
    backend_->schedule(delay, [this, sender, outcome = std::move(outcome), channel,
                               ssid, attempts_left]() mutable {
        finish_rescan(sender, std::move(outcome), channel, std::move(ssid),
                      attempts_left);
    });
}

void ResFiAgent::finish_rescan(const ApId& sender, ScanOutcome outcome,
                               ChannelId channel, std::string ssid,
                               int attempts_left) {
    auto it = neighbors_.find(sender);
    if (it == neighbors_.end()) {
        blocked_senders_.erase(sender);
        deferred_.erase(sender);
        return;
    }

    const ResFiIe* found = nullptr;
    std::optional<ResFiIe> decoded;
    for (const ProbeResponse& resp : outcome.responses) {
        if (resp.responder != sender || resp.ie.empty()) continue;
        decoded = decode_ie(resp.ie, cfg_.vendor);
        if (decoded) {
            found = &*decoded;
            break;
        }
        ++counters_.ie_rejected;
    }

    if (found) {
        NeighborRecord& rec = it->second;
        rec.group_key.key = found->group_key.key;
        rec.group_key.iv = found->group_key.iv;
        rec.group_key.epoch += 1;
        rec.last_kcm_ms = backend_->now_ms();
        rec.suspect = false;
        backend_->record_event("key_installed", sender, {{"channel", channel}});
        unblock_and_drain(sender);
        return;
    }
    if (attempts_left > 0) {
        ++counters_.kcm_retries;
        run_rescan(sender, channel, ssid, attempts_left - 1);
        return;
    }
    // Could not refresh: keep the neighbor but flag it; expiry will reap it
    // if it stays unreachable.
    it->second.suspect = true;
    backend_->record_event("key_refresh_failed", sender, {{"channel", channel}});
    unblock_and_drain(sender);
}

void ResFiAgent::unblock_and_drain(const ApId& sender) {
    blocked_senders_.erase(sender);
    auto it = deferred_.find(sender);
    if (it == deferred_.end()) return;
    std::deque<ControlMessage> queue = std::move(it->second);
    deferred_.erase(it);
    while (!queue.empty()) {
        if (blocked_senders_.count(sender)) {
            // A deferred KCM re-blocked the sender: push the rest back.
            std::deque<ControlMessage>& again = deferred_[sender];
            for (auto& m : queue) again.push_back(std::move(m));
            return;
        }
        ControlMessage msg = std::move(queue.front());
        queue.pop_front();
        process(std::move(msg));
    }
}

void ResFiAgent::sweep_expired() {
    double now = backend_->now_ms();
    std::vector<ApId> stale;
    for (const auto& [id, rec] : neighbors_)
        if (now - rec.last_kcm_ms > 2.0 * cfg_.kcmi_ms) stale.push_back(id);
    for (const ApId& id : stale) {
        ++counters_.expired_neighbors;
        remove_neighbor(id, "expired");
    }
    expiry_timer_ = backend_->schedule(cfg_.expiry_tick_ms, [this] { sweep_expired(); });
}

void ResFiAgent::handle_ip_change(const std::string& new_address) {
    backend_->record_event("ip_change", {}, {{"address", new_address}});
    std::vector<ApId> old;
    for (const auto& [id, rec] : neighbors_) old.push_back(id);
    for (const ApId& id : old) remove_neighbor(id, "ip_change");
    backend_->set_wired_address(new_address);
    identity_.wired_address = new_address;
    booted_ = false;
    boot();
}

void ResFiAgent::handle_channel_change(ChannelId new_channel) {
    std::vector<ChannelId> plan = backend_->channels();
    if (std::find(plan.begin(), plan.end(), new_channel) == plan.end())
        throw ConfigError("channel " + std::to_string(new_channel) +
                          " not in the channel plan");
    if (new_channel == identity_.channel) return;
    identity_.channel = new_channel;
    backend_->set_rf_channel(new_channel);
    // No overlay disruption; the next key change announces the new channel
    // so neighbor rescans look in the right place.
    backend_->record_event("channel_change", {}, {{"channel", new_channel}});
}

} // namespace resfi
