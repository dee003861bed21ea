#include "resfi/apps.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace resfi {

// --- channel selection -----------------------------------------------------

long hminmax_cost(long self_load, const std::map<ApId, NeighborChannelInfo>& nb_info,
                  ChannelId c) {
    long worst = 0;
    for (const auto& [id, info] : nb_info)
        if (info.ch == c) worst = std::max(worst, self_load + info.load);
    return worst;
}

ChannelId channel_selection_step(long self_load,
                                 const std::map<ApId, NeighborChannelInfo>& nb_info,
                                 std::vector<ChannelId> channels) {
    if (channels.empty()) throw std::invalid_argument("channel list is empty");
    std::sort(channels.begin(), channels.end());
    ChannelId best = channels.front();
    long best_cost = std::numeric_limits<long>::max();
    for (ChannelId c : channels) {
        long cost = hminmax_cost(self_load, nb_info, c);
        if (cost < best_cost) { // strict: earlier (lower) channel wins ties
            best_cost = cost;
            best = c;
        }
    }
    return best;
}

ChannelSelectionApp::ChannelSelectionApp(ResFiAgent& agent, Rng rng, Options opt)
    : agent_(&agent), rng_(rng), opt_(opt) {
    AppCallbacks cbs;
    cbs.rx = [this](const ApId& origin, const nlohmann::json& doc) {
        if (!doc.is_object() || !doc.contains("node") || !doc.contains("ch") ||
            !doc.contains("load"))
            return;
        nb_info_[doc["node"].get<ApId>()] = {doc["load"].get<long>(),
                                             doc["ch"].get<ChannelId>()};
        (void)origin;
        if (running_ && evaluate()) announce(); // tell neighbors we moved
    };
    cbs.link_failure = [this](const ApId& nb) { nb_info_.erase(nb); };
    agent_->reg_callbacks(std::move(cbs));
    handle_ = agent_->register_new_application(kNamespace);
    channels_ = agent_->get_channels();
}

void ChannelSelectionApp::start() {
    if (running_) return;
    running_ = true;
    timer_ = handle_->schedule(rng_.uniform(0.0, opt_.jitter_ms / 2.0),
                               [this] { cycle(); });
}

void ChannelSelectionApp::stop() {
    if (timer_) handle_->cancel_timer(timer_);
    timer_ = 0;
    running_ = false;
}

void ChannelSelectionApp::cycle() {
    if (!running_) return;
    evaluate();
    announce();
    double delay = opt_.period_ms + rng_.uniform(0.0, opt_.jitter_ms / 2.0);
    timer_ = handle_->schedule(delay, [this] { cycle(); });
}

void ChannelSelectionApp::announce() {
    handle_->send_to_neighbors({{"node", agent_->identity().ap_id},
                                {"ch", current_channel()},
                                {"load", own_load()}},
                               1);
}

bool ChannelSelectionApp::evaluate() {
    double dwell = opt_.min_dwell_ms < 0 ? opt_.period_ms : opt_.min_dwell_ms;
    if (ever_switched_ && handle_->now_ms() - last_switch_ms_ < dwell)
        return false; // recently hopped: let the announcement circulate first
    ChannelId here = current_channel();
    ChannelId best = channel_selection_step(own_load(), nb_info_, channels_);
    if (best == here) return false;
    long gain = hminmax_cost(own_load(), nb_info_, here) -
                hminmax_cost(own_load(), nb_info_, best);
    if (gain <= opt_.margin) return false; // not strictly better: stay put
    agent_->set_channel(best);
    ++switches_;
    ever_switched_ = true;
    last_switch_ms_ = handle_->now_ms();
    return true;
}

ChannelId ChannelSelectionApp::current_channel() const {
    return agent_->identity().channel;
}

long ChannelSelectionApp::own_load() const { return agent_->get_network_load(1); }

// --- clustering --------------------------------------------------------------

const char* to_string(ClusterRole role) {
    switch (role) {
    case ClusterRole::Undecided: return "undecided";
    case ClusterRole::Head: return "head";
    case ClusterRole::Member: return "member";
    }
    return "?";
}

bool cluster_weight_less(long load_a, const ApId& a, long load_b, const ApId& b) {
    return load_a != load_b ? load_a < load_b : a < b;
}

ClusterState dca_round(const ApId& self, long self_load, const ClusterState& current,
                       const std::map<ApId, ClusterPeerState>& peers) {
    if (current.role != ClusterRole::Undecided) return current;

    // Join the heaviest adjacent declared head, if any.
    const ApId* best_head = nullptr;
    long best_load = 0;
    for (const auto& [id, peer] : peers) {
        if (peer.role != ClusterRole::Head) continue;
        if (!best_head ||
            cluster_weight_less(best_load, *best_head, peer.load, id)) {
            best_head = &id;
            best_load = peer.load;
        }
    }
    if (best_head) return {ClusterRole::Member, *best_head};

    // No adjacent head: we may declare once every heavier neighbor has
    // decided (they are all members then, so independence holds).
    for (const auto& [id, peer] : peers)
        if (peer.role == ClusterRole::Undecided &&
            cluster_weight_less(self_load, self, peer.load, id))
            return current;
    return {ClusterRole::Head, {}};
}

DcaApp::DcaApp(ResFiAgent& agent, Options opt) : agent_(&agent), opt_(opt) {
    AppCallbacks cbs;
    cbs.rx = [this](const ApId& origin, const nlohmann::json& doc) {
        if (!doc.is_object() || !doc.contains("node") || !doc.contains("load") ||
            !doc.contains("role"))
            return;
        (void)origin;
        ClusterPeerState peer;
        peer.load = doc["load"].get<long>();
        std::string role = doc["role"].get<std::string>();
        peer.role = role == "head"     ? ClusterRole::Head
                    : role == "member" ? ClusterRole::Member
                                       : ClusterRole::Undecided;
        peers_[doc["node"].get<ApId>()] = peer;
    };
    cbs.link_failure = [this](const ApId& nb) { peers_.erase(nb); };
    agent_->reg_callbacks(std::move(cbs));
    handle_ = agent_->register_new_application(kNamespace);
}

void DcaApp::start() {
    if (running_) return;
    running_ = true;
    announce(); // weights circulate one round before anyone decides
    timer_ = handle_->schedule(opt_.round_ms, [this] { round(); });
}

void DcaApp::stop() {
    if (timer_) handle_->cancel_timer(timer_);
    timer_ = 0;
    running_ = false;
}

bool DcaApp::settled() const {
    if (!decided()) return false;
    for (const auto& [id, peer] : peers_)
        if (peer.role == ClusterRole::Undecided) return false;
    return true;
}

void DcaApp::round() {
    if (!running_) return;
    if (!decided()) {
        ++rounds_to_decide_;
        state_ = dca_round(agent_->identity().ap_id, agent_->get_network_load(1),
                           state_, peers_);
    }
    announce();
    timer_ = handle_->schedule(opt_.round_ms, [this] { round(); });
}

void DcaApp::announce() {
    handle_->send_to_neighbors({{"node", agent_->identity().ap_id},
                                {"load", agent_->get_network_load(1)},
                                {"role", to_string(state_.role)},
                                {"head", state_.head}},
                               1);
}

// --- end-to-end security ------------------------------------------------------

E2eSecurityApp::E2eSecurityApp(ResFiAgent& agent, Rng rng)
    : agent_(&agent), rng_(rng) {
    AppCallbacks cbs;
    cbs.rx = [this](const ApId& origin, const nlohmann::json& doc) {
        on_rx(origin, doc);
    };
    agent_->reg_callbacks(std::move(cbs));
    handle_ = agent_->register_new_application(kNamespace);
    self_ = agent_->identity().ap_id;
    directory_[self_] = std::get<Bytes>(agent_->get_resfi_credentials(2));
}

void E2eSecurityApp::announce_head_key(int ttl) {
    reply_ttl_ = ttl;
    // The budget rides along so members answer over the same reach.
    handle_->send_to_neighbors({{"op", "head_key"},
                                {"node", self_},
                                {"ttl", ttl},
                                {"key", base64_encode(directory_[self_])}},
                               ttl);
}

void E2eSecurityApp::send_secure(const ApId& to, const nlohmann::json& doc, int ttl) {
    auto it = directory_.find(to);
    if (it == directory_.end())
        throw std::invalid_argument("no public key on file for " + to);
    Bytes blob = crypto::seal_unicast(to_bytes(doc.dump()), it->second, rng_);
    handle_->send_to_neighbors({{"op", "e2e"},
                                {"to", to},
                                {"from", self_},
                                {"blob", base64_encode(blob)}},
                               ttl);
}

std::vector<ApId> E2eSecurityApp::unreached(const std::vector<ApId>& expected) const {
    std::vector<ApId> missing;
    for (const ApId& id : expected)
        if (!directory_.count(id)) missing.push_back(id);
    return missing;
}

void E2eSecurityApp::on_rx(const ApId& origin, const nlohmann::json& doc) {
    (void)origin;
    if (!doc.is_object() || !doc.contains("op") || !doc["op"].is_string()) return;
    std::string op = doc["op"].get<std::string>();

    if (op == "head_key" || op == "member_key") {
        if (!doc.contains("key") || !doc["key"].is_string() ||
            !doc.contains("node") || !doc["node"].is_string())
            return;
        auto key = base64_decode(doc["key"].get<std::string>());
        if (!key) return;
        ApId node = doc["node"].get<ApId>();
        bool knew = directory_.count(node) > 0;
        directory_[node] = std::move(*key);
        if (op == "head_key" && !knew) {
            if (doc.contains("ttl") && doc["ttl"].is_number_integer())
                reply_ttl_ = std::max(1, doc["ttl"].get<int>());
            handle_->send_to_neighbors({{"op", "member_key"},
                                        {"node", self_},
                                        {"key", base64_encode(directory_[self_])}},
                                       reply_ttl_);
        }
        return;
    }

    if (op == "e2e" && doc.contains("to") && doc["to"] == self_ &&
        doc.contains("from") && doc["from"].is_string() &&
        doc.contains("blob") && doc["blob"].is_string()) {
        auto blob = base64_decode(doc["blob"].get<std::string>());
        if (!blob) return;
        // Relays carried this blob but only our private key opens it.
        auto opened = agent_->use_private_rsa_key(*blob, 2);
        if (!opened) return;
        nlohmann::json body = nlohmann::json::parse(*opened, nullptr, false);
        if (body.is_discarded()) return;
        inbox_.push_back({doc["from"].get<ApId>(), std::move(body)});
    }
}

} // namespace resfi
