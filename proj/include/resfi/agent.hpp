#ifndef RESFI_AGENT_HPP
#define RESFI_AGENT_HPP

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "resfi/crypto.hpp"
#include "resfi/ie.hpp"
#include "resfi/message.hpp"
#include "resfi/rng.hpp"
#include "resfi/southbound.hpp"

namespace resfi {

struct UnknownNeighbor : std::runtime_error {
    explicit UnknownNeighbor(const ApId& id)
        : std::runtime_error("not a current neighbor: " + id) {}
};

struct DuplicateNamespace : std::runtime_error {
    explicit DuplicateNamespace(const std::string& ns)
        : std::runtime_error("namespace already registered: " + ns) {}
};

struct AgentConfig {
    ApId id;
    std::string ssid;
    ChannelId channel = 1;
    uint64_t key_seed = 1;     // identity keypair derivation
    double kcmi_ms = 60000.0;  // key change interval
    double jitter_fraction = 0.1;
    double expiry_tick_ms = 100.0;
    VendorId vendor{};
};

struct ApIdentity {
    ApId ap_id;
    std::string wired_address; // plain dotted quad
    uint16_t port = 0;
    Bytes public_key_der;
    std::string ssid;
    ChannelId channel = 0;
};

struct NeighborRecord {
    ApIdentity identity;
    crypto::GroupKey group_key; // neighbor's current credential
    double last_kcm_ms = 0.0;   // last time fresh key material was installed
    bool subscribed = false;
    bool suspect = false;       // key refresh failed; kept until expiry
    // Replay guard: high-water mark plus a 64-wide recent window.
    uint64_t seq_hwm = 0;
    uint64_t seq_window = 0;
};

struct AppCallbacks {
    std::function<void(const ApId& origin, const nlohmann::json& doc)> rx;
    std::function<void(const ApId& neighbor)> new_link;
    std::function<void(const ApId& neighbor)> link_failure;
};

struct AgentCounters {
    uint64_t sent = 0;
    uint64_t received = 0;
    uint64_t forwarded = 0;
    uint64_t delivered = 0;
    uint64_t drop_bad_signature = 0;
    uint64_t drop_wrong_key = 0;
    uint64_t drop_replay = 0;
    uint64_t drop_unknown_sender = 0;
    uint64_t drop_malformed = 0;
    uint64_t drop_unroutable = 0;
    uint64_t drop_duplicate = 0;
    uint64_t ie_rejected = 0;
    uint64_t kcm_rescans = 0;
    uint64_t kcm_retries = 0;
    uint64_t deferred = 0;
    uint64_t expired_neighbors = 0;
};

class ResFiAgent;

// Per-application face of the agent: all sends carry the registration's
// namespace; management calls pass straight through.
class AppHandle {
public:
    const std::string& ns() const { return ns_; }
    void send_to_neighbors(const nlohmann::json& doc, int ttl = 1);
    void send_to_neighbor(const ApId& to, const nlohmann::json& doc);
    std::vector<ApId> neighbors() const;
    ResFiAgent& agent() { return *agent_; }
    // Periodic work runs on the agent's event loop, same as callbacks.
    uint64_t schedule(double delay_ms, std::function<void()> fn);
    void cancel_timer(uint64_t id);
    double now_ms() const;

private:
    friend class ResFiAgent;
    AppHandle(ResFiAgent* agent, std::string ns) : agent_(agent), ns_(std::move(ns)) {}
    ResFiAgent* agent_;
    std::string ns_;
};

// Protocol engine for one AP: discovery over probe traffic, the secured
// wired overlay, periodic key rotation with blocking rescans, neighbor
// expiry, and TTL flooding with per-hop re-encryption.
class ResFiAgent {
public:
    ResFiAgent(AgentConfig cfg, SouthboundBackend& backend, Rng rng);

    // Full active sweep with our credentials embedded; on completion every
    // discovered peer is recorded and mutually subscribed.
    void boot();
    bool booted() const { return booted_; }

    // --- northbound API ----------------------------------------------------
    std::vector<ApId> get_neighbors() const;
    void send_to_neighbors(const std::string& ns, const nlohmann::json& doc, int ttl);
    void send_to_neighbor(const std::string& ns, const ApId& to,
                          const nlohmann::json& doc);
    void reg_callbacks(AppCallbacks cbs); // held for the next registration
    AppHandle* register_new_application(const std::string& ns);
    // 1: wired address, 2: public key DER.
    std::variant<std::string, Bytes> get_resfi_credentials(int param) const;
    // 1: sign data, 2: open a unicast-sealed blob.  nullopt = cannot open.
    std::optional<Bytes> use_private_rsa_key(ByteView data, int mode) const;
    std::vector<ChannelId> get_channels() { return backend_->channels(); }
    long get_network_load(int type) { return backend_->network_load(type); }
    void set_channel(ChannelId ch) { handle_channel_change(ch); }

    // --- protocol operations ------------------------------------------------
    void perform_key_change();
    void schedule_key_changes(double kcmi_ms, double jitter_fraction);
    void stop_key_changes();
    void handle_ip_change(const std::string& new_address);
    void handle_channel_change(ChannelId new_channel);

    // --- introspection -------------------------------------------------------
    const ApIdentity& identity() const { return identity_; }
    const crypto::GroupKey& group_key() const { return group_key_; }
    uint64_t epoch() const { return group_key_.epoch; }
    // Every credential this agent has ever used, oldest first.
    const std::vector<crypto::GroupKey>& key_history() const { return key_history_; }
    const NeighborRecord* neighbor(const ApId& id) const;
    const AgentCounters& counters() const { return counters_; }
    bool rescan_pending() const { return !blocked_senders_.empty(); }
    SouthboundBackend& backend() { return *backend_; }

private:
    struct Registration {
        AppCallbacks cbs;
        std::unique_ptr<AppHandle> handle;
    };
    // Flood bookkeeping per origin: delivery dedup plus the highest hop
    // budget already forwarded for each recent sequence.
    struct FloodState {
        uint64_t hwm = 0;
        uint64_t window = 0;
        std::map<uint64_t, int> forwarded_budget;
    };

    std::optional<Bytes> on_probe_request(const ApId& requester,
                                          const std::optional<Bytes>& request_ie);
    void on_wired(const Bytes& raw);
    void process(ControlMessage msg);
    void handle_kcm(const ApId& sender, const nlohmann::json& body);
    void run_rescan(const ApId& sender, ChannelId channel, const std::string& ssid,
                    int attempts_left);
    void finish_rescan(const ApId& sender, ScanOutcome outcome, ChannelId channel,
                       std::string ssid, int attempts_left);
    void unblock_and_drain(const ApId& sender);
    void upsert_neighbor(const ApId& id, const std::string& fixed_address,
                         const crypto::GroupKey& key, const Bytes* public_der,
                         const std::string* ssid, std::optional<ChannelId> channel);
    void remove_neighbor(const ApId& id, const char* reason);
    void dispatch(const ControlMessage& msg, const nlohmann::json& doc);
    void maybe_forward(const ControlMessage& msg, const nlohmann::json& doc);
    void sweep_expired();
    void broadcast(MsgType type, const std::string& ns, const nlohmann::json& doc,
                   int ttl, const ApId& origin, uint64_t oseq,
                   const crypto::GroupKey& seal_key);
    Bytes big_element() const;
    Bytes small_element() const;
    // true = fresh (not seen); marks it seen.
    static bool check_and_mark(uint64_t seq, uint64_t& hwm, uint64_t& window);

    AgentConfig cfg_;
    SouthboundBackend* backend_;
    Rng rng_;
    ApIdentity identity_;
    crypto::IdentityKeypair keys_;
    crypto::GroupKey group_key_;
    std::vector<crypto::GroupKey> key_history_;
    uint64_t seq_ = 0;
    bool booted_ = false;

    std::map<ApId, NeighborRecord> neighbors_;
    std::map<ApId, FloodState> flood_;
    std::set<ApId> blocked_senders_;
    std::map<ApId, std::deque<ControlMessage>> deferred_;
    std::map<std::string, Registration> apps_;
    AppCallbacks pending_cbs_;
    AgentCounters counters_;
    uint64_t rotation_timer_ = 0;
    uint64_t expiry_timer_ = 0;
    double rotation_kcmi_ms_ = 0.0;
    double rotation_jitter_ = 0.0;
};

} // namespace resfi

#endif
