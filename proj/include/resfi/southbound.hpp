#ifndef RESFI_SOUTHBOUND_HPP
#define RESFI_SOUTHBOUND_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "resfi/bytes.hpp"
#include "resfi/netemu.hpp"
#include "resfi/topology.hpp"

namespace resfi {

struct WiredEndpoint {
    std::string address;
    uint16_t port = 5555;
};

struct ClientInfo {
    std::string mac;
    double snr_db = 0.0;
};

struct LinkStats {
    uint64_t packets = 0;
    uint64_t bytes = 0;
    double throughput_bps = 0.0;
};

// Platform contract the agent runs against: scanning and probe plumbing,
// the wired pub/sub overlay, timers, and the radio-resource surface.  One
// backend per agent.  The emulated implementation below is the reference;
// a hardware port would implement the same contract.
class SouthboundBackend {
public:
    virtual ~SouthboundBackend() = default;

    // Framework side ------------------------------------------------------
    virtual WiredEndpoint wired_endpoint() = 0;
    // Called for every incoming probe request; the returned element (if
    // any) overrides the advertised default for that response.
    virtual void on_probe_request(Emulator::ProbeHook hook) = 0;
    // Element advertised in probe responses when no hook override applies.
    virtual void set_response_element(Bytes ie) = 0;
    virtual ScanOutcome active_scan(std::optional<ChannelId> channel,
                                    const std::optional<std::string>& ssid,
                                    const std::optional<Bytes>& request_ie) = 0;

    virtual bool overlay_subscribe(const std::string& publisher_address) = 0;
    virtual void overlay_unsubscribe(const std::string& publisher_address) = 0;
    virtual void overlay_publish(const Bytes& payload) = 0;
    virtual bool overlay_send(const std::string& address, Bytes payload) = 0;
    virtual void on_wired(std::function<void(const Bytes&)> handler) = 0;
    virtual void set_wired_address(const std::string& dotted) = 0;

    // Platform clock ------------------------------------------------------
    virtual double now_ms() = 0;
    virtual uint64_t schedule(double delay_ms, std::function<void()> fn) = 0;
    virtual void cancel_timer(uint64_t id) = 0;

    // Structured event sink (run trace for experiments).
    virtual void record_event(const std::string& kind, const ApId& peer,
                              nlohmann::json detail) = 0;

    // Radio-resource surface ----------------------------------------------
    virtual ChannelId rf_channel() = 0;
    virtual void set_rf_channel(ChannelId channel) = 0;
    virtual std::vector<ChannelId> channels() = 0;
    // type 1: number of served stations; type 2: downlink bytes.
    virtual long network_load(int type) = 0;
    virtual std::vector<ClientInfo> client_info() = 0;
    virtual LinkStats rx_stats(const std::string& mac) = 0;
    virtual LinkStats tx_stats(const std::string& mac) = 0;
    virtual void inject_raw_frame(const Bytes& frame) = 0;
    virtual void start_vap(const std::string& ssid) = 0;
    virtual void set_tx_power(int dbm) = 0;
    virtual int tx_power() = 0;
    virtual void set_channel_width(int mhz) = 0;
    virtual int channel_width() = 0;
};

// Reference backend on top of the network emulator.  The radio-resource
// calls that have no emulated effect are recorded so tests can assert an
// application exercised them.
class EmulatedBackend : public SouthboundBackend {
public:
    EmulatedBackend(Emulator& emu, ApId id);

    WiredEndpoint wired_endpoint() override;
    void on_probe_request(Emulator::ProbeHook hook) override;
    void set_response_element(Bytes ie) override;
    ScanOutcome active_scan(std::optional<ChannelId> channel,
                            const std::optional<std::string>& ssid,
                            const std::optional<Bytes>& request_ie) override;

    bool overlay_subscribe(const std::string& publisher_address) override;
    void overlay_unsubscribe(const std::string& publisher_address) override;
    void overlay_publish(const Bytes& payload) override;
    bool overlay_send(const std::string& address, Bytes payload) override;
    void on_wired(std::function<void(const Bytes&)> handler) override;
    void set_wired_address(const std::string& dotted) override;

    double now_ms() override;
    uint64_t schedule(double delay_ms, std::function<void()> fn) override;
    void cancel_timer(uint64_t id) override;
    void record_event(const std::string& kind, const ApId& peer,
                      nlohmann::json detail) override;

    ChannelId rf_channel() override;
    void set_rf_channel(ChannelId channel) override;
    std::vector<ChannelId> channels() override;
    long network_load(int type) override;
    std::vector<ClientInfo> client_info() override;
    LinkStats rx_stats(const std::string& mac) override;
    LinkStats tx_stats(const std::string& mac) override;
    void inject_raw_frame(const Bytes& frame) override;
    void start_vap(const std::string& ssid) override;
    void set_tx_power(int dbm) override;
    int tx_power() override;
    void set_channel_width(int mhz) override;
    int channel_width() override;

    const std::map<std::string, int>& recorded_calls() const { return calls_; }

private:
    Emulator* emu_;
    ApId id_;
    int tx_power_dbm_ = 20;
    int width_mhz_ = 20;
    std::map<std::string, int> calls_;
};

} // namespace resfi

#endif
