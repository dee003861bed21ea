#include "resfi/southbound.hpp"

#include <stdexcept>

namespace resfi {

EmulatedBackend::EmulatedBackend(Emulator& emu, ApId id)
    : emu_(&emu), id_(std::move(id)) {
    if (emu_->topology().find(id_) == nullptr)
        throw std::invalid_argument("unknown AP " + id_);
}

WiredEndpoint EmulatedBackend::wired_endpoint() {
    return {emu_->address_of(id_), 5555};
}

void EmulatedBackend::on_probe_request(Emulator::ProbeHook hook) {
    emu_->set_probe_hook(id_, std::move(hook));
}

void EmulatedBackend::set_response_element(Bytes ie) {
    emu_->set_default_response_ie(id_, std::move(ie));
}

ScanOutcome EmulatedBackend::active_scan(std::optional<ChannelId> channel,
                                         const std::optional<std::string>& ssid,
                                         const std::optional<Bytes>& request_ie) {
    return emu_->active_scan(id_, channel, ssid, request_ie);
}

bool EmulatedBackend::overlay_subscribe(const std::string& publisher_address) {
    return emu_->subscribe(id_, publisher_address);
}

void EmulatedBackend::overlay_unsubscribe(const std::string& publisher_address) {
    emu_->unsubscribe(id_, publisher_address);
}

void EmulatedBackend::overlay_publish(const Bytes& payload) {
    emu_->publish(id_, payload);
}

bool EmulatedBackend::overlay_send(const std::string& address, Bytes payload) {
    return emu_->send_unicast(id_, address, std::move(payload));
}

void EmulatedBackend::on_wired(std::function<void(const Bytes&)> handler) {
    emu_->set_wired_rx(id_, std::move(handler));
}

void EmulatedBackend::set_wired_address(const std::string& dotted) {
    emu_->set_address(id_, dotted);
}

double EmulatedBackend::now_ms() { return emu_->clock().now_ms(); }

uint64_t EmulatedBackend::schedule(double delay_ms, std::function<void()> fn) {
    return emu_->clock().schedule_in(delay_ms, std::move(fn));
}

void EmulatedBackend::cancel_timer(uint64_t id) { emu_->clock().cancel(id); }

void EmulatedBackend::record_event(const std::string& kind, const ApId& peer,
                                   nlohmann::json detail) {
    emu_->record({emu_->clock().now_ms(), kind, id_, peer, std::move(detail)});
}

ChannelId EmulatedBackend::rf_channel() { return emu_->channel_of(id_); }

void EmulatedBackend::set_rf_channel(ChannelId channel) {
    emu_->set_channel(id_, channel);
}

std::vector<ChannelId> EmulatedBackend::channels() {
    return emu_->topology().channels;
}

long EmulatedBackend::network_load(int type) {
    const ApSpec* spec = emu_->topology().find(id_);
    if (type == 1) return spec->load_stas;
    if (type == 2) return spec->tx_bytes;
    throw std::invalid_argument("unknown network load type " + std::to_string(type));
}

std::vector<ClientInfo> EmulatedBackend::client_info() {
    const ApSpec* spec = emu_->topology().find(id_);
    std::vector<ClientInfo> out;
    for (long i = 0; i < spec->load_stas; ++i) {
        char mac[18];
        std::snprintf(mac, sizeof mac, "02:00:00:00:%02lx:%02lx", (i >> 8) & 0xff,
                      i & 0xff);
        out.push_back({mac, 30.0});
    }
    return out;
}

LinkStats EmulatedBackend::rx_stats(const std::string&) {
    ++calls_["rx_stats"];
    return {};
}

LinkStats EmulatedBackend::tx_stats(const std::string&) {
    ++calls_["tx_stats"];
    return {};
}

void EmulatedBackend::inject_raw_frame(const Bytes&) { ++calls_["inject_raw_frame"]; }

void EmulatedBackend::start_vap(const std::string&) { ++calls_["start_vap"]; }

void EmulatedBackend::set_tx_power(int dbm) {
    ++calls_["set_tx_power"];
    tx_power_dbm_ = dbm;
}

int EmulatedBackend::tx_power() { return tx_power_dbm_; }

void EmulatedBackend::set_channel_width(int mhz) {
    ++calls_["set_channel_width"];
    width_mhz_ = mhz;
}

int EmulatedBackend::channel_width() { return width_mhz_; }

} // namespace resfi
