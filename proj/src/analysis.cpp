#include "resfi/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "resfi/frames.hpp"
#include "resfi/ie.hpp"

namespace resfi {

namespace {

void check_params(const OverheadParams& p) {
    if (p.channel_count < 1.0)
        throw std::invalid_argument("overhead model: channel_count must be >= 1");
    if (p.neighbor_count < 0.0)
        throw std::invalid_argument("overhead model: neighbor_count must be >= 0");
    if (p.t_beacon_ie_s < 0.0 || p.r_beacon_hz < 0.0 || p.t_scan_s < 0.0 ||
        p.t_preq_s < 0.0 || p.t_prep_s < 0.0)
        throw std::invalid_argument("overhead model: times and rates must be >= 0");
    if (p.period_s <= 0.0)
        throw std::invalid_argument("overhead model: period_s must be > 0");
}

} // namespace

BandProfile BandProfile::band2g4() {
    return {Band::Band2g4, kMgmtBitrate2g4Bps, kDensity2g4,
            double(kChannelCount2g4)};
}

BandProfile BandProfile::band5g() {
    return {Band::Band5g, kMgmtBitrate5gBps, kDensity5g,
            double(kChannelCount5g)};
}

OverheadParams BandProfile::params(double neighbor_count, double period_s,
                                   double t_scan_s) const {
    OverheadParams p;
    p.channel_count = channel_count;
    p.neighbor_count = neighbor_count;
    p.t_beacon_ie_s = frame_airtime_s(kBeaconStuffingOctets, mgmt_bitrate_bps);
    p.r_beacon_hz = kBeaconRateHz;
    p.t_scan_s = t_scan_s;
    p.t_preq_s = frame_airtime_s(kProbeRequestOctets, mgmt_bitrate_bps);
    p.t_prep_s = frame_airtime_s(kProbeResponseOctets + double(kSmallIeOctets),
                                 mgmt_bitrate_bps);
    p.period_s = period_s;
    return p;
}

double frame_airtime_s(double size_octets, double bitrate_bps) {
    if (size_octets < 0.0)
        throw std::invalid_argument("frame_airtime_s: negative frame size");
    if (bitrate_bps <= 0.0)
        throw std::invalid_argument("frame_airtime_s: bitrate must be > 0");
    return size_octets * 8.0 / bitrate_bps;
}

double overhead_rxipp(const OverheadParams& p) {
    check_params(p);
    double beacons = p.neighbor_count * p.t_beacon_ie_s * p.r_beacon_hz /
                     p.channel_count;
    double sweeps =
        std::max(p.neighbor_count - 1.0, 0.0) * p.t_scan_s / p.period_s;
    return beacons + sweeps;
}

double rotation_cost_s(const OverheadParams& p) {
    check_params(p);
    double n1 = std::max(p.neighbor_count - 1.0, 0.0);
    double n2 = std::max(p.neighbor_count - 2.0, 0.0);
    double handshake = p.t_preq_s + p.t_prep_s;
    return n1 * handshake + n1 * p.t_scan_s +
           n1 * n2 * handshake / p.channel_count;
}

double overhead_resfi(const OverheadParams& p) {
    return rotation_cost_s(p) / p.period_s;
}

double min_period_for_overhead(const OverheadParams& p, double max_overhead) {
    if (max_overhead <= 0.0)
        throw std::invalid_argument(
            "min_period_for_overhead: target fraction must be > 0");
    return rotation_cost_s(p) / max_overhead;
}

std::vector<CurveRow> airtime_curves(const std::vector<BandProfile>& bands,
                                     const std::vector<double>& periods_s,
                                     const std::vector<double>& n_values,
                                     double t_scan_s) {
    std::vector<CurveRow> rows;
    rows.reserve(bands.size() * periods_s.size() * n_values.size());
    for (const auto& band : bands) {
        for (double period : periods_s) {
            for (double n : n_values) {
                auto p = band.params(n, period, t_scan_s);
                CurveRow row;
                row.band = band.band;
                row.n = n;
                row.period_s = period;
                row.airtime_resfi =
                    std::clamp(1.0 - overhead_resfi(p), 0.0, 1.0);
                row.airtime_rxipp =
                    std::clamp(1.0 - overhead_rxipp(p), 0.0, 1.0);
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void write_curves_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
    out << "band,N,period_s,airtime_resfi,airtime_rxipp\n";
    char buf[160];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g\n",
                      to_string(row.band), row.n, row.period_s,
                      row.airtime_resfi, row.airtime_rxipp);
        out << buf;
    }
}

OverheadParams params_from_json(const nlohmann::json& j, OverheadParams base) {
    if (!j.is_object())
        throw std::invalid_argument("overhead params: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number())
            throw std::invalid_argument("overhead params: field '" + key +
                                        "' must be a number");
        double v = value.get<double>();
        if (key == "channel_count")
            base.channel_count = v;
        else if (key == "neighbor_count")
            base.neighbor_count = v;
        else if (key == "t_beacon_ie_s")
            base.t_beacon_ie_s = v;
        else if (key == "r_beacon_hz")
            base.r_beacon_hz = v;
        else if (key == "t_scan_s")
            base.t_scan_s = v;
        else if (key == "t_preq_s")
            base.t_preq_s = v;
        else if (key == "t_prep_s")
            base.t_prep_s = v;
        else if (key == "period_s")
            base.period_s = v;
        else
            throw std::invalid_argument("overhead params: unknown field '" +
                                        key + "'");
    }
    return base;
}

} // namespace resfi
