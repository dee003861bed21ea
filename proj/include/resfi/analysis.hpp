#ifndef RESFI_ANALYSIS_HPP
#define RESFI_ANALYSIS_HPP

#include <iosfwd>
#include <vector>

#include "json.hpp"

#include "resfi/topology.hpp"

namespace resfi {

// Closed-form airtime overhead of credential dissemination, comparing the
// beacon-stuffing baseline against probe-based exchange with periodic key
// rotation.  All times in seconds; neighbor counts may be fractional
// (band-level density averages).

struct OverheadParams {
    double channel_count = 3.0;  // C
    double neighbor_count = 0.0; // N
    double t_beacon_ie_s = 0.0;  // extra beacon airtime carrying credentials
    double r_beacon_hz = 10.0;
    double t_scan_s = 0.030; // one single-channel active scan
    double t_preq_s = 0.0;   // probe request airtime
    double t_prep_s = 0.0;   // probe response airtime (credential included)
    double period_s = 60.0;  // reconfiguration / key change period
};

struct BandProfile {
    Band band = Band::Band2g4;
    double mgmt_bitrate_bps = 0.0;
    double default_density = 0.0; // average neighbors per AP
    double channel_count = 0.0;

    static BandProfile band2g4();
    static BandProfile band5g();

    // Overhead parameters for this band at a given density and period:
    // frame airtimes follow from the band's management bitrate.
    OverheadParams params(double neighbor_count, double period_s,
                          double t_scan_s = 0.030) const;
};

// size × 8 / bitrate, no preamble term.  Throws on negative size or
// nonpositive bitrate.
double frame_airtime_s(double size_octets, double bitrate_bps);

// Baseline: every AP stuffs credentials into beacons (heard on 1/C of the
// air), and each reconfiguration costs every neighbor one full sweep.  The
// beacon term is a steady rate; the scan term is amortized over the period.
double overhead_rxipp(const OverheadParams& p);

// Probe-based exchange: one rotation costs the neighborhood one probe
// handshake and one scan each, plus cross-traffic between the neighbors
// sharing the channel.  Amortized over the period.
double overhead_resfi(const OverheadParams& p);

// The un-amortized cost of a single rotation (overhead_resfi's numerator).
double rotation_cost_s(const OverheadParams& p);

// Smallest key change period keeping overhead_resfi at or below the given
// fraction.  Throws if the fraction is nonpositive.
double min_period_for_overhead(const OverheadParams& p, double max_overhead);

struct CurveRow {
    Band band = Band::Band2g4;
    double n = 0.0;
    double period_s = 0.0;
    double airtime_resfi = 1.0; // 1 − overhead, clamped to [0, 1]
    double airtime_rxipp = 1.0;
};

std::vector<CurveRow> airtime_curves(const std::vector<BandProfile>& bands,
                                     const std::vector<double>& periods_s,
                                     const std::vector<double>& n_values,
                                     double t_scan_s = 0.030);

// Columns: band,N,period_s,airtime_resfi,airtime_rxipp.
void write_curves_csv(std::ostream& out, const std::vector<CurveRow>& rows);

// Overrides any OverheadParams field by its struct member name.  Unknown
// keys are rejected.
OverheadParams params_from_json(const nlohmann::json& j,
                                OverheadParams base = OverheadParams());

} // namespace resfi

#endif
