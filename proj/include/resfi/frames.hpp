#ifndef RESFI_FRAMES_HPP
#define RESFI_FRAMES_HPP

namespace resfi {

// Management-frame accounting shared by the emulator and the overhead
// model.  Airtime is size*8/bitrate with no preamble term; the base sizes
// below exclude any vendor element, which is added per frame where present.
inline constexpr double kProbeRequestOctets = 64.0;
inline constexpr double kProbeResponseOctets = 212.0;

// Payload cost of stuffing the full discovery element into beacons
// (element total minus the 6-octet header already part of the beacon IE
// budget), as used by the beacon-based baseline.
inline constexpr double kBeaconStuffingOctets = 209.0;
inline constexpr double kBeaconRateHz = 10.0;

// Single-channel active scan dwell; measured systems ranged up to ~100 ms.
inline constexpr double kDefaultDwellMs = 30.0;
// Cost of a full passive sweep, for comparison runs; active scanning is the
// normal path.
inline constexpr double kPassiveFullScanMs = 6300.0;

// Management bitrates and observed mean neighborhood sizes per band.
inline constexpr double kMgmtBitrate2g4Bps = 1e6;
inline constexpr double kMgmtBitrate5gBps = 6e6;
inline constexpr double kDensity2g4 = 16.8;
inline constexpr double kDensity5g = 5.1;
inline constexpr int kChannelCount2g4 = 3;
inline constexpr int kChannelCount5g = 19;

} // namespace resfi

#endif
