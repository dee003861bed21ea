#ifndef RESFI_IE_HPP
#define RESFI_IE_HPP

#include <array>
#include <optional>
#include <string>

#include "resfi/bytes.hpp"
#include "resfi/crypto.hpp"

namespace resfi {

// Vendor-specific information element carried in probe traffic.  Two fixed
// shapes exist: the full bootstrap element (group credential + wired address
// + public key) and the short rotation element (group credential only).
//
// Octet layout:
//   [0] element id (221)  [1] payload length  [2..4] OUI  [5] vendor type
//   [6..37]   group key ‖ IV
//   [38..52]  zero-padded dotted-quad wired address   (full shape only)
//   [53..214] public key DER                          (full shape only)
inline constexpr uint8_t kIeElementId = 221;
inline constexpr size_t kBigIeOctets = 215;
inline constexpr size_t kSmallIeOctets = 38;
inline constexpr size_t kAddressFieldOctets = 15;

// The OUI/type pair marking our elements.  Deployments may reassign it; the
// default is the experimental all-zero OUI.
struct VendorId {
    std::array<uint8_t, 3> oui{0x00, 0x00, 0x00};
    uint8_t type = 0x01;

    bool operator==(const VendorId&) const = default;
};

struct ResFiIe {
    enum class Variant { Big, Small };

    Variant variant = Variant::Small;
    crypto::GroupKey group_key;
    std::string wired_address; // fixed-width form, Big only
    Bytes public_key_der;      // Big only

    bool operator==(const ResFiIe& other) const {
        return variant == other.variant && group_key.same_material(other.group_key) &&
               wired_address == other.wired_address &&
               public_key_der == other.public_key_der;
    }
};

// "10.0.0.7" -> "010.000.000.007".  Throws std::invalid_argument if the
// input is not a dotted quad.
std::string format_address_fixed(const std::string& dotted);

// Inverse of format_address_fixed ("010.000.000.007" -> "10.0.0.7").
std::string strip_address_padding(const std::string& fixed);

ResFiIe make_big_ie(const crypto::GroupKey& gk, const std::string& dotted_address,
                    Bytes public_key_der);
ResFiIe make_small_ie(const crypto::GroupKey& gk);

// Encoding asserts the shape invariants and throws std::invalid_argument on
// violation; decoding treats any deviation as "not ours" and returns nullopt.
Bytes encode_ie(const ResFiIe& ie, const VendorId& vendor = {});
std::optional<ResFiIe> decode_ie(ByteView raw, const VendorId& vendor = {});

} // namespace resfi

#endif
