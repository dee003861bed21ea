#include "resfi/ie.hpp"

#include <cstdio>
#include <stdexcept>

namespace resfi {

namespace {

constexpr size_t kHeaderOctets = 6;
constexpr size_t kKeyOffset = kHeaderOctets;
constexpr size_t kAddressOffset = kKeyOffset + crypto::kGroupKeyOctets;
constexpr size_t kPubKeyOffset = kAddressOffset + kAddressFieldOctets;

bool parse_quad(const std::string& s, unsigned parts[4]) {
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%u.%u.%u.%u%n", &parts[0], &parts[1], &parts[2],
                    &parts[3], &consumed) != 4)
        return false;
    if (size_t(consumed) != s.size()) return false;
    for (int i = 0; i < 4; ++i)
        if (parts[i] > 255) return false;
    return true;
}

} // namespace

std::string format_address_fixed(const std::string& dotted) {
    unsigned parts[4];
    if (!parse_quad(dotted, parts))
        throw std::invalid_argument("not a dotted-quad address: " + dotted);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03u.%03u.%03u.%03u", parts[0], parts[1], parts[2],
                  parts[3]);
    return std::string(buf);
}

std::string strip_address_padding(const std::string& fixed) {
    unsigned parts[4];
    if (!parse_quad(fixed, parts))
        throw std::invalid_argument("not a dotted-quad address: " + fixed);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", parts[0], parts[1], parts[2], parts[3]);
    return std::string(buf);
}

ResFiIe make_big_ie(const crypto::GroupKey& gk, const std::string& dotted_address,
                    Bytes public_key_der) {
    ResFiIe ie;
    ie.variant = ResFiIe::Variant::Big;
    ie.group_key = gk;
    ie.wired_address = format_address_fixed(dotted_address);
    ie.public_key_der = std::move(public_key_der);
    return ie;
}

ResFiIe make_small_ie(const crypto::GroupKey& gk) {
    ResFiIe ie;
    ie.variant = ResFiIe::Variant::Small;
    ie.group_key = gk;
    return ie;
}

Bytes encode_ie(const ResFiIe& ie, const VendorId& vendor) {
    const bool big = ie.variant == ResFiIe::Variant::Big;
    if (big) {
        unsigned parts[4];
        if (ie.wired_address.size() != kAddressFieldOctets ||
            !parse_quad(ie.wired_address, parts))
            throw std::invalid_argument("wired address must be the 15-octet fixed form");
        if (ie.public_key_der.size() != crypto::kPublicKeyDerOctets)
            throw std::invalid_argument("public key DER must be 162 octets");
    } else {
        if (!ie.wired_address.empty() || !ie.public_key_der.empty())
            throw std::invalid_argument("short element carries only the group credential");
    }

    const size_t total = big ? kBigIeOctets : kSmallIeOctets;
    Bytes out(total);
    out[0] = kIeElementId;
    out[1] = uint8_t(total - 2); // octets after the length field
    out[2] = vendor.oui[0];
    out[3] = vendor.oui[1];
    out[4] = vendor.oui[2];
    out[5] = vendor.type;
    Bytes material = ie.group_key.serialize();
    std::copy(material.begin(), material.end(), out.begin() + kKeyOffset);
    if (big) {
        std::copy(ie.wired_address.begin(), ie.wired_address.end(),
                  out.begin() + kAddressOffset);
        std::copy(ie.public_key_der.begin(), ie.public_key_der.end(),
                  out.begin() + kPubKeyOffset);
    }
    return out;
}

std::optional<ResFiIe> decode_ie(ByteView raw, const VendorId& vendor) {
    if (raw.size() != kBigIeOctets && raw.size() != kSmallIeOctets) return std::nullopt;
    if (raw[0] != kIeElementId) return std::nullopt;
    if (raw[1] != raw.size() - 2) return std::nullopt;
    if (raw[2] != vendor.oui[0] || raw[3] != vendor.oui[1] || raw[4] != vendor.oui[2])
        return std::nullopt;
    if (raw[5] != vendor.type) return std::nullopt;

    auto gk = crypto::GroupKey::deserialize(
        raw.subspan(kKeyOffset, crypto::kGroupKeyOctets));
    if (!gk) return std::nullopt;

    ResFiIe ie;
    ie.group_key = *gk;
    if (raw.size() == kSmallIeOctets) {
        ie.variant = ResFiIe::Variant::Small;
        return ie;
    }

    ie.variant = ResFiIe::Variant::Big;
    ie.wired_address.assign(raw.begin() + kAddressOffset,
                            raw.begin() + kAddressOffset + kAddressFieldOctets);
    unsigned parts[4];
    if (!parse_quad(ie.wired_address, parts)) return std::nullopt;
    ie.public_key_der.assign(raw.begin() + kPubKeyOffset, raw.end());
    return ie;
}

} // namespace resfi
