#include "resfi/bytes.hpp"

#include <array>

namespace resfi {

namespace {

constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

// -1: invalid, -2: padding, -3: skip (whitespace)
constexpr std::array<int8_t, 256> build_reverse() {
    std::array<int8_t, 256> rev{};
    for (auto& v : rev) v = -1;
    for (int i = 0; i < 64; ++i) rev[static_cast<uint8_t>(kAlphabet[i])] = static_cast<int8_t>(i);
    rev[static_cast<uint8_t>('=')] = -2;
    rev[static_cast<uint8_t>('\n')] = -3;
    rev[static_cast<uint8_t>('\r')] = -3;
    return rev;
}

constexpr auto kReverse = build_reverse();

} // namespace

std::string base64_encode(ByteView data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        uint32_t v = (uint32_t(data[i]) << 16) | (uint32_t(data[i + 1]) << 8) | data[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    size_t rem = data.size() - i;
    if (rem == 1) {
        uint32_t v = uint32_t(data[i]) << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rem == 2) {
        uint32_t v = (uint32_t(data[i]) << 16) | (uint32_t(data[i + 1]) << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::optional<Bytes> base64_decode(std::string_view text) {
    Bytes out;
    out.reserve(text.size() / 4 * 3);
    uint32_t acc = 0;
    int acc_bits = 0;
    bool saw_pad = false;
    for (char c : text) {
        int8_t v = kReverse[static_cast<uint8_t>(c)];
        if (v == -3) continue;
        if (v == -1) return std::nullopt;
        if (v == -2) {
            saw_pad = true;
            continue;
        }
        if (saw_pad) return std::nullopt; // data after '='
        acc = (acc << 6) | uint32_t(v);
        acc_bits += 6;
        if (acc_bits >= 8) {
            acc_bits -= 8;
            out.push_back(uint8_t((acc >> acc_bits) & 0xff));
        }
    }
    // leftover bits must be zero padding only
    if (acc_bits >= 6) return std::nullopt;
    if (acc_bits > 0 && (acc & ((1u << acc_bits) - 1)) != 0) return std::nullopt;
    return out;
}

std::string hex_encode(ByteView data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out += digits[b >> 4];
        out += digits[b & 0xf];
    }
    return out;
}

} // namespace resfi
