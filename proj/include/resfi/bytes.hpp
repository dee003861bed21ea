#ifndef RESFI_BYTES_HPP
#define RESFI_BYTES_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace resfi {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

std::string base64_encode(ByteView data);
std::optional<Bytes> base64_decode(std::string_view text);

std::string hex_encode(ByteView data);

} // namespace resfi

#endif
