#ifndef RESFI_MESSAGE_HPP
#define RESFI_MESSAGE_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "resfi/bytes.hpp"
#include "resfi/topology.hpp"

namespace resfi {

enum class MsgType { Data, Kcm };

const char* to_string(MsgType type);

// One wired control message.  `sender`/`seq` describe the current hop;
// `origin`/`oseq` survive forwarding so receivers can deduplicate flooded
// copies that traveled different paths.  The body is always sealed (group
// key of the hop sender; unicast payloads carry an inner public-key layer).
struct ControlMessage {
    ApId sender;
    uint64_t seq = 0;
    MsgType type = MsgType::Data;
    int ttl = 1;
    std::string ns;
    ApId origin;
    uint64_t oseq = 0;
    bool unicast = false;
    Bytes body;      // sealed octets
    Bytes signature; // over signing_input()
};

// Canonical byte string the signature covers: every header field plus the
// sealed body, so no field can be swapped after signing.
Bytes signing_input(const ControlMessage& msg);

// Wire form: 4-octet big-endian length, then a JSON envelope
// {sender, seq, type, ttl, ns, origin, oseq, uni, body_b64, sig_b64}.
Bytes encode_envelope(const ControlMessage& msg);
std::optional<ControlMessage> decode_envelope(ByteView raw);

} // namespace resfi

#endif
