#include "resfi/message.hpp"

#include "json.hpp"

namespace resfi {

const char* to_string(MsgType type) {
    return type == MsgType::Kcm ? "kcm" : "data";
}

Bytes signing_input(const ControlMessage& msg) {
    std::string header;
    header += "rsfi1\n";
    header += msg.sender;
    header += '\n';
    header += std::to_string(msg.seq);
    header += '\n';
    header += to_string(msg.type);
    header += '\n';
    header += std::to_string(msg.ttl);
    header += '\n';
    header += msg.ns;
    header += '\n';
    header += msg.origin;
    header += '\n';
    header += std::to_string(msg.oseq);
    header += '\n';
    header += msg.unicast ? "u\n" : "b\n";
    Bytes out = to_bytes(header);
    out.insert(out.end(), msg.body.begin(), msg.body.end());
    return out;
}

Bytes encode_envelope(const ControlMessage& msg) {
    nlohmann::json env{{"sender", msg.sender},
                       {"seq", msg.seq},
                       {"type", to_string(msg.type)},
                       {"ttl", msg.ttl},
                       {"ns", msg.ns},
                       {"origin", msg.origin},
                       {"oseq", msg.oseq},
                       {"uni", msg.unicast},
                       {"body_b64", base64_encode(msg.body)},
                       {"sig_b64", base64_encode(msg.signature)}};
    std::string text = env.dump();
    Bytes out;
    out.reserve(4 + text.size());
    uint32_t n = uint32_t(text.size());
    out.push_back(uint8_t(n >> 24));
    out.push_back(uint8_t(n >> 16));
    out.push_back(uint8_t(n >> 8));
    out.push_back(uint8_t(n));
    out.insert(out.end(), text.begin(), text.end());
    return out;
}

std::optional<ControlMessage> decode_envelope(ByteView raw) {
    if (raw.size() < 4) return std::nullopt;
    uint32_t n = (uint32_t(raw[0]) << 24) | (uint32_t(raw[1]) << 16) |
                 (uint32_t(raw[2]) << 8) | uint32_t(raw[3]);
    if (raw.size() != size_t(n) + 4) return std::nullopt;

    nlohmann::json env =
        nlohmann::json::parse(raw.begin() + 4, raw.end(), nullptr, false);
    if (env.is_discarded() || !env.is_object()) return std::nullopt;

    auto str = [&](const char* key) -> std::optional<std::string> {
        auto it = env.find(key);
        if (it == env.end() || !it->is_string()) return std::nullopt;
        return it->get<std::string>();
    };
    auto num = [&](const char* key) -> std::optional<uint64_t> {
        auto it = env.find(key);
        if (it == env.end() || !it->is_number_unsigned()) return std::nullopt;
        return it->get<uint64_t>();
    };

    ControlMessage msg;
    auto sender = str("sender");
    auto seq = num("seq");
    auto type = str("type");
    auto ns = str("ns");
    auto origin = str("origin");
    auto oseq = num("oseq");
    auto body = str("body_b64");
    auto sig = str("sig_b64");
    auto ttl_it = env.find("ttl");
    auto uni_it = env.find("uni");
    if (!sender || !seq || !type || !ns || !origin || !oseq || !body || !sig)
        return std::nullopt;
    if (ttl_it == env.end() || !ttl_it->is_number_integer()) return std::nullopt;
    if (uni_it == env.end() || !uni_it->is_boolean()) return std::nullopt;

    msg.sender = *sender;
    msg.seq = *seq;
    if (*type == "data") msg.type = MsgType::Data;
    else if (*type == "kcm") msg.type = MsgType::Kcm;
    else return std::nullopt;
    msg.ttl = ttl_it->get<int>();
    if (msg.ttl < 1) return std::nullopt;
    msg.ns = *ns;
    msg.origin = *origin;
    msg.oseq = *oseq;
    msg.unicast = uni_it->get<bool>();

    auto body_bytes = base64_decode(*body);
    auto sig_bytes = base64_decode(*sig);
    if (!body_bytes || !sig_bytes) return std::nullopt;
    msg.body = std::move(*body_bytes);
    msg.signature = std::move(*sig_bytes);
    return msg;
}

} // namespace resfi
