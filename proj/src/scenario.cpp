#include "resfi/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "resfi/errors.hpp"
#include "resfi/frames.hpp"

namespace resfi {

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ConfigError(origin + ": " + what);
}

const nlohmann::json* find(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void expect_object(const std::string& origin, const nlohmann::json& j,
                   std::initializer_list<const char*> known) {
    if (!j.is_object()) fail(origin, "expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) fail(origin, "unknown key '" + key + "'");
    }
}

double number(const std::string& origin, const nlohmann::json& obj,
              const char* key, double fallback) {
    const auto* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) fail(origin, std::string("'") + key + "' must be a number");
    return v->get<double>();
}

long integer(const std::string& origin, const nlohmann::json& obj,
             const char* key, long fallback) {
    const auto* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer())
        fail(origin, std::string("'") + key + "' must be an integer");
    return v->get<long>();
}

std::string text(const std::string& origin, const nlohmann::json& obj,
                 const char* key, const std::string& fallback) {
    const auto* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) fail(origin, std::string("'") + key + "' must be a string");
    return v->get<std::string>();
}

bool boolean(const std::string& origin, const nlohmann::json& obj,
             const char* key, bool fallback) {
    const auto* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(origin, std::string("'") + key + "' must be a boolean");
    return v->get<bool>();
}

Band parse_band(const std::string& origin, const std::string& s) {
    if (s == "2.4") return Band::Band2g4;
    if (s == "5") return Band::Band5g;
    fail(origin, "band must be \"2.4\" or \"5\", got \"" + s + "\"");
}

WiredTechnology parse_wired(const std::string& origin, const std::string& s) {
    if (s == "lan") return WiredTechnology::GigabitLan;
    if (s == "cable") return WiredTechnology::Cable;
    if (s == "dsl") return WiredTechnology::Dsl;
    fail(origin, "wired technology must be \"lan\", \"cable\" or \"dsl\", got \"" +
                     s + "\"");
}

std::string auto_address(size_t index) {
    return "10.0." + std::to_string(index / 250) + "." +
           std::to_string(index % 250 + 1);
}

} // namespace

ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::string& origin) {
    expect_object(origin, doc,
                  {"band", "channels", "aps", "links", "density", "wireless",
                   "sim", "kcmi_ms", "jitter_fraction", "rotate_keys", "boot",
                   "apps"});

    ScenarioConfig cfg;

    Band band = parse_band(origin, text(origin, doc, "band", "2.4"));

    std::vector<ChannelId> channels{1, 6, 11};
    if (const auto* j = find(doc, "channels")) {
        if (!j->is_array() || j->empty())
            fail(origin, "'channels' must be a non-empty array");
        channels.clear();
        for (const auto& c : *j) {
            if (!c.is_number_integer())
                fail(origin, "'channels' entries must be integers");
            channels.push_back(c.get<int>());
        }
    }

    const auto* japs = find(doc, "aps");
    if (!japs || !japs->is_array() || japs->empty())
        fail(origin, "'aps' must be a non-empty array");

    std::vector<ApSpec> aps;
    std::set<std::string> addresses;
    for (size_t i = 0; i < japs->size(); ++i) {
        const auto& ja = (*japs)[i];
        std::string where = origin + ": aps[" + std::to_string(i) + "]";
        expect_object(where, ja,
                      {"id", "ssid", "channel", "wired", "wired_latency",
                       "address", "load", "tx_bytes", "key_seed"});

        ApSpec ap;
        ap.id = text(where, ja, "id", "");
        if (ap.id.empty()) fail(where, "'id' is required");
        ap.ssid = text(where, ja, "ssid", ap.id);
        ap.channel =
            int(integer(where, ja, "channel", channels[i % channels.size()]));
        ap.wired = parse_wired(where, text(where, ja, "wired", "lan"));
        ap.address = text(where, ja, "address", "");
        ap.load_stas = integer(where, ja, "load", 1);
        ap.tx_bytes = integer(where, ja, "tx_bytes", 0);
        if (ap.load_stas < 0 || ap.tx_bytes < 0)
            fail(where, "load figures must be >= 0");
        long seed = integer(where, ja, "key_seed", long(100 + i));
        if (seed <= 0) fail(where, "'key_seed' must be positive");
        ap.key_seed = uint64_t(seed);

        if (const auto* jl = find(ja, "wired_latency")) {
            expect_object(where + ".wired_latency", *jl, {"lo_ms", "hi_ms"});
            WiredLinkModel model;
            model.lo_ms = number(where, *jl, "lo_ms", 0.0);
            model.hi_ms = number(where, *jl, "hi_ms", model.lo_ms);
            if (model.lo_ms < 0 || model.hi_ms < model.lo_ms)
                fail(where, "'wired_latency' needs 0 <= lo_ms <= hi_ms");
            cfg.wired_models[ap.id] = model;
        }
        aps.push_back(std::move(ap));
    }
    for (const auto& ap : aps) {
        if (ap.address.empty()) continue;
        if (!addresses.insert(ap.address).second)
            fail(origin, "duplicate address " + ap.address);
    }
    size_t next_auto = 0;
    for (auto& ap : aps) {
        if (!ap.address.empty()) continue;
        do {
            ap.address = auto_address(next_auto++);
        } while (!addresses.insert(ap.address).second);
    }

    // sim comes before links: the density draw is seeded from it.
    double duration = 1000.0;
    uint64_t seed = 1;
    if (const auto* js = find(doc, "sim")) {
        expect_object(origin + ": sim", *js, {"duration_ms", "seed"});
        duration = number(origin, *js, "duration_ms", duration);
        long s = integer(origin, *js, "seed", 1);
        if (s <= 0) fail(origin, "'sim.seed' must be positive");
        seed = uint64_t(s);
    }
    if (duration < 0) fail(origin, "'sim.duration_ms' must be >= 0");
    cfg.duration_ms = duration;
    cfg.seed = seed;

    std::vector<std::pair<ApId, ApId>> links;
    const auto* jlinks = find(doc, "links");
    const auto* jdensity = find(doc, "density");
    if (jlinks && jdensity)
        fail(origin, "give either 'links' or 'density', not both");
    if (jlinks) {
        if (!jlinks->is_array()) fail(origin, "'links' must be an array");
        for (const auto& l : *jlinks) {
            if (!l.is_array() || l.size() != 2 || !l[0].is_string() ||
                !l[1].is_string())
                fail(origin, "'links' entries must be [\"a\", \"b\"] pairs");
            links.emplace_back(l[0].get<std::string>(), l[1].get<std::string>());
        }
    } else if (jdensity) {
        if (!jdensity->is_number())
            fail(origin, "'density' must be a number");
        double density = jdensity->get<double>();
        if (density < 0 || density > 1)
            fail(origin, "'density' must be within [0,1]");
        std::vector<ApId> ids;
        for (const auto& ap : aps) ids.push_back(ap.id);
        Rng rng(seed);
        Rng link_rng = rng.fork("links");
        links = random_links(ids, density, link_rng);
    }

    try {
        cfg.topology = build_topology(std::move(aps), std::move(links),
                                      std::move(channels), band);
    } catch (const ConfigError& e) {
        fail(origin, e.what());
    }

    cfg.wireless.bitrate_bps =
        band == Band::Band2g4 ? kMgmtBitrate2g4Bps : kMgmtBitrate5gBps;
    if (const auto* jw = find(doc, "wireless")) {
        expect_object(origin + ": wireless", *jw,
                      {"bitrate_bps", "dwell_ms", "loss", "per_link_delay_ms"});
        cfg.wireless.bitrate_bps =
            number(origin, *jw, "bitrate_bps", cfg.wireless.bitrate_bps);
        cfg.wireless.dwell_ms = number(origin, *jw, "dwell_ms", kDefaultDwellMs);
        cfg.wireless.loss = number(origin, *jw, "loss", 0.0);
        cfg.wireless.per_link_delay_ms =
            number(origin, *jw, "per_link_delay_ms", 0.0);
    }
    if (cfg.wireless.bitrate_bps <= 0)
        fail(origin, "'wireless.bitrate_bps' must be > 0");
    if (cfg.wireless.dwell_ms <= 0)
        fail(origin, "'wireless.dwell_ms' must be > 0");
    if (cfg.wireless.loss < 0 || cfg.wireless.loss >= 1)
        fail(origin, "'wireless.loss' must be within [0,1)");
    if (cfg.wireless.per_link_delay_ms < 0)
        fail(origin, "'wireless.per_link_delay_ms' must be >= 0");

    cfg.kcmi_ms = number(origin, doc, "kcmi_ms", cfg.kcmi_ms);
    if (cfg.kcmi_ms <= 0) fail(origin, "'kcmi_ms' must be > 0");
    cfg.jitter_fraction =
        number(origin, doc, "jitter_fraction", cfg.jitter_fraction);
    if (cfg.jitter_fraction < 0) fail(origin, "'jitter_fraction' must be >= 0");
    cfg.rotate_keys = boolean(origin, doc, "rotate_keys", cfg.rotate_keys);

    if (const auto* jb = find(doc, "boot")) {
        expect_object(origin + ": boot", *jb, {"start_ms", "stagger_ms"});
        cfg.boot_start_ms = number(origin, *jb, "start_ms", cfg.boot_start_ms);
        cfg.boot_stagger_ms =
            number(origin, *jb, "stagger_ms", cfg.boot_stagger_ms);
        if (cfg.boot_start_ms < 0 || cfg.boot_stagger_ms < 0)
            fail(origin, "boot times must be >= 0");
    }

    if (const auto* japp = find(doc, "apps")) {
        expect_object(origin + ": apps", *japp, {"channel", "cluster"});
        if (const auto* jc = find(*japp, "channel")) {
            std::string where = origin + ": apps.channel";
            expect_object(where, *jc,
                          {"period_ms", "jitter_ms", "margin", "min_dwell_ms"});
            cfg.run_channel_app = true;
            cfg.channel_opts.period_ms =
                number(where, *jc, "period_ms", cfg.channel_opts.period_ms);
            cfg.channel_opts.jitter_ms =
                number(where, *jc, "jitter_ms", cfg.channel_opts.jitter_ms);
            cfg.channel_opts.margin =
                integer(where, *jc, "margin", cfg.channel_opts.margin);
            cfg.channel_opts.min_dwell_ms = number(
                where, *jc, "min_dwell_ms", cfg.channel_opts.min_dwell_ms);
            if (cfg.channel_opts.period_ms <= 0 ||
                cfg.channel_opts.jitter_ms < 0 || cfg.channel_opts.margin < 0)
                fail(where, "needs period_ms > 0, jitter_ms >= 0, margin >= 0");
        }
        if (const auto* jc = find(*japp, "cluster")) {
            std::string where = origin + ": apps.cluster";
            expect_object(where, *jc, {"round_ms"});
            cfg.run_cluster_app = true;
            cfg.cluster_opts.round_ms =
                number(where, *jc, "round_ms", cfg.cluster_opts.round_ms);
            if (cfg.cluster_opts.round_ms <= 0)
                fail(where, "needs round_ms > 0");
        }
    }

    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string body = buf.str();

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        // Report the syntax error with a line/column position.
        size_t line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < body.size(); ++i) {
            if (body[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" +
                          std::to_string(col) + ": " + e.what());
    }
    return parse_scenario(doc, path);
}

} // namespace resfi
