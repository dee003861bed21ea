#include "resfi/runner.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "resfi/errors.hpp"
#include "resfi/southbound.hpp"

namespace resfi {

namespace {

nlohmann::json counters_to_json(const AgentCounters& c) {
    return {{"sent", c.sent},
            {"received", c.received},
            {"forwarded", c.forwarded},
            {"delivered", c.delivered},
            {"drop_bad_signature", c.drop_bad_signature},
            {"drop_wrong_key", c.drop_wrong_key},
            {"drop_replay", c.drop_replay},
            {"drop_unknown_sender", c.drop_unknown_sender},
            {"drop_malformed", c.drop_malformed},
            {"drop_unroutable", c.drop_unroutable},
            {"drop_duplicate", c.drop_duplicate},
            {"ie_rejected", c.ie_rejected},
            {"kcm_rescans", c.kcm_rescans},
            {"kcm_retries", c.kcm_retries},
            {"deferred", c.deferred},
            {"expired_neighbors", c.expired_neighbors}};
}

// One live emulation: the emulator, an agent per AP, and whichever
// applications the run enables.  Construction wires everything and schedules
// the staggered boots; the caller advances the clock.
struct Session {
    const ScenarioConfig& config;
    double duration_ms;
    bool channel_app;
    bool cluster_app;
    Rng master;
    Emulator emu;
    std::vector<std::unique_ptr<EmulatedBackend>> backends;
    std::vector<std::unique_ptr<ResFiAgent>> agents;
    std::vector<std::unique_ptr<ChannelSelectionApp>> channel_apps;
    std::vector<std::unique_ptr<DcaApp>> cluster_apps;

    Session(const ScenarioConfig& cfg, const RunOptions& opt,
            bool schedule_rotations, double kcmi_override_ms = 0.0)
        : config(cfg),
          duration_ms(opt.duration_ms.value_or(cfg.duration_ms)),
          channel_app(opt.channel_app.value_or(cfg.run_channel_app)),
          cluster_app(opt.cluster_app.value_or(cfg.run_cluster_app)),
          master(opt.seed.value_or(cfg.seed)),
          emu(cfg.topology, cfg.wireless, master.fork("emu")) {
        for (const auto& [id, model] : cfg.wired_models)
            emu.set_wired_model(id, model);

        double kcmi = kcmi_override_ms > 0 ? kcmi_override_ms : cfg.kcmi_ms;
        for (const auto& ap : emu.topology().aps) {
            backends.push_back(std::make_unique<EmulatedBackend>(emu, ap.id));
            AgentConfig acfg;
            acfg.id = ap.id;
            acfg.ssid = ap.ssid;
            acfg.channel = ap.channel;
            acfg.key_seed = ap.key_seed;
            acfg.kcmi_ms = kcmi;
            acfg.jitter_fraction = cfg.jitter_fraction;
            agents.push_back(std::make_unique<ResFiAgent>(
                acfg, *backends.back(), master.fork("agent:" + ap.id)));
            if (channel_app)
                channel_apps.push_back(std::make_unique<ChannelSelectionApp>(
                    *agents.back(), master.fork("chsel:" + ap.id),
                    cfg.channel_opts));
            if (cluster_app)
                cluster_apps.push_back(std::make_unique<DcaApp>(
                    *agents.back(), cfg.cluster_opts));
        }

        for (size_t i = 0; i < agents.size(); ++i) {
            double at = cfg.boot_start_ms + double(i) * cfg.boot_stagger_ms;
            emu.clock().schedule_at(at, [this, i, schedule_rotations] {
                agents[i]->boot();
                if (schedule_rotations)
                    agents[i]->schedule_key_changes(config.kcmi_ms,
                                                    config.jitter_fraction);
                if (channel_app) channel_apps[i]->start();
                if (cluster_app) cluster_apps[i]->start();
            });
        }
    }

    double boot_end_ms() const {
        return config.boot_start_ms +
               double(agents.empty() ? 0 : agents.size() - 1) *
                   config.boot_stagger_ms;
    }

    void check_wired_identity() const {
        const auto& c = emu.counters();
        uint64_t accounted = c.wired_delivered + c.wired_dropped_unsubscribed +
                             c.wired_dropped_unroutable + emu.wired_in_flight();
        if (c.wired_sent != accounted)
            throw InvariantError(
                "wired accounting broken: sent=" + std::to_string(c.wired_sent) +
                " accounted=" + std::to_string(accounted));
    }

    RunReport report(bool keep_trace) {
        check_wired_identity();
        RunReport rep;
        rep.virtual_ms = emu.clock().now_ms();
        rep.wire = emu.counters();
        rep.wired_in_flight = emu.wired_in_flight();

        std::map<ApId, long> scans;
        for (const auto& rec : emu.trace())
            if (rec.kind == "scan_done") ++scans[rec.src];

        for (size_t i = 0; i < agents.size(); ++i) {
            const auto& agent = *agents[i];
            ApReport row;
            row.counters = agent.counters();
            row.epoch = agent.epoch();
            row.channel = emu.channel_of(agent.identity().ap_id);
            row.deaf_ms = emu.deaf_ms(agent.identity().ap_id);
            row.scans = scans[agent.identity().ap_id];
            row.neighbors = agent.get_neighbors();
            rep.aps[agent.identity().ap_id] = std::move(row);

            if (channel_app)
                rep.channel_map[agent.identity().ap_id] =
                    channel_apps[i]->current_channel();
            if (cluster_app)
                rep.cluster_map[agent.identity().ap_id] = cluster_apps[i]->state();
        }
        if (keep_trace) rep.trace = emu.trace();
        return rep;
    }
};

} // namespace

nlohmann::json RunReport::to_json() const {
    nlohmann::json japs = nlohmann::json::object();
    for (const auto& [id, row] : aps) {
        japs[id] = {{"counters", counters_to_json(row.counters)},
                    {"epoch", row.epoch},
                    {"channel", row.channel},
                    {"deaf_ms", row.deaf_ms},
                    {"scans", row.scans},
                    {"neighbors", row.neighbors}};
    }
    nlohmann::json doc{
        {"virtual_ms", virtual_ms},
        {"wire",
         {{"wired_sent", wire.wired_sent},
          {"wired_delivered", wire.wired_delivered},
          {"wired_dropped_unsubscribed", wire.wired_dropped_unsubscribed},
          {"wired_dropped_unroutable", wire.wired_dropped_unroutable},
          {"in_flight", wired_in_flight},
          {"probes_sent", wire.probes_sent},
          {"probe_responses", wire.probe_responses},
          {"probe_responses_lost", wire.probe_responses_lost},
          {"scans_single", wire.scans_single},
          {"scans_full", wire.scans_full}}},
        {"aps", std::move(japs)}};
    if (!channel_map.empty()) {
        nlohmann::json jch = nlohmann::json::object();
        for (const auto& [id, ch] : channel_map) jch[id] = ch;
        doc["channels"] = std::move(jch);
    }
    if (!cluster_map.empty()) {
        nlohmann::json jcl = nlohmann::json::object();
        for (const auto& [id, state] : cluster_map)
            jcl[id] = {{"role", to_string(state.role)}, {"head", state.head}};
        doc["clusters"] = std::move(jcl);
    }
    return doc;
}

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    Session session(config, options, config.rotate_keys);
    session.emu.clock().run_until(session.duration_ms);
    return session.report(options.keep_trace);
}

nlohmann::json LatencyReport::to_json() const {
    return {{"rotations", rotations}, {"samples", samples_ms.size()},
            {"mean_ms", mean_ms},     {"p50_ms", p50_ms},
            {"p90_ms", p90_ms},       {"p95_ms", p95_ms},
            {"min_ms", min_ms},       {"max_ms", max_ms}};
}

LatencyReport latency_experiment(const ScenarioConfig& config,
                                 const RunOptions& options, int rounds) {
    if (rounds < 1) throw ConfigError("latency experiment needs rounds >= 1");

    const double gap_ms =
        std::max(1000.0, 4.0 * config.wireless.dwell_ms + 500.0);
    const size_t n = config.topology.aps.size();
    // Hold expiry (2 * KCMI) beyond one full rotation cycle.
    const double kcmi_floor = double(n) * gap_ms;

    RunOptions opt = options;
    opt.channel_app = false;
    opt.cluster_app = false;
    Session session(config, opt, false,
                    std::max(config.kcmi_ms, kcmi_floor));

    double t = session.boot_end_ms() + 500.0;
    int scheduled = 0;
    for (int r = 0; r < rounds; ++r) {
        for (auto& agent : session.agents) {
            session.emu.clock().schedule_at(
                t, [&a = *agent] { a.perform_key_change(); });
            t += gap_ms;
            ++scheduled;
        }
    }
    session.emu.clock().run_until(t + 4.0 * config.wireless.dwell_ms + 500.0);
    session.check_wired_identity();

    // Pair every install with the rotation that caused it: the latest key
    // change by that sender at or before the install time.
    std::map<ApId, std::vector<double>> changes;
    for (const auto& rec : session.emu.trace())
        if (rec.kind == "key_change") changes[rec.src].push_back(rec.t_ms);

    LatencyReport rep;
    rep.rotations = scheduled;
    for (const auto& rec : session.emu.trace()) {
        if (rec.kind != "key_installed") continue;
        auto it = changes.find(rec.dst);
        if (it == changes.end()) continue;
        const auto& times = it->second;
        auto after = std::upper_bound(times.begin(), times.end(), rec.t_ms);
        if (after == times.begin()) continue;
        rep.samples_ms.push_back(rec.t_ms - *std::prev(after));
    }
    std::sort(rep.samples_ms.begin(), rep.samples_ms.end());
    if (!rep.samples_ms.empty()) {
        const auto& s = rep.samples_ms;
        rep.mean_ms = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
        auto rank = [&](double q) {
            size_t i = size_t(std::max(1.0, std::ceil(q * double(s.size()))));
            return s[std::min(i, s.size()) - 1];
        };
        rep.p50_ms = rank(0.50);
        rep.p90_ms = rank(0.90);
        rep.p95_ms = rank(0.95);
        rep.min_ms = s.front();
        rep.max_ms = s.back();
    }
    return rep;
}

} // namespace resfi
