#include "scalesentry/sentinel.hpp"

#include <algorithm>

#include "scalesentry/errors.hpp"

namespace scalesentry {

void validate(const SentinelPolicy& p) {
    if (!(p.threshold > 0.0 && p.threshold < 1.0)) throw ConfigError("sentinel threshold must be in (0, 1)");
    if (!(p.window_s > 0.0)) throw ConfigError("sentinel window must be positive");
    if (!std::is_sorted(p.run_times_s.begin(), p.run_times_s.end()))
        throw ConfigError("sentinel run times must be ascending");
    if (p.max_on_attack < 1 || p.max_on_clear < 1) throw ConfigError("sentinel max replica values must be >= 1");
}

nlohmann::json to_json(const SentinelDecision& d) {
    nlohmann::json redirected = nlohmann::json::array();
    for (const auto& ip : d.redirected_ips) redirected.push_back(ip.to_string());
    nlohmann::json top = nlohmann::json::array();
    for (const auto& r : d.top_attackers)
        top.push_back({{"ip", r.ip.to_string()}, {"score", r.score}, {"abnormal_count", r.abnormal_count}});
    return nlohmann::json{{"t", d.t},
                          {"attack_rate", d.attack_rate},
                          {"f1", d.f1},
                          {"redirected_ips", std::move(redirected)},
                          {"max_replicas_set", d.max_replicas_set},
                          {"model_available", d.model_available},
                          {"top_attackers", std::move(top)}};
}

std::span<const LabeledRecord> window_of(std::span<const LabeledRecord> records, double window_s, double now) {
    const double from = now - window_s;
    auto first = std::upper_bound(records.begin(), records.end(), from,
                                  [](double t, const LabeledRecord& r) { return t < r.t; });
    auto last = std::upper_bound(first, records.end(), now, [](double t, const LabeledRecord& r) { return t < r.t; });
    return {first, last};
}

double attack_rate(std::span<const LabeledRecord> records, double window_s, double now) {
    std::size_t total = 0, scans = 0;
    for (const auto& r : records) {
        if (!(r.t > now - window_s && r.t <= now)) continue;
        ++total;
        if (r.origin == RecordOrigin::access && (r.status == 403 || r.status == 404)) ++scans;
    }
    return total ? static_cast<double>(scans) / static_cast<double>(total) : 0.0;
}

ScriptRun run_script(double now, const SentinelPolicy& policy, SentinelContext ctx) {
    ScriptRun run;
    SentinelDecision& d = run.decision;
    d.t = now;

    auto prepared = preprocess(ctx.access_lines, ctx.error_lines);
    auto& records = prepared.records;
    records.erase(std::upper_bound(records.begin(), records.end(), now,
                                   [](double t, const LabeledRecord& r) { return t < r.t; }),
                  records.end());
    const auto window = window_of(records, policy.window_s, now);

    if (!window.empty()) {
        try {
            auto trained = train(std::span<const LabeledRecord>(records), ctx.forest_params);
            d.model_available = true;
            d.f1 = trained.heldout_f1;
            d.top_attackers = top_k_attackers(trained.model, window, policy.top_k);
            run.model = std::move(trained.model);
        } catch (const ModelUnavailable&) {
            d.model_available = false;
        }
    }

    std::vector<Ipv4> to_redirect;
    for (const auto& r : d.top_attackers)
        if (r.score >= policy.redirect_proba_cutoff) to_redirect.push_back(r.ip);
    d.redirected_ips = to_redirect;
    std::sort(d.redirected_ips.begin(), d.redirected_ips.end());
    ctx.routing.redirect(to_redirect, now, ctx.propagation_delay_s);

    d.attack_rate = attack_rate(window, policy.window_s, now);
    d.max_replicas_set = d.attack_rate > policy.threshold ? policy.max_on_attack : policy.max_on_clear;
    set_max_replicas(ctx.hpa_spec, ctx.hpa_status, d.max_replicas_set, now);
    return run;
}

}  // namespace scalesentry
