#include "scalesentry/condition.hpp"

#include <array>
#include <fstream>

#include "scalesentry/errors.hpp"

namespace scalesentry {

namespace {

struct Row {
    double scan_share;
    double threshold;
    double window_s;
};

constexpr std::array<Row, 6> kRows{{
    {0.60, 0.10, 300.0},
    {0.60, 0.20, 300.0},
    {0.15, 0.01, 300.0},
    {0.15, 0.05, 300.0},
    {0.15, 0.01, 60.0},
    {0.15, 0.05, 60.0},
}};

}  // namespace

Condition build_condition(int condition_id, std::uint64_t rng_seed) {
    if (condition_id < 1 || condition_id > 6)
        throw ConfigError("unknown condition id " + std::to_string(condition_id) + " (expected 1..6)");
    const Row& row = kRows[static_cast<std::size_t>(condition_id - 1)];
    Condition c;
    c.traffic.condition_id = condition_id;
    c.traffic.scan_share_within_attacker_traffic = row.scan_share;
    c.traffic.effective_attack_probability = c.traffic.attacker_traffic_share * row.scan_share;
    c.traffic.rng_seed = rng_seed;
    c.policy.threshold = row.threshold;
    c.policy.window_s = row.window_s;
    return c;
}

void to_json(nlohmann::json& j, const SentinelPolicy& p) {
    j = nlohmann::json{{"run_times_s", p.run_times_s},
                       {"window_s", p.window_s},
                       {"threshold", p.threshold},
                       {"redirect_proba_cutoff", p.redirect_proba_cutoff},
                       {"top_k", p.top_k},
                       {"max_on_attack", p.max_on_attack},
                       {"max_on_clear", p.max_on_clear}};
}

void from_json(const nlohmann::json& j, SentinelPolicy& p) {
    SentinelPolicy out;
    out.run_times_s = j.value("run_times_s", out.run_times_s);
    out.window_s = j.value("window_s", out.window_s);
    out.threshold = j.value("threshold", out.threshold);
    out.redirect_proba_cutoff = j.value("redirect_proba_cutoff", out.redirect_proba_cutoff);
    out.top_k = j.value("top_k", out.top_k);
    out.max_on_attack = j.value("max_on_attack", out.max_on_attack);
    out.max_on_clear = j.value("max_on_clear", out.max_on_clear);
    p = std::move(out);
}

void to_json(nlohmann::json& j, const Condition& c) { j = nlohmann::json{{"traffic", c.traffic}, {"sentinel", c.policy}}; }

void from_json(const nlohmann::json& j, Condition& c) {
    c.traffic = j.at("traffic").get<TrafficSpec>();
    c.policy = j.value("sentinel", SentinelPolicy{});
}

Condition load_condition(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read condition file " + path.string());
    Condition c = nlohmann::json::parse(in).get<Condition>();
    validate(c.traffic);
    validate(c.policy);
    return c;
}

void save_condition(const Condition& condition, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write condition file " + path.string());
    out << nlohmann::json(condition).dump(2) << '\n';
}

}  // namespace scalesentry
