#include "scalesentry/workload.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "scalesentry/errors.hpp"
#include "scalesentry/rng.hpp"

namespace scalesentry {

namespace {

constexpr std::size_t kTotalIps = 200;

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void validate(const TrafficSpec& spec) {
    if (spec.condition_id < 1 || spec.condition_id > 6)
        throw ConfigError("condition_id must be in 1..6, got " + std::to_string(spec.condition_id));
    if (spec.total_requests == 0) throw ConfigError("total_requests must be positive");
    if (spec.concurrency == 0) throw ConfigError("concurrency must be positive");
    if (spec.arrival_rate_min_rps <= 0 || spec.arrival_rate_min_rps > spec.arrival_rate_max_rps)
        throw ConfigError("arrival_rate_rps must be a positive, ordered range");
    if (spec.normal_ip_count + spec.attacker_ip_count != kTotalIps)
        throw ConfigError("normal_ip_count + attacker_ip_count must equal 200");
    if (!in_unit_interval(spec.attacker_traffic_share) ||
        !in_unit_interval(spec.scan_share_within_attacker_traffic) ||
        !in_unit_interval(spec.malformed_log_rate))
        throw ConfigError("shares and rates must lie in [0, 1]");
    if (std::abs(spec.effective_attack_probability -
                 spec.attacker_traffic_share * spec.scan_share_within_attacker_traffic) > 1e-9)
        throw ConfigError("effective_attack_probability must equal attacker share x scan share");
    if (spec.attacker_traffic_share > 0.0 && spec.attacker_ip_count == 0)
        throw ConfigError("attacker traffic requires at least one attacker IP");
    if (spec.attacker_traffic_share < 1.0 && spec.normal_ip_count == 0)
        throw ConfigError("normal traffic requires at least one normal IP");
    if (spec.scan_share_within_attacker_traffic > 0.0 && spec.scan_paths.empty())
        throw ConfigError("scan traffic requires at least one scan path");
    for (const auto& p : spec.scan_paths)
        if (p.empty() || p.front() != '/' || p == kHomePath || p.find_first_of(" \"\t\r\n") != std::string::npos)
            throw ConfigError("invalid scan path '" + p + "'");
}

bool IpPool::is_attacker(Ipv4 ip) const {
    return std::find(attacker_ips.begin(), attacker_ips.end(), ip) != attacker_ips.end();
}

IpPool make_ip_pool(const TrafficSpec& spec) {
    Rng rng(derive_seed(spec.rng_seed, Stream::ip_pool));
    std::unordered_set<Ipv4> seen;
    auto draw = [&] {
        for (;;) {
            // Unicast space 1.0.0.0 - 223.255.255.255.
            const auto first = static_cast<std::uint32_t>(rng.between(1, 223));
            const auto rest = static_cast<std::uint32_t>(rng.below(1u << 24));
            const Ipv4 ip{(first << 24) | rest};
            if (seen.insert(ip).second) return ip;
        }
    };
    IpPool pool;
    pool.normal_ips.reserve(spec.normal_ip_count);
    pool.attacker_ips.reserve(spec.attacker_ip_count);
    for (std::size_t i = 0; i < spec.normal_ip_count; ++i) pool.normal_ips.push_back(draw());
    for (std::size_t i = 0; i < spec.attacker_ip_count; ++i) pool.attacker_ips.push_back(draw());
    return pool;
}

std::vector<RequestEvent> generate_stream(const TrafficSpec& spec, const IpPool& pool) {
    validate(spec);
    if (pool.normal_ips.size() != spec.normal_ip_count || pool.attacker_ips.size() != spec.attacker_ip_count)
        throw ConfigError("IP pool does not match the traffic spec");

    Rng rng(derive_seed(spec.rng_seed, Stream::arrivals));
    std::vector<RequestEvent> events;
    events.reserve(spec.total_requests);
    std::vector<double> offsets;

    for (std::size_t second = 0; events.size() < spec.total_requests; ++second) {
        const auto count = static_cast<std::size_t>(
            rng.between(spec.arrival_rate_min_rps, spec.arrival_rate_max_rps));
        const std::size_t n = std::min(count, spec.total_requests - events.size());
        offsets.resize(n);
        for (auto& o : offsets) o = rng.unit();
        std::sort(offsets.begin(), offsets.end());

        for (double offset : offsets) {
            RequestEvent ev;
            ev.t_arrival = static_cast<double>(second) + offset;
            if (rng.chance(spec.attacker_traffic_share)) {
                ev.source_ip = pool.attacker_ips[rng.below(pool.attacker_ips.size())];
                if (rng.chance(spec.scan_share_within_attacker_traffic)) {
                    ev.path = spec.scan_paths[rng.below(spec.scan_paths.size())];
                    ev.ground_truth_attack = true;
                } else {
                    ev.path = kHomePath;
                }
            } else {
                ev.source_ip = pool.normal_ips[rng.below(pool.normal_ips.size())];
                ev.path = kHomePath;
            }
            events.push_back(std::move(ev));
        }
    }
    return events;
}

void to_json(nlohmann::json& j, const TrafficSpec& spec) {
    j = nlohmann::json{
        {"condition_id", spec.condition_id},
        {"total_requests", spec.total_requests},
        {"concurrency", spec.concurrency},
        {"arrival_rate_rps", {spec.arrival_rate_min_rps, spec.arrival_rate_max_rps}},
        {"normal_ip_count", spec.normal_ip_count},
        {"attacker_ip_count", spec.attacker_ip_count},
        {"attacker_traffic_share", spec.attacker_traffic_share},
        {"scan_share_within_attacker_traffic", spec.scan_share_within_attacker_traffic},
        {"effective_attack_probability", spec.effective_attack_probability},
        {"scan_paths", spec.scan_paths},
        {"malformed_log_rate", spec.malformed_log_rate},
        {"rng_seed", spec.rng_seed},
    };
}

void from_json(const nlohmann::json& j, TrafficSpec& spec) {
    TrafficSpec out;
    out.condition_id = j.value("condition_id", out.condition_id);
    out.total_requests = j.value("total_requests", out.total_requests);
    out.concurrency = j.value("concurrency", out.concurrency);
    if (j.contains("arrival_rate_rps")) {
        const auto& range = j.at("arrival_rate_rps");
        if (!range.is_array() || range.size() != 2) throw ConfigError("arrival_rate_rps must be [min, max]");
        out.arrival_rate_min_rps = range[0].get<int>();
        out.arrival_rate_max_rps = range[1].get<int>();
    }
    out.normal_ip_count = j.value("normal_ip_count", out.normal_ip_count);
    out.attacker_ip_count = j.value("attacker_ip_count", out.attacker_ip_count);
    out.attacker_traffic_share = j.value("attacker_traffic_share", out.attacker_traffic_share);
    out.scan_share_within_attacker_traffic =
        j.value("scan_share_within_attacker_traffic", out.scan_share_within_attacker_traffic);
    out.effective_attack_probability = j.value(
        "effective_attack_probability", out.attacker_traffic_share * out.scan_share_within_attacker_traffic);
    out.scan_paths = j.value("scan_paths", out.scan_paths);
    out.malformed_log_rate = j.value("malformed_log_rate", out.malformed_log_rate);
    out.rng_seed = j.value("rng_seed", out.rng_seed);
    spec = std::move(out);
}

}  // namespace scalesentry
