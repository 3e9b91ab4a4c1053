#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "scalesentry/ipv4.hpp"

namespace scalesentry {

/// One experimental condition's traffic parameters.
struct TrafficSpec {
    int condition_id = 1;
    std::size_t total_requests = 200000;
    std::size_t concurrency = 200;
    int arrival_rate_min_rps = 400;
    int arrival_rate_max_rps = 600;
    std::size_t normal_ip_count = 190;
    std::size_t attacker_ip_count = 10;
    double attacker_traffic_share = 0.20;
    double scan_share_within_attacker_traffic = 0.60;
    double effective_attack_probability = 0.12;
    std::vector<std::string> scan_paths{"/admin", "/data", "/login"};
    double malformed_log_rate = 0.01;
    std::uint64_t rng_seed = 0;
};

/// Throws ConfigError when a TrafficSpec invariant does not hold.
void validate(const TrafficSpec& spec);

struct IpPool {
    std::vector<Ipv4> normal_ips;
    std::vector<Ipv4> attacker_ips;

    bool is_attacker(Ipv4 ip) const;
};

struct RequestEvent {
    double t_arrival = 0.0;  ///< seconds since run start
    Ipv4 source_ip;          ///< carried as the X-Forwarded-For value
    std::string path;
    bool ground_truth_attack = false;

    friend bool operator==(const RequestEvent&, const RequestEvent&) = default;
};

inline constexpr const char* kHomePath = "/";

/// Draws disjoint normal and attacker address sets from the spec's seed.
IpPool make_ip_pool(const TrafficSpec& spec);

/// Generates exactly spec.total_requests arrivals, nondecreasing in time.
///
/// Per-second counts are uniform in [min, max] rps, spread uniformly inside the
/// second. Each request comes from an attacker IP with probability
/// attacker_traffic_share; attacker requests scan (uniform over scan_paths) with
/// probability scan_share_within_attacker_traffic and request "/" otherwise.
std::vector<RequestEvent> generate_stream(const TrafficSpec& spec, const IpPool& pool);

void to_json(nlohmann::json& j, const TrafficSpec& spec);
void from_json(const nlohmann::json& j, TrafficSpec& spec);

}  // namespace scalesentry
