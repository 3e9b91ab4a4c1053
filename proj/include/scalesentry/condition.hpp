#pragma once

#include <filesystem>

#include <json.hpp>

#include "scalesentry/sentinel.hpp"
#include "scalesentry/workload.hpp"

namespace scalesentry {

/// A row of the experimental-conditions table: traffic plus the script's policy.
struct Condition {
    TrafficSpec traffic;
    SentinelPolicy policy;
};

/// Conditions 1..6. Throws ConfigError for anything else.
///
///   id  attack prob  max-replicas trigger
///   1   12%          attack rate > 10% over 5 min
///   2   12%          attack rate > 20% over 5 min
///   3    3%          attack rate >  1% over 5 min
///   4    3%          attack rate >  5% over 5 min
///   5    3%          attack rate >  1% over 1 min
///   6    3%          attack rate >  5% over 1 min
Condition build_condition(int condition_id, std::uint64_t rng_seed);

void to_json(nlohmann::json& j, const SentinelPolicy& policy);
void from_json(const nlohmann::json& j, SentinelPolicy& policy);
void to_json(nlohmann::json& j, const Condition& condition);
void from_json(const nlohmann::json& j, Condition& condition);

Condition load_condition(const std::filesystem::path& path);
void save_condition(const Condition& condition, const std::filesystem::path& path);

}  // namespace scalesentry
