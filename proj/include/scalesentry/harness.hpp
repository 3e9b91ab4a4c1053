#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "scalesentry/autoscaler.hpp"
#include "scalesentry/cluster.hpp"
#include "scalesentry/condition.hpp"
#include "scalesentry/forest.hpp"
#include "scalesentry/metrics.hpp"
#include "scalesentry/sentinel.hpp"

namespace scalesentry {

/// Everything one simulated run needs.
struct SimulationConfig {
    Condition condition;
    TierConfig tier;
    HpaSpec hpa;
    ForestParams forest;
    double propagation_delay_s = 5.0;
    double tick_s = 1.0;
};

SimulationConfig default_simulation(int condition_id, std::uint64_t rng_seed);

/// Applies `section.field=value` (sections: traffic, sentinel, tier, hpa, forest,
/// cluster). The value is parsed as JSON when possible, else taken as a string.
void apply_override(SimulationConfig& config, const std::string& assignment);

void to_json(nlohmann::json& j, const SimulationConfig& config);
void from_json(const nlohmann::json& j, SimulationConfig& config);

/// One row of the per-condition results tables.
struct RunResult {
    int condition_id = 0;
    int repetition = 0;
    std::size_t nginx_attacks_received = 0;     ///< scan-path requests routed to the service tier
    std::size_t five_xx_count = 0;
    std::size_t honeypot_attacks_received = 0;  ///< scan-path requests routed to the honeypot
    double total_request_time_s = 0.0;          ///< first arrival to last completion
    double first_f1 = 0.0;
    double first_ip_future_rate = 0.0;
};

/// Per-run facts the acceptance checks need beyond the results columns.
struct RunDiagnostics {
    std::size_t total_requests = 0;
    std::size_t service_outcomes = 0;
    std::size_t honeypot_outcomes = 0;
    std::size_t service_ok = 0;
    std::size_t service_not_found = 0;
    std::size_t service_timed_out = 0;
    std::size_t service_rejected = 0;
    std::size_t attacker_requests_after_isolation = 0;
    std::size_t attacker_requests_after_isolation_on_honeypot = 0;
    std::size_t service_scans_final_minute = 0;
    std::size_t malformed_injected = 0;
    std::size_t malformed_dropped = 0;
    std::vector<std::string> attacker_ips;
    std::vector<std::string> first_top_ips;
    std::vector<int> max_replicas_trajectory;
};

struct TimelineRow {
    double t = 0.0;
    TierTickStats service;
    TierTickStats honeypot;
    int replicas_ready = 0;
    int replicas_desired = 0;
    int max_replicas = 0;
    std::size_t queue_depth = 0;
    std::size_t client_backlog = 0;
};

struct RunArtifacts {
    std::string run_id;
    SimulationConfig config;
    RunResult result;
    RunDiagnostics diagnostics;
    std::vector<TimelineRow> timeline;
    std::vector<SentinelDecision> decisions;
    std::vector<ForestModel> models;
    HpaStatus hpa;
    CounterStore metrics;
    std::vector<std::string> access_lines;
    std::vector<std::string> error_lines;
    std::vector<std::string> honeypot_lines;
};

std::string run_id_for(int condition_id, int repetition);

/// Runs the whole closed loop tick by tick: traffic, routing, tiers, metrics,
/// HPA reconcile, then the sentinel at its scheduled instants.
RunArtifacts simulate(const SimulationConfig& config, int repetition);

/// Writes runs/<id>/, logs/<id>/ and model/<id>-<n>.json under `output_dir`.
void write_run(const RunArtifacts& run, const std::filesystem::path& output_dir);

nlohmann::json to_json(const RunResult& result, const RunDiagnostics& diagnostics);
RunResult run_result_from_json(const nlohmann::json& j);
RunDiagnostics diagnostics_from_json(const nlohmann::json& j);

struct ExperimentConfig {
    int condition_id = 1;
    int repetitions = 3;
    std::uint64_t master_seed = 42;
    double tick_s = 1.0;
    std::filesystem::path output_dir = "out";
    std::vector<std::string> overrides;
};

/// Mean of each column over a condition's repetitions.
RunResult average(const std::vector<RunResult>& rows);

struct ExperimentOutcome {
    std::vector<RunResult> runs;
    RunResult aggregate;
};

/// Seed of repetition r: derive(master_seed, r), shared by every condition.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// Reads every runs/*/result.json under `output_dir` and writes results.csv and
/// summary.csv. Throws IoError when no completed run is found.
std::vector<RunResult> report(const std::filesystem::path& output_dir);

/// Creates `dir` and proves it is writable; throws IoError otherwise.
void ensure_writable_dir(const std::filesystem::path& dir);

}  // namespace scalesentry
