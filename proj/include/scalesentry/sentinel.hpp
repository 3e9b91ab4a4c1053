#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "scalesentry/autoscaler.hpp"
#include "scalesentry/cluster.hpp"
#include "scalesentry/forest.hpp"
#include "scalesentry/logpipe.hpp"

namespace scalesentry {

/// When the detection script runs and how it reacts.
struct SentinelPolicy {
    std::vector<double> run_times_s{180.0, 300.0};
    double window_s = 300.0;
    double threshold = 0.10;
    double redirect_proba_cutoff = 0.5;
    std::size_t top_k = 10;
    int max_on_attack = 1;
    int max_on_clear = 5;
};

void validate(const SentinelPolicy& policy);

struct SentinelDecision {
    double t = 0.0;
    double attack_rate = 0.0;
    double f1 = 0.0;
    bool model_available = false;
    std::vector<Ipv4> redirected_ips;  ///< IPs this run put on the redirect list, ascending
    std::vector<RankedIp> top_attackers;
    int max_replicas_set = 0;
};

nlohmann::json to_json(const SentinelDecision& decision);

/// 403/404 access records in (now - window, now] divided by all records in that
/// window (access and error entries); 0 for an empty window.
double attack_rate(std::span<const LabeledRecord> records, double window_s, double now);

/// Records with t in (now - window, now].
std::span<const LabeledRecord> window_of(std::span<const LabeledRecord> sorted_records, double window_s, double now);

/// Everything the script touches, owned by the simulation loop.
struct SentinelContext {
    std::span<const std::string> access_lines;
    std::span<const std::string> error_lines;
    const ForestParams& forest_params;
    RoutingTable& routing;
    double propagation_delay_s;
    HpaSpec& hpa_spec;
    HpaStatus& hpa_status;
};

struct ScriptRun {
    SentinelDecision decision;
    std::optional<ForestModel> model;
};

/// One execution of the detection script at `now`:
/// preprocess service-tier logs up to now, train, rank the window's IPs,
/// redirect those scoring at least the cutoff, then set max_replicas from the
/// windowed attack rate against the threshold.
ScriptRun run_script(double now, const SentinelPolicy& policy, SentinelContext ctx);

}  // namespace scalesentry
