#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace scalesentry {

/// HPA analog configuration. max_replicas is toggled at runtime by the sentinel.
struct HpaSpec {
    int min_replicas = 1;
    int max_replicas = 5;
    std::size_t trigger_threshold = 50;  ///< fires on strictly more 5xx than this
    double trigger_window_s = 300.0;
    double stabilization_s = 60.0;
    double reconcile_period_s = 15.0;
};

struct HpaHistoryEntry {
    double t;
    int desired;
    int max_replicas;

    friend bool operator==(const HpaHistoryEntry&, const HpaHistoryEntry&) = default;
};

struct HpaStatus {
    int desired = 1;
    std::optional<double> last_trigger_t;
    std::vector<HpaHistoryEntry> history;
};

/// Initial status: desired at min_replicas, nothing triggered yet.
HpaStatus initial_status(const HpaSpec& spec);

/// One reconcile pass on the 5xx increase over the trigger window.
///
/// Above the threshold the target jumps straight to max_replicas; otherwise it
/// decays to min_replicas once stabilization_s has passed since the last
/// trigger. The result is always clamped into [min, max].
void reconcile(const HpaSpec& spec, HpaStatus& status, std::size_t metric_value, double now);

/// Changes max_replicas at `now` and re-clamps desired immediately.
/// m < min_replicas lowers min_replicas to m; m < 1 is a contract violation.
void set_max_replicas(HpaSpec& spec, HpaStatus& status, int m, double now);

/// CSV `t,desired,max_replicas`.
void export_history_csv(const HpaStatus& status, std::ostream& out);

}  // namespace scalesentry
