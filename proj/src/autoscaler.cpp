#include "scalesentry/autoscaler.hpp"

#include <algorithm>
#include <ostream>

#include "scalesentry/errors.hpp"

namespace scalesentry {

HpaStatus initial_status(const HpaSpec& spec) {
    if (spec.min_replicas < 1 || spec.min_replicas > spec.max_replicas)
        throw ConfigError("HPA requires 1 <= min_replicas <= max_replicas");
    HpaStatus status;
    status.desired = spec.min_replicas;
    return status;
}

void reconcile(const HpaSpec& spec, HpaStatus& status, std::size_t metric_value, double now) {
    if (metric_value > spec.trigger_threshold) {
        status.desired = spec.max_replicas;
        status.last_trigger_t = now;
    } else if (!status.last_trigger_t || now - *status.last_trigger_t >= spec.stabilization_s) {
        status.desired = spec.min_replicas;
    }
    status.desired = std::clamp(status.desired, spec.min_replicas, spec.max_replicas);
    status.history.push_back({now, status.desired, spec.max_replicas});
}

void set_max_replicas(HpaSpec& spec, HpaStatus& status, int m, double now) {
    if (m < 1) throw ContractViolation("max_replicas must be >= 1");
    if (m == spec.max_replicas) return;
    spec.max_replicas = m;
    spec.min_replicas = std::min(spec.min_replicas, m);
    status.desired = std::clamp(status.desired, spec.min_replicas, spec.max_replicas);
    status.history.push_back({now, status.desired, spec.max_replicas});
}

void export_history_csv(const HpaStatus& status, std::ostream& out) {
    out << "t,desired,max_replicas\n";
    for (const auto& h : status.history) out << h.t << ',' << h.desired << ',' << h.max_replicas << '\n';
}

}  // namespace scalesentry
