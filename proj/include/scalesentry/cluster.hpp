#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "scalesentry/ipv4.hpp"
#include "scalesentry/workload.hpp"

namespace scalesentry {

enum class Tier { service, honeypot, none };

const char* to_string(Tier tier) noexcept;

/// IP -> honeypot redirect map with delayed, versioned activation.
///
/// Every update creates a new version that becomes visible at
/// `update time + propagation delay`; lookups before that keep seeing the
/// previous version. The redirected set only grows.
class RoutingTable {
public:
    struct Version {
        std::size_t version = 0;
        double effective_from = 0.0;
        std::set<Ipv4> honeypot_ips;
    };

    RoutingTable();

    /// Adds `ips` as of `now`, visible from `now + propagation_delay_s`.
    /// Returns false (and creates no version) when every ip is already present.
    bool redirect(std::span<const Ipv4> ips, double now, double propagation_delay_s);

    const Version& effective(double now) const;
    const Version& latest() const { return versions_.back(); }
    std::size_t version() const { return versions_.back().version; }
    const std::vector<Version>& versions() const { return versions_; }

private:
    std::vector<Version> versions_;
};

Tier route(const RequestEvent& event, const RoutingTable& table, double now);

struct Outcome {
    RequestEvent request;
    int status = 0;  ///< 200, 404, 499 or 503
    Tier tier_served = Tier::none;
    double t_complete = 0.0;
};

struct TierConfig {
    double per_pod_capacity_rps = 120.0;
    double pod_startup_delay_s = 15.0;
    std::size_t queue_cap = 100;
    double client_timeout_s = 2.0;
    /// Time a rejected request keeps its client connection before the 503 arrives.
    double reject_latency_s = 2.0;
};

/// Per-tick counters appended to the run timeline.
struct TierTickStats {
    std::size_t ok = 0;          ///< 2xx
    std::size_t not_found = 0;   ///< 4xx other than 499
    std::size_t timed_out = 0;   ///< 499
    std::size_t rejected = 0;    ///< 5xx
};

/// A pod set with FIFO queueing in front of it.
///
/// Per tick the tier serves at most ready x capacity x dt requests, queue first.
/// Queue entries older than the client timeout complete as 499, arrivals that
/// find the queue full complete as 503. An unbounded tier (the honeypot) serves
/// everything immediately.
class PodTier {
public:
    static PodTier service(TierConfig config, int initial_replicas = 1);
    static PodTier honeypot();

    struct Admission {
        enum class Kind { served, queued, rejected, deferred } kind;
        std::optional<Outcome> outcome;  ///< set for served and rejected
    };

    /// Starts the tick at `now`: finishes due scale-ups, expires timed-out
    /// queue entries and serves the queue FIFO. Returns the completed outcomes.
    std::vector<Outcome> begin_tick(double now, double dt = 1.0);

    /// Offers one arrival inside the current tick. Deferred means the
    /// in-flight cap is reached and the caller must retry in a later tick.
    Admission admit(const RequestEvent& event,
                    std::size_t inflight_cap = std::numeric_limits<std::size_t>::max());

    /// Scale-down is immediate; scale-up becomes ready after the startup delay.
    void apply_scale(int desired, double now);

    Tier kind() const { return kind_; }
    int replicas_ready() const { return replicas_ready_; }
    int replicas_desired() const { return replicas_desired_; }
    std::optional<double> ready_at() const { return ready_at_; }
    std::size_t queue_depth() const { return queue_.size(); }
    /// Requests holding a client connection across the tick boundary.
    std::size_t in_flight() const { return queue_.size() + pending_rejects_.size(); }
    const TierConfig& config() const { return config_; }
    bool unbounded() const { return unbounded_; }
    const TierTickStats& tick_stats() const { return stats_; }

private:
    struct Queued {
        RequestEvent event;
        double enqueued_at;
    };

    PodTier(Tier kind, TierConfig config, int replicas, bool unbounded);
    void advance(double now);
    Outcome serve(const RequestEvent& event, double at);
    void count(const Outcome& outcome);

    Tier kind_;
    TierConfig config_;
    bool unbounded_;
    int replicas_ready_;
    int replicas_desired_;
    std::optional<double> ready_at_;
    std::deque<Queued> queue_;
    std::multiset<double> pending_rejects_;
    double now_ = 0.0;
    std::size_t capacity_left_ = 0;
    TierTickStats stats_;
};

/// Runs one full tick over sorted `arrivals`: begin_tick, then admit each in order.
/// Deferred arrivals (in-flight cap reached) are returned in order.
struct TickResult {
    std::vector<Outcome> outcomes;
    std::vector<RequestEvent> deferred;
};
TickResult tick(PodTier& tier, std::span<const RequestEvent> arrivals, double now,
                std::size_t inflight_cap = std::numeric_limits<std::size_t>::max(), double dt = 1.0);

/// Status a served request receives: 200 for "/", 404 for anything else.
int served_status(const RequestEvent& event) noexcept;

}  // namespace scalesentry
