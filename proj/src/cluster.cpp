#include "scalesentry/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scalesentry/errors.hpp"

namespace scalesentry {

const char* to_string(Tier tier) noexcept {
    switch (tier) {
        case Tier::service: return "service";
        case Tier::honeypot: return "honeypot";
        case Tier::none: return "none";
    }
    return "none";
}

RoutingTable::RoutingTable() { versions_.push_back(Version{}); }

bool RoutingTable::redirect(std::span<const Ipv4> ips, double now, double propagation_delay_s) {
    if (propagation_delay_s < 0.0) throw ContractViolation("propagation delay must be >= 0");
    const Version& last = versions_.back();
    if (now < last.effective_from - propagation_delay_s)
        throw ContractViolation("routing table updates must be time-ordered");
    Version next{last.version + 1, now + propagation_delay_s, last.honeypot_ips};
    bool grew = false;
    for (Ipv4 ip : ips) grew |= next.honeypot_ips.insert(ip).second;
    if (!grew) return false;
    versions_.push_back(std::move(next));
    return true;
}

const RoutingTable::Version& RoutingTable::effective(double now) const {
    // Versions are ordered by effective_from; pick the last one already in force.
    auto it = std::upper_bound(versions_.begin() + 1, versions_.end(), now,
                               [](double t, const Version& v) { return t < v.effective_from; });
    return *(it - 1);
}

Tier route(const RequestEvent& event, const RoutingTable& table, double now) {
    return table.effective(now).honeypot_ips.contains(event.source_ip) ? Tier::honeypot : Tier::service;
}

int served_status(const RequestEvent& event) noexcept { return event.path == kHomePath ? 200 : 404; }

PodTier::PodTier(Tier kind, TierConfig config, int replicas, bool unbounded)
    : kind_(kind), config_(config), unbounded_(unbounded), replicas_ready_(replicas), replicas_desired_(replicas) {}

PodTier PodTier::service(TierConfig config, int initial_replicas) {
    if (initial_replicas < 1) throw ContractViolation("a tier needs at least one replica");
    if (config.per_pod_capacity_rps <= 0.0 || config.client_timeout_s < 0.0 || config.reject_latency_s < 0.0 ||
        config.pod_startup_delay_s < 0.0)
        throw ConfigError("invalid tier configuration");
    return PodTier(Tier::service, config, initial_replicas, false);
}

PodTier PodTier::honeypot() { return PodTier(Tier::honeypot, TierConfig{}, 1, true); }

void PodTier::advance(double now) {
    if (ready_at_ && *ready_at_ <= now) {
        replicas_ready_ = replicas_desired_;
        ready_at_.reset();
    }
}

void PodTier::apply_scale(int desired, double now) {
    if (desired < 1) throw ContractViolation("desired replicas must be >= 1");
    if (unbounded_) return;  // honeypot replicas are fixed
    advance(now);
    if (desired == replicas_desired_) return;
    if (desired <= replicas_ready_) {
        replicas_ready_ = desired;
        replicas_desired_ = desired;
        ready_at_.reset();
        return;
    }
    replicas_desired_ = desired;
    ready_at_ = now + config_.pod_startup_delay_s;
}

Outcome PodTier::serve(const RequestEvent& event, double at) {
    return Outcome{event, served_status(event), kind_, at};
}

void PodTier::count(const Outcome& o) {
    if (o.status == 499) ++stats_.timed_out;
    else if (o.status >= 500) ++stats_.rejected;
    else if (o.status >= 400) ++stats_.not_found;
    else ++stats_.ok;
}

std::vector<Outcome> PodTier::begin_tick(double now, double dt) {
    now_ = now;
    stats_ = {};
    advance(now);
    std::vector<Outcome> done;
    if (unbounded_) return done;

    while (!queue_.empty() && now - queue_.front().enqueued_at > config_.client_timeout_s) {
        const Queued& q = queue_.front();
        done.push_back(Outcome{q.event, 499, kind_, q.enqueued_at + config_.client_timeout_s});
        queue_.pop_front();
    }
    pending_rejects_.erase(pending_rejects_.begin(), pending_rejects_.upper_bound(now));

    capacity_left_ = static_cast<std::size_t>(
        std::floor(replicas_ready_ * config_.per_pod_capacity_rps * dt + 1e-9));
    while (!queue_.empty() && capacity_left_ > 0) {
        done.push_back(serve(queue_.front().event, now));
        queue_.pop_front();
        --capacity_left_;
    }
    for (const auto& o : done) count(o);
    return done;
}

PodTier::Admission PodTier::admit(const RequestEvent& event, std::size_t inflight_cap) {
    const double at = std::max(event.t_arrival, now_);
    if (unbounded_) {
        Outcome o = serve(event, at);
        count(o);
        return {Admission::Kind::served, o};
    }
    if (in_flight() >= inflight_cap) {
        return {Admission::Kind::deferred, std::nullopt};
    }
    if (capacity_left_ > 0) {
        --capacity_left_;
        Outcome o = serve(event, at);
        count(o);
        return {Admission::Kind::served, o};
    }
    if (queue_.size() < config_.queue_cap) {
        queue_.push_back(Queued{event, at});
        return {Admission::Kind::queued, std::nullopt};
    }
    Outcome o{event, 503, kind_, at + config_.reject_latency_s};
    pending_rejects_.insert(o.t_complete);
    count(o);
    return {Admission::Kind::rejected, o};
}

TickResult tick(PodTier& tier, std::span<const RequestEvent> arrivals, double now, std::size_t inflight_cap,
                double dt) {
    TickResult result;
    result.outcomes = tier.begin_tick(now, dt);
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        auto admission = tier.admit(arrivals[i], inflight_cap);
        if (admission.kind == PodTier::Admission::Kind::deferred) {
            result.deferred.assign(arrivals.begin() + static_cast<std::ptrdiff_t>(i), arrivals.end());
            break;
        }
        if (admission.outcome) result.outcomes.push_back(std::move(*admission.outcome));
    }
    return result;
}

}  // namespace scalesentry
