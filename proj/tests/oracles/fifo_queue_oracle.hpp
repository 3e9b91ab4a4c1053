#pragma once
// Reference tick-by-tick queue simulator. Scalar state only, no library types,
// written from the queueing rules rather than from the PodTier code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct QueueParams {
    int replicas = 1;
    double rps = 100.0;
    std::size_t queue_cap = 200;
    double timeout_s = 2.0;
    double reject_latency_s = 2.0;
    double startup_s = 15.0;
    std::size_t inflight_cap = static_cast<std::size_t>(-1);
    double dt = 1.0;
};

struct Arrival {
    int id;
    double t;
    bool scan;
};

struct Done {
    int id;
    int status;
    double t;
};

struct ScaleAt {
    long tick;
    int desired;
};

/// Runs `ticks` ticks; scale commands are applied after arrivals of their tick.
/// Arrivals that never got admitted are returned in `leftover`.
struct QueueRun {
    std::vector<Done> done;
    std::vector<int> leftover;
};

inline QueueRun simulate_queue(const QueueParams& p, std::vector<Arrival> arrivals, long ticks,
                               std::vector<ScaleAt> scales = {}) {
    QueueRun out;
    int ready = p.replicas;
    int target = p.replicas;
    double ready_time = -1.0;

    std::vector<Arrival> waiting;          // FIFO, index 0 is the head
    std::vector<double> waiting_since;
    std::vector<double> reject_until;      // client slots held by 503s
    std::vector<Arrival> backlog;          // not yet admitted
    std::size_t next = 0;
    std::stable_sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) { return a.t < b.t; });

    for (long k = 0; k < ticks; ++k) {
        const double now = static_cast<double>(k) * p.dt;
        if (ready_time >= 0.0 && ready_time <= now) {
            ready = target;
            ready_time = -1.0;
        }
        while (next < arrivals.size() && arrivals[next].t < now + p.dt) backlog.push_back(arrivals[next++]);

        // Abandonment first, then expired reject slots, then service.
        std::size_t head = 0;
        while (head < waiting.size() && now - waiting_since[head] > p.timeout_s) {
            out.done.push_back({waiting[head].id, 499, waiting_since[head] + p.timeout_s});
            ++head;
        }
        waiting.erase(waiting.begin(), waiting.begin() + static_cast<long>(head));
        waiting_since.erase(waiting_since.begin(), waiting_since.begin() + static_cast<long>(head));
        std::erase_if(reject_until, [&](double t) { return t <= now; });

        long budget = static_cast<long>(std::floor(ready * p.rps * p.dt + 1e-9));
        while (!waiting.empty() && budget > 0) {
            out.done.push_back({waiting.front().id, waiting.front().scan ? 404 : 200, now});
            waiting.erase(waiting.begin());
            waiting_since.erase(waiting_since.begin());
            --budget;
        }

        std::size_t used = 0;
        for (; used < backlog.size(); ++used) {
            const Arrival& a = backlog[used];
            if (waiting.size() + reject_until.size() >= p.inflight_cap) break;
            const double at = std::max(a.t, now);
            if (budget > 0) {
                --budget;
                out.done.push_back({a.id, a.scan ? 404 : 200, at});
            } else if (waiting.size() < p.queue_cap) {
                waiting.push_back(a);
                waiting_since.push_back(at);
            } else {
                out.done.push_back({a.id, 503, at + p.reject_latency_s});
                reject_until.push_back(at + p.reject_latency_s);
            }
        }
        backlog.erase(backlog.begin(), backlog.begin() + static_cast<long>(used));

        for (const auto& s : scales) {
            if (s.tick != k || s.desired == target) continue;
            if (ready_time >= 0.0 && ready_time <= now) {
                ready = target;
                ready_time = -1.0;
            }
            if (s.desired <= ready) {
                ready = target = s.desired;
                ready_time = -1.0;
            } else {
                target = s.desired;
                ready_time = now + p.startup_s;
            }
        }
    }
    for (const auto& a : backlog) out.leftover.push_back(a.id);
    for (std::size_t i = next; i < arrivals.size(); ++i) out.leftover.push_back(arrivals[i].id);
    for (const auto& a : waiting) out.leftover.push_back(a.id);
    return out;
}

}  // namespace oracle
