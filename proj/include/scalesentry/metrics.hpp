#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "scalesentry/cluster.hpp"

namespace scalesentry {

enum class StatusClass { ok_2xx, client_4xx, client_closed_499, server_5xx };

const char* to_string(StatusClass cls) noexcept;
StatusClass classify(int status_code) noexcept;

struct Labels {
    Tier tier = Tier::service;
    StatusClass status_class = StatusClass::ok_2xx;
    int status_code = 200;

    friend bool operator==(const Labels&, const Labels&) = default;
};

Labels labels_for(const Outcome& outcome);

/// Label predicate; unset fields match anything.
struct Selector {
    std::optional<Tier> tier;
    std::optional<StatusClass> status_class;
    std::optional<int> status_code;

    bool matches(const Labels& labels) const noexcept;
};

struct QueryWindow {
    double duration_s = 300.0;
};

/// Append-only status-code event log with exact windowed counts.
class CounterStore {
public:
    struct Event {
        double t;
        Labels labels;
    };

    /// Throws ContractViolation when t is earlier than the last recorded event.
    void record(double t, const Labels& labels);

    /// Number of matching events with t in (now - window, now].
    std::size_t increase(const Selector& selector, QueryWindow window, double now) const;

    std::size_t size() const { return events_.size(); }
    const std::vector<Event>& events() const { return events_; }

    /// CSV `t,tier,status_class,status_code,count_cumulative`, one row per
    /// (t, label set) that received events, with the running total per label set.
    void export_csv(std::ostream& out) const;

private:
    std::vector<Event> events_;
};

}  // namespace scalesentry
