#include "scalesentry/metrics.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

#include "scalesentry/errors.hpp"

namespace scalesentry {

const char* to_string(StatusClass cls) noexcept {
    switch (cls) {
        case StatusClass::ok_2xx: return "2xx";
        case StatusClass::client_4xx: return "4xx";
        case StatusClass::client_closed_499: return "499";
        case StatusClass::server_5xx: return "5xx";
    }
    return "2xx";
}

StatusClass classify(int status_code) noexcept {
    if (status_code == 499) return StatusClass::client_closed_499;
    if (status_code >= 500) return StatusClass::server_5xx;
    if (status_code >= 400) return StatusClass::client_4xx;
    return StatusClass::ok_2xx;
}

Labels labels_for(const Outcome& outcome) {
    return Labels{outcome.tier_served, classify(outcome.status), outcome.status};
}

bool Selector::matches(const Labels& labels) const noexcept {
    return (!tier || *tier == labels.tier) && (!status_class || *status_class == labels.status_class) &&
           (!status_code || *status_code == labels.status_code);
}

void CounterStore::record(double t, const Labels& labels) {
    if (!events_.empty() && t < events_.back().t)
        throw ContractViolation("counter store timestamps must be nondecreasing");
    events_.push_back(Event{t, labels});
}

std::size_t CounterStore::increase(const Selector& selector, QueryWindow window, double now) const {
    const double from = now - window.duration_s;
    auto first = std::upper_bound(events_.begin(), events_.end(), from,
                                  [](double t, const Event& e) { return t < e.t; });
    auto last = std::upper_bound(first, events_.end(), now, [](double t, const Event& e) { return t < e.t; });
    return static_cast<std::size_t>(
        std::count_if(first, last, [&](const Event& e) { return selector.matches(e.labels); }));
}

void CounterStore::export_csv(std::ostream& out) const {
    out << "t,tier,status_class,status_code,count_cumulative\n";
    using Key = std::tuple<int, int, int>;
    std::map<Key, std::size_t> totals;
    std::size_t i = 0;
    while (i < events_.size()) {
        const double t = events_[i].t;
        std::map<Key, std::size_t> touched;
        for (; i < events_.size() && events_[i].t == t; ++i) {
            const Labels& l = events_[i].labels;
            const Key key{static_cast<int>(l.tier), static_cast<int>(l.status_class), l.status_code};
            touched[key] = ++totals[key];
        }
        for (const auto& [key, total] : touched) {
            out << t << ',' << to_string(static_cast<Tier>(std::get<0>(key))) << ','
                << to_string(static_cast<StatusClass>(std::get<1>(key))) << ',' << std::get<2>(key) << ',' << total
                << '\n';
        }
    }
}

}  // namespace scalesentry
