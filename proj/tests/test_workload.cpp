#include <doctest.h>

#include <cmath>
#include <set>

#include "scalesentry/condition.hpp"
#include "scalesentry/errors.hpp"
#include "scalesentry/ipv4.hpp"
#include "scalesentry/rng.hpp"
#include "scalesentry/workload.hpp"

using namespace scalesentry;

TEST_SUITE("workload") {

TEST_CASE("rng streams are reproducible and independent") {
    CHECK(derive_seed(42, Stream::arrivals) == derive_seed(42, Stream::arrivals));
    CHECK(derive_seed(42, Stream::arrivals) != derive_seed(42, Stream::ip_pool));
    CHECK(derive_seed(42, 1) != derive_seed(43, 1));

    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        const auto v = r.between(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
        const double u = r.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("ipv4 parse is strict and round-trips") {
    const auto ip = Ipv4::parse("192.168.0.17");
    REQUIRE(ip);
    CHECK(ip->to_string() == "192.168.0.17");
    CHECK(ip->octets() == std::array<int, 4>{192, 168, 0, 17});
    for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.1.1.1", "01.2.3.4", "1.2.3.4 ", "a.b.c.d", "1..2.3", "-1.2.3.4"})
        CHECK_MESSAGE(!Ipv4::parse(bad), bad);
    CHECK(Ipv4::parse("0.0.0.0")->value() == 0u);
    CHECK(Ipv4::parse("255.255.255.255")->value() == 0xffffffffu);
}

TEST_CASE("condition table rows") {
    const Condition c1 = build_condition(1, 5);
    CHECK(c1.traffic.effective_attack_probability == doctest::Approx(0.12));
    CHECK(c1.policy.threshold == doctest::Approx(0.10));
    CHECK(c1.policy.window_s == doctest::Approx(300.0));

    const Condition c6 = build_condition(6, 5);
    CHECK(c6.traffic.effective_attack_probability == doctest::Approx(0.03));
    CHECK(c6.policy.threshold == doctest::Approx(0.05));
    CHECK(c6.policy.window_s == doctest::Approx(60.0));

    const double thresholds[] = {0.10, 0.20, 0.01, 0.05, 0.01, 0.05};
    const double windows[] = {300, 300, 300, 300, 60, 60};
    for (int id = 1; id <= 6; ++id) {
        const Condition c = build_condition(id, 9);
        CHECK(c.traffic.total_requests == 200000);
        CHECK(c.traffic.concurrency == 200);
        CHECK(c.traffic.normal_ip_count == 190);
        CHECK(c.traffic.attacker_ip_count == 10);
        CHECK(c.policy.threshold == doctest::Approx(thresholds[id - 1]));
        CHECK(c.policy.window_s == doctest::Approx(windows[id - 1]));
        CHECK(c.policy.run_times_s == std::vector<double>{180.0, 300.0});
        CHECK(c.traffic.rng_seed == 9u);
    }
    CHECK_THROWS_AS(build_condition(7, 5), ConfigError);
    CHECK_THROWS_AS(build_condition(0, 5), ConfigError);
}

TEST_CASE("validate rejects broken specs") {
    TrafficSpec s = build_condition(1, 1).traffic;
    CHECK_NOTHROW(validate(s));
    auto broken = s;
    broken.arrival_rate_min_rps = 700;
    CHECK_THROWS_AS(validate(broken), ConfigError);
    broken = s;
    broken.normal_ip_count = 100;
    CHECK_THROWS_AS(validate(broken), ConfigError);
    broken = s;
    broken.effective_attack_probability = 0.5;
    CHECK_THROWS_AS(validate(broken), ConfigError);
    broken = s;
    broken.scan_paths = {"admin"};
    CHECK_THROWS_AS(validate(broken), ConfigError);
}

TEST_CASE("ip pool is unique and sized") {
    const TrafficSpec s = build_condition(1, 3).traffic;
    const IpPool pool = make_ip_pool(s);
    CHECK(pool.normal_ips.size() == 190);
    CHECK(pool.attacker_ips.size() == 10);
    std::set<Ipv4> all(pool.normal_ips.begin(), pool.normal_ips.end());
    all.insert(pool.attacker_ips.begin(), pool.attacker_ips.end());
    CHECK(all.size() == 200);
    for (const auto& ip : pool.attacker_ips) CHECK(pool.is_attacker(ip));
    for (const auto& ip : pool.normal_ips) CHECK(!pool.is_attacker(ip));

    const IpPool other = make_ip_pool(build_condition(1, 4).traffic);
    CHECK(other.attacker_ips != pool.attacker_ips);
}

namespace {

struct StreamCounts {
    std::size_t attacker = 0;
    std::size_t scans = 0;
    std::size_t flagged = 0;
};

StreamCounts count(const std::vector<RequestEvent>& events, const IpPool& pool, const TrafficSpec& spec) {
    StreamCounts c;
    const std::set<std::string> scan_paths(spec.scan_paths.begin(), spec.scan_paths.end());
    for (const auto& e : events) {
        const bool attacker = pool.is_attacker(e.source_ip);
        const bool scan = e.path != kHomePath;
        c.attacker += attacker;
        c.scans += scan;
        c.flagged += e.ground_truth_attack;
        // partition: normal homepage, attacker homepage, or attacker scan
        CHECK((!scan || attacker));
        CHECK(e.ground_truth_attack == scan);
        if (scan) CHECK(scan_paths.contains(e.path));
    }
    return c;
}

}  // namespace

TEST_CASE("condition-1 stream shares") {
    const TrafficSpec spec = build_condition(1, derive_seed(42, 1)).traffic;
    const IpPool pool = make_ip_pool(spec);
    const auto events = generate_stream(spec, pool);
    REQUIRE(events.size() == 200000);
    for (std::size_t i = 1; i < events.size(); ++i) REQUIRE(events[i - 1].t_arrival <= events[i].t_arrival);

    const StreamCounts c = count(events, pool, spec);
    const double n = static_cast<double>(events.size());
    CHECK(std::abs(static_cast<double>(c.flagged) / n - 0.12) <= 0.005);
    CHECK(std::abs(static_cast<double>(c.attacker) / n - 0.20) <= 3.0 * std::sqrt(0.2 * 0.8 / n));

    // 400..600 per second gives a 200000-request run of roughly 400 s
    CHECK(events.back().t_arrival > 300.0);
    CHECK(events.back().t_arrival < 510.0);
}

TEST_CASE("condition-4 stream shares") {
    const TrafficSpec spec = build_condition(4, derive_seed(42, 2)).traffic;
    const IpPool pool = make_ip_pool(spec);
    const auto events = generate_stream(spec, pool);
    const StreamCounts c = count(events, pool, spec);
    const double n = static_cast<double>(events.size());
    CHECK(std::abs(static_cast<double>(c.flagged) / n - 0.03) <= 0.003);
    CHECK(std::abs(static_cast<double>(c.attacker) / n - 0.20) <= 3.0 * std::sqrt(0.2 * 0.8 / n));
}

TEST_CASE("no attacker share means no attacks") {
    TrafficSpec spec = build_condition(1, 11).traffic;
    spec.attacker_traffic_share = 0.0;
    spec.effective_attack_probability = 0.0;
    spec.total_requests = 5000;
    const IpPool pool = make_ip_pool(spec);
    for (const auto& e : generate_stream(spec, pool)) {
        CHECK(!e.ground_truth_attack);
        CHECK(!pool.is_attacker(e.source_ip));
    }
}

TEST_CASE("per-second arrival counts stay in range") {
    TrafficSpec spec = build_condition(2, 13).traffic;
    spec.total_requests = 30000;
    const auto events = generate_stream(spec, make_ip_pool(spec));
    std::vector<int> per_second(200, 0);
    for (const auto& e : events) ++per_second[static_cast<std::size_t>(e.t_arrival)];
    const auto last = static_cast<std::size_t>(events.back().t_arrival);
    for (std::size_t s = 0; s < last; ++s) {
        CHECK(per_second[s] >= 400);
        CHECK(per_second[s] <= 600);
    }
}

TEST_CASE("streams are deterministic per seed") {
    TrafficSpec spec = build_condition(3, 21).traffic;
    spec.total_requests = 20000;
    const IpPool pool = make_ip_pool(spec);
    const auto a = generate_stream(spec, pool);
    const auto b = generate_stream(spec, make_ip_pool(spec));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].t_arrival == b[i].t_arrival);
        CHECK(a[i].source_ip == b[i].source_ip);
        CHECK(a[i].path == b[i].path);
    }
    spec.rng_seed = 22;
    const auto c = generate_stream(spec, make_ip_pool(spec));
    CHECK(c.front().t_arrival != a.front().t_arrival);
}

TEST_CASE("traffic spec json round-trip") {
    const TrafficSpec s = build_condition(5, 99).traffic;
    const nlohmann::json j = s;
    CHECK(j.at("arrival_rate_rps") == nlohmann::json::array({400, 600}));
    const TrafficSpec back = j.get<TrafficSpec>();
    CHECK(nlohmann::json(back) == j);
}

}
