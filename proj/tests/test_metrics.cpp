#include <doctest.h>

#include <sstream>

#include "oracles/property_suites.hpp"
#include "scalesentry/errors.hpp"
#include "scalesentry/metrics.hpp"

using namespace scalesentry;

namespace {

Labels service(int code) { return Labels{Tier::service, classify(code), code}; }

const Selector kService5xx{Tier::service, StatusClass::server_5xx, std::nullopt};

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("status classes") {
    CHECK(classify(200) == StatusClass::ok_2xx);
    CHECK(classify(404) == StatusClass::client_4xx);
    CHECK(classify(403) == StatusClass::client_4xx);
    CHECK(classify(499) == StatusClass::client_closed_499);
    CHECK(classify(503) == StatusClass::server_5xx);
    CHECK(classify(500) == StatusClass::server_5xx);
}

TEST_CASE("record grows the store and rejects time going backwards") {
    CounterStore store;
    CHECK(store.increase(kService5xx, {}, 1000.0) == 0);
    store.record(0.0, service(503));
    CHECK(store.size() == 1);
    for (int i = 1; i < 100; ++i) store.record(i, service(200));
    CHECK(store.size() == 100);
    CHECK_THROWS_AS(store.record(50.0, service(503)), ContractViolation);
    CHECK_NOTHROW(store.record(99.0, service(503)));
}

TEST_CASE("one 5xx per second over a five-minute window") {
    CounterStore store;
    CounterStore shifted;
    for (int t = 1; t <= 300; ++t) shifted.record(t, service(503));
    CHECK(shifted.increase(kService5xx, QueryWindow{300}, 300.0) == 300);

    // t = 0 sits on the open edge of (0, 300]
    for (int t = 0; t < 300; ++t) store.record(t, service(503));
    CHECK(store.increase(kService5xx, QueryWindow{300}, 300.0) == 299);
    CHECK(store.increase(kService5xx, QueryWindow{300}, 299.0) == 300);
    CHECK(store.increase(kService5xx, QueryWindow{300}, 598.5) == 1);
    CHECK(store.increase(kService5xx, QueryWindow{300}, 599.0) == 0);
}

TEST_CASE("51 events in the window trip the strict threshold") {
    CounterStore store;
    for (int i = 0; i < 51; ++i) store.record(100.0 + i, service(503));
    const auto v = store.increase(kService5xx, QueryWindow{300}, 300.0);
    CHECK(v == 51);
    CHECK(v > 50);
}

TEST_CASE("selectors are additive and windows are monotone") {
    CounterStore store;
    const int codes[] = {200, 404, 499, 503};
    for (int i = 0; i < 400; ++i) {
        store.record(i * 0.5, service(codes[i % 4]));
        store.record(i * 0.5, Labels{Tier::honeypot, classify(404), 404});
    }
    const double now = 150.0;
    std::size_t sum = 0;
    for (int c : codes) sum += store.increase(Selector{Tier::service, classify(c), std::nullopt}, {60}, now);
    CHECK(sum == store.increase(Selector{Tier::service, std::nullopt, std::nullopt}, {60}, now));
    CHECK(store.increase(Selector{}, {30}, now) <= store.increase(Selector{}, {60}, now));
    CHECK(store.increase(Selector{Tier::honeypot, std::nullopt, 404}, {10}, now) == 20);
}

TEST_CASE("increase equals the naive count") {
    CHECK(oracle::counter_oracle_suite(1000, 200, 77) == "");
    CHECK(oracle::counter_oracle_suite(5, 10000, 78) == "");
}

TEST_CASE("csv export carries cumulative counts") {
    CounterStore store;
    store.record(1.0, service(503));
    store.record(1.0, service(503));
    store.record(2.0, service(503));
    store.record(2.0, service(200));
    std::ostringstream out;
    store.export_csv(out);
    CHECK(out.str() ==
          "t,tier,status_class,status_code,count_cumulative\n"
          "1,service,5xx,503,2\n"
          "2,service,2xx,200,1\n"
          "2,service,5xx,503,3\n");
}

}
