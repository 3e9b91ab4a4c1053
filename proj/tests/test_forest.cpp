#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "oracles/property_suites.hpp"
#include "scalesentry/errors.hpp"
#include "scalesentry/forest.hpp"

using namespace scalesentry;

namespace {

/// Attackers live in 200.x.x.x and only scan; normal users live below 100.
std::vector<Sample> separable_corpus(std::size_t rows, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < rows; ++i) {
        const bool attacker = rng.chance(0.15);
        const Ipv4 ip = attacker ? Ipv4(200, 1, 1, static_cast<std::uint8_t>(rng.below(10)))
                                 : Ipv4(static_cast<std::uint8_t>(1 + rng.below(99)), static_cast<std::uint8_t>(rng.below(256)),
                                        static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)));
        out.push_back({make_features(ip, attacker ? RequestKind::other_path : RequestKind::homepage), attacker ? 1 : 0});
    }
    return out;
}

ForestParams small_params(std::size_t trees = 20) {
    ForestParams p;
    p.n_trees = trees;
    return p;
}

}  // namespace

TEST_SUITE("forest") {

TEST_CASE("f1 hand-computed cases") {
    // TP=8 FP=2 FN=2 TN=3
    std::vector<int> pred, truth;
    for (int i = 0; i < 8; ++i) pred.push_back(1), truth.push_back(1);
    for (int i = 0; i < 2; ++i) pred.push_back(1), truth.push_back(0);
    for (int i = 0; i < 2; ++i) pred.push_back(0), truth.push_back(1);
    for (int i = 0; i < 3; ++i) pred.push_back(0), truth.push_back(0);
    CHECK(f1_score(pred, truth) == doctest::Approx(0.8));

    const std::vector<int> same{1, 0, 1, 1, 0};
    CHECK(f1_score(same, same) == doctest::Approx(1.0));
    const std::vector<int> zeros(5, 0);
    CHECK(f1_score(zeros, same) == 0.0);
    CHECK(f1_score(zeros, zeros) == 0.0);
    const std::vector<int> short_one{1};
    CHECK_THROWS_AS(f1_score(short_one, same), ContractViolation);
}

TEST_CASE("f1 stays in [0, 1] and hits 1 only on a perfect positive match") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = static_cast<std::size_t>(rng.between(1, 30));
        std::vector<int> p(n), t(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = rng.chance(0.5);
            t[i] = rng.chance(0.5);
        }
        const double f = f1_score(p, t);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        bool perfect = std::count(t.begin(), t.end(), 1) > 0;
        for (std::size_t i = 0; i < n; ++i) perfect = perfect && (p[i] == t[i] || (p[i] == 0 && t[i] == 0));
        CHECK((f == 1.0) == perfect);
    }
}

TEST_CASE("empty table has no model") {
    CHECK_THROWS_AS(train(std::span<const Sample>{}, small_params()), ModelUnavailable);
}

TEST_CASE("one-class corpus is degenerate") {
    std::vector<Sample> rows = separable_corpus(300, 1);
    for (auto& r : rows) r.label = 0;
    const TrainResult r = train(rows, small_params());
    CHECK(r.degenerate);
    CHECK(r.heldout_f1 == 0.0);
    for (const auto& tree : r.model.trees)
        for (const auto& node : tree.nodes())
            if (node.is_leaf()) CHECK(node.positive_fraction == 0.0);
    for (const auto& s : rows) CHECK(r.model.predict_proba(s.x) == 0.0);
}

TEST_CASE("separable corpus is learned exactly") {
    const auto rows = separable_corpus(2000, 2);
    const TrainResult r = train(rows, small_params(100));
    CHECK(!r.degenerate);
    CHECK(r.train_rows == 1600);
    CHECK(r.test_rows == 400);
    CHECK(r.heldout_f1 == doctest::Approx(1.0));
    // every row, including each held-out row, lands on the right side of 0.5
    for (const auto& s : rows) CHECK((r.model.predict_proba(s.x) >= 0.5) == (s.label == 1));
    // pure attacker region
    CHECK(r.model.predict_proba(make_features(Ipv4(200, 1, 1, 3), RequestKind::other_path)) == doctest::Approx(1.0));
}

TEST_CASE("ensemble probability lies between its trees") {
    const auto rows = separable_corpus(500, 5);
    auto noisy = rows;
    Rng rng(8);
    for (auto& s : noisy)
        if (rng.chance(0.1)) s.label ^= 1;
    const TrainResult r = train(noisy, small_params(30));
    for (const auto& s : noisy) {
        double lo = 1.0, hi = 0.0;
        for (const auto& tree : r.model.trees) {
            lo = std::min(lo, tree.predict(s.x));
            hi = std::max(hi, tree.predict(s.x));
        }
        const double p = r.model.predict_proba(s.x);
        CHECK(p >= lo - 1e-12);
        CHECK(p <= hi + 1e-12);
    }
}

TEST_CASE("single-tree forest equals its tree") {
    const auto rows = separable_corpus(300, 6);
    const TrainResult r = train(rows, small_params(1));
    REQUIRE(r.model.trees.size() == 1);
    for (const auto& s : rows) CHECK(r.model.predict_proba(s.x) == r.model.trees[0].leaf_for(s.x).positive_fraction);
}

TEST_CASE("trees respect max depth") {
    auto p = small_params(10);
    p.max_depth = 3;
    auto rows = separable_corpus(800, 9);
    Rng rng(1);
    for (auto& s : rows)
        if (rng.chance(0.2)) s.label ^= 1;
    for (const auto& tree : train(rows, p).model.trees) CHECK(tree.depth() <= 3);
}

TEST_CASE("training is deterministic and thread-count independent") {
    auto rows = separable_corpus(1500, 10);
    Rng rng(2);
    for (auto& s : rows)
        if (rng.chance(0.05)) s.label ^= 1;
    auto p = small_params(40);
    p.threads = 1;
    const TrainResult a = train(rows, p);
    p.threads = 8;
    const TrainResult b = train(rows, p);
    CHECK(a.model.trees == b.model.trees);
    CHECK(a.heldout_f1 == b.heldout_f1);
    p.rng_seed = 43;
    CHECK(train(rows, p).model.trees != a.model.trees);
}

TEST_CASE("depth-1 trees match the brute-force Gini stump") {
    CHECK(oracle::stump_oracle_suite(50, 200, 11) == "");
}

TEST_CASE("ranking with only normal traffic still returns everyone") {
    const auto corpus = separable_corpus(1000, 12);
    const TrainResult r = train(corpus, small_params());
    std::vector<LabeledRecord> window;
    for (const auto& s : corpus) {
        if (s.label == 1 || window.size() == 15) continue;
        LabeledRecord rec;
        rec.xff_ip = Ipv4(static_cast<std::uint8_t>(s.x[0]), static_cast<std::uint8_t>(s.x[1]),
                          static_cast<std::uint8_t>(s.x[2]), static_cast<std::uint8_t>(s.x[3]));
        rec.path = "/";
        rec.status = 200;
        rec.t = static_cast<double>(window.size());
        window.push_back(rec);
    }
    const auto ranked = top_k_attackers(r.model, window, 10);
    CHECK(ranked.size() == 10);
    for (const auto& x : ranked) CHECK(x.score < 0.05);
    CHECK(top_k_attackers(r.model, std::span(window).first(4), 10).size() == 4);
}

TEST_CASE("ranking order: score, then abnormal count, then ip") {
    const TrainResult r = train(separable_corpus(1000, 13), small_params());
    auto rec = [](Ipv4 ip, const char* path, int status, int label) {
        LabeledRecord x;
        x.xff_ip = ip;
        x.path = path;
        x.status = status;
        x.label = label;
        return x;
    };
    std::vector<LabeledRecord> window{
        rec(Ipv4(200, 1, 1, 4), "/admin", 404, 1), rec(Ipv4(200, 1, 1, 2), "/admin", 404, 1),
        rec(Ipv4(200, 1, 1, 2), "/data", 404, 1),  rec(Ipv4(200, 1, 1, 1), "/login", 404, 1),
        rec(Ipv4(20, 1, 1, 1), "/", 200, 0),
    };
    const auto ranked = top_k_attackers(r.model, window, 10);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].ip == Ipv4(200, 1, 1, 2));  // two abnormal records
    CHECK(ranked[1].ip == Ipv4(200, 1, 1, 1));
    CHECK(ranked[2].ip == Ipv4(200, 1, 1, 4));
    CHECK(ranked[3].ip == Ipv4(20, 1, 1, 1));
}

TEST_CASE("model survives a JSON round-trip") {
    const TrainResult r = train(separable_corpus(600, 14), small_params(5));
    const auto path = std::filesystem::temp_directory_path() / "scalesentry-model-test.json";
    save_model(r.model, path);
    const ForestModel back = load_model(path);
    std::filesystem::remove(path);
    CHECK(back.trees == r.model.trees);
    CHECK(back.params.n_trees == 5);
    CHECK(back.heldout_f1 == r.model.heldout_f1);
    CHECK_THROWS(model_from_json(nlohmann::json{{"format", "other"}}));
}

TEST_CASE("bad parameters are rejected") {
    ForestParams p;
    p.n_trees = 0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.train_fraction = 1.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.features_per_split = 6;
    CHECK_THROWS_AS(validate(p), ConfigError);
}

}
