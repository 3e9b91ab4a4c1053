#include "scalesentry/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "scalesentry/errors.hpp"

namespace scalesentry {

FeatureVector make_features(Ipv4 ip, RequestKind kind) noexcept {
    const auto o = ip.octets();
    return {o[0], o[1], o[2], o[3], static_cast<int>(kind)};
}

FeatureVector features_of(const LabeledRecord& r) noexcept {
    RequestKind kind = RequestKind::error_entry;
    if (r.origin == RecordOrigin::access) kind = r.path == "/" ? RequestKind::homepage : RequestKind::other_path;
    return make_features(r.xff_ip, kind);
}

void validate(const ForestParams& p) {
    if (p.n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (!(p.train_fraction > 0.0 && p.train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
    if (p.max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (p.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
    if (p.features_per_split < 1 || p.features_per_split > kFeatureCount)
        throw ConfigError("features_per_split must be in 1..5");
}

const TreeNode& DecisionTree::leaf_for(const FeatureVector& x) const {
    if (nodes_.empty()) throw ContractViolation("empty decision tree");
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf())
        node = &nodes_[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold
                                                     ? node->left
                                                     : node->right)];
    return *node;
}

double DecisionTree::predict(const FeatureVector& x) const { return leaf_for(x).positive_fraction; }

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::size_t deepest = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
        if (n.is_leaf()) {
            deepest = std::max(deepest, d);
        } else {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return deepest;
}

namespace {

struct Group {
    FeatureVector x;
    double pos = 0.0;
    double neg = 0.0;
};

/// N * Gini for a node holding pos/neg weight.
double weighted_gini(double pos, double neg) {
    const double n = pos + neg;
    return n > 0.0 ? 2.0 * pos * neg / n : 0.0;
}

class TreeBuilder {
public:
    TreeBuilder(std::vector<Group> groups, const TreeOptions& options, Rng& rng)
        : groups_(std::move(groups)), options_(options), rng_(rng) {}

    std::vector<TreeNode> build() {
        std::vector<int> all(groups_.size());
        std::iota(all.begin(), all.end(), 0);
        grow(all, 0);
        return std::move(nodes_);
    }

private:
    struct Split {
        int feature = -1;
        int threshold = 0;
        double impurity = std::numeric_limits<double>::infinity();
    };

    int grow(std::vector<int>& idx, std::size_t depth) {
        double pos = 0.0, neg = 0.0;
        for (int i : idx) {
            pos += groups_[static_cast<std::size_t>(i)].pos;
            neg += groups_[static_cast<std::size_t>(i)].neg;
        }
        const int id = static_cast<int>(nodes_.size());
        TreeNode leaf;
        leaf.sample_count = pos + neg;
        leaf.positive_fraction = leaf.sample_count > 0.0 ? pos / leaf.sample_count : 0.0;
        nodes_.push_back(leaf);

        const double min_leaf = static_cast<double>(options_.min_samples_leaf);
        if (depth >= options_.max_depth || pos == 0.0 || neg == 0.0 || pos + neg < 2.0 * min_leaf) return id;

        const Split best = find_split(idx, weighted_gini(pos, neg));
        if (best.feature < 0) return id;

        std::vector<int> left, right;
        for (int i : idx)
            (groups_[static_cast<std::size_t>(i)].x[static_cast<std::size_t>(best.feature)] <= best.threshold ? left
                                                                                                              : right)
                .push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    std::vector<int> sample_features() {
        std::array<int, kFeatureCount> order{};
        std::iota(order.begin(), order.end(), 0);
        const std::size_t m = std::min(options_.features_per_split, kFeatureCount);
        for (std::size_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::size_t>(rng_.below(kFeatureCount - i));
            std::swap(order[i], order[j]);
        }
        std::vector<int> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

    Split find_split(const std::vector<int>& idx, double parent_impurity) {
        Split best;
        const double min_leaf = static_cast<double>(options_.min_samples_leaf);
        double total_pos = 0.0, total_neg = 0.0;
        for (int i : idx) {
            total_pos += groups_[static_cast<std::size_t>(i)].pos;
            total_neg += groups_[static_cast<std::size_t>(i)].neg;
        }
        const double tolerance = 1e-12 * (total_pos + total_neg);

        std::vector<int> order = idx;
        for (int f : sample_features()) {
            const auto fu = static_cast<std::size_t>(f);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return groups_[static_cast<std::size_t>(a)].x[fu] < groups_[static_cast<std::size_t>(b)].x[fu];
            });
            double lp = 0.0, ln = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                const Group& g = groups_[static_cast<std::size_t>(order[k])];
                lp += g.pos;
                ln += g.neg;
                const int value = g.x[fu];
                if (groups_[static_cast<std::size_t>(order[k + 1])].x[fu] == value) continue;
                const double rp = total_pos - lp, rn = total_neg - ln;
                if (lp + ln < min_leaf || rp + rn < min_leaf) continue;
                const double impurity = weighted_gini(lp, ln) + weighted_gini(rp, rn);
                if (impurity < best.impurity - tolerance) best = Split{f, value, impurity};
            }
        }
        if (best.feature >= 0 && !(best.impurity < parent_impurity - tolerance)) return Split{};
        return best;
    }

    std::vector<Group> groups_;
    TreeOptions options_;
    Rng& rng_;
    std::vector<TreeNode> nodes_;
};

std::vector<Group> group_samples(std::span<const Sample> samples, std::span<const std::uint32_t> weights) {
    std::map<FeatureVector, Group> by_x;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double w = weights.empty() ? 1.0 : static_cast<double>(weights[i]);
        if (w == 0.0) continue;
        Group& g = by_x[samples[i].x];
        g.x = samples[i].x;
        (samples[i].label ? g.pos : g.neg) += w;
    }
    std::vector<Group> groups;
    groups.reserve(by_x.size());
    for (auto& [x, g] : by_x) groups.push_back(g);
    return groups;
}

}  // namespace

DecisionTree grow_tree(std::span<const Sample> samples, std::span<const std::uint32_t> weights,
                       const TreeOptions& options, Rng& rng) {
    if (!weights.empty() && weights.size() != samples.size())
        throw ContractViolation("weights must be empty or match samples");
    return DecisionTree(TreeBuilder(group_samples(samples, weights), options, rng).build());
}

double ForestModel::predict_proba(const FeatureVector& x) const {
    if (trees.empty()) throw ContractViolation("forest has no trees");
    double sum = 0.0;
    for (const auto& tree : trees) sum += tree.predict(x);
    return sum / static_cast<double>(trees.size());
}

double predict_proba(const ForestModel& model, const FeatureVector& x) { return model.predict_proba(x); }

double f1_score(std::span<const int> predictions, std::span<const int> truth) {
    if (predictions.size() != truth.size()) throw ContractViolation("f1: length mismatch");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predictions[i] && truth[i]) ++tp;
        else if (predictions[i]) ++fp;
        else if (truth[i]) ++fn;
    }
    if (tp == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

TrainResult train(std::span<const Sample> samples, const ForestParams& params) {
    validate(params);
    if (samples.empty()) throw ModelUnavailable("no labeled records to train on");

    const std::size_t n = samples.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(params.rng_seed, Stream::split));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[split_rng.below(i)]);

    const auto n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * params.train_fraction)), 1, n);
    std::vector<Sample> train_set, test_set;
    train_set.reserve(n_train);
    test_set.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? train_set : test_set).push_back(samples[order[i]]);

    TrainResult result;
    result.train_rows = train_set.size();
    result.test_rows = test_set.size();
    const bool has_pos = std::any_of(train_set.begin(), train_set.end(), [](const Sample& s) { return s.label; });
    const bool has_neg = std::any_of(train_set.begin(), train_set.end(), [](const Sample& s) { return !s.label; });
    result.degenerate = !(has_pos && has_neg);

    ForestModel& model = result.model;
    model.params = params;
    model.trees.resize(params.n_trees);
    const TreeOptions options{params.max_depth, params.min_samples_leaf, params.features_per_split};
    const std::uint64_t tree_root = derive_seed(params.rng_seed, Stream::tree);

    auto build_one = [&](std::size_t t) {
        Rng rng(derive_seed(tree_root, t));
        std::vector<std::uint32_t> counts;
        if (params.bootstrap) {
            counts.assign(train_set.size(), 0);
            for (std::size_t k = 0; k < train_set.size(); ++k) ++counts[rng.below(train_set.size())];
        }
        model.trees[t] = grow_tree(train_set, counts, options, rng);
    };

    std::size_t workers = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, params.n_trees);
    if (workers <= 1) {
        for (std::size_t t = 0; t < params.n_trees; ++t) build_one(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < params.n_trees; t = next++) build_one(t);
            });
    }

    if (!result.degenerate) {
        std::vector<int> predicted, truth;
        predicted.reserve(test_set.size());
        truth.reserve(test_set.size());
        for (const auto& s : test_set) {
            predicted.push_back(model.predict_proba(s.x) >= 0.5 ? 1 : 0);
            truth.push_back(s.label);
        }
        result.heldout_f1 = f1_score(predicted, truth);
    }
    model.heldout_f1 = result.heldout_f1;
    model.degenerate = result.degenerate;
    return result;
}

TrainResult train(std::span<const LabeledRecord> records, const ForestParams& params) {
    std::vector<Sample> samples;
    samples.reserve(records.size());
    for (const auto& r : records) samples.push_back(Sample{features_of(r), r.label});
    return train(samples, params);
}

std::vector<RankedIp> top_k_attackers(const ForestModel& model, std::span<const LabeledRecord> window_records,
                                      std::size_t k) {
    struct Candidate {
        double score = 0.0;
        std::size_t abnormal = 0;
        bool seen_home = false;
        bool seen_other = false;
    };
    std::map<Ipv4, Candidate> candidates;
    for (const auto& r : window_records) {
        Candidate& c = candidates[r.xff_ip];
        c.abnormal += static_cast<std::size_t>(r.label);
        if (r.origin != RecordOrigin::access) continue;
        const auto x = features_of(r);
        const bool home = x[4] == static_cast<int>(RequestKind::homepage);
        if (home ? c.seen_home : c.seen_other) continue;
        (home ? c.seen_home : c.seen_other) = true;
        c.score = std::max(c.score, model.predict_proba(x));
    }
    std::vector<RankedIp> ranked;
    ranked.reserve(candidates.size());
    for (const auto& [ip, c] : candidates) ranked.push_back(RankedIp{ip, c.score, c.abnormal});
    std::sort(ranked.begin(), ranked.end(), [](const RankedIp& a, const RankedIp& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.abnormal_count != b.abnormal_count) return a.abnormal_count > b.abnormal_count;
        return a.ip < b.ip;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

void to_json(nlohmann::json& j, const ForestParams& p) {
    j = nlohmann::json{{"n_trees", p.n_trees},
                       {"rng_seed", p.rng_seed},
                       {"max_depth", p.max_depth},
                       {"min_samples_leaf", p.min_samples_leaf},
                       {"features_per_split", p.features_per_split},
                       {"train_fraction", p.train_fraction},
                       {"bootstrap", p.bootstrap}};
}

void from_json(const nlohmann::json& j, ForestParams& p) {
    ForestParams out;
    out.n_trees = j.value("n_trees", out.n_trees);
    out.rng_seed = j.value("rng_seed", out.rng_seed);
    out.max_depth = j.value("max_depth", out.max_depth);
    out.min_samples_leaf = j.value("min_samples_leaf", out.min_samples_leaf);
    out.features_per_split = j.value("features_per_split", out.features_per_split);
    out.train_fraction = j.value("train_fraction", out.train_fraction);
    out.bootstrap = j.value("bootstrap", out.bootstrap);
    out.threads = p.threads;
    p = out;
}

namespace {
constexpr int kModelFormatVersion = 1;
}

nlohmann::json model_to_json(const ForestModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes())
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.positive_fraction, n.sample_count});
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    return nlohmann::json{{"format", "scalesentry-forest"},
                          {"version", kModelFormatVersion},
                          {"params", model.params},
                          {"heldout_f1", model.heldout_f1},
                          {"degenerate", model.degenerate},
                          {"node_layout", {"feature", "threshold", "left", "right", "positive_fraction", "sample_count"}},
                          {"trees", std::move(trees)}};
}

ForestModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "scalesentry-forest" || j.value("version", 0) != kModelFormatVersion)
        throw ConfigError("unsupported model file format");
    ForestModel model;
    model.params = j.at("params").get<ForestParams>();
    model.heldout_f1 = j.at("heldout_f1").get<double>();
    model.degenerate = j.value("degenerate", false);
    for (const auto& t : j.at("trees")) {
        std::vector<TreeNode> nodes;
        for (const auto& n : t.at("nodes"))
            nodes.push_back(TreeNode{n.at(0).get<int>(), n.at(1).get<int>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                     n.at(4).get<double>(), n.at(5).get<double>()});
        model.trees.emplace_back(std::move(nodes));
    }
    if (model.trees.size() != model.params.n_trees) throw ConfigError("model tree count does not match params");
    return model;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file " + path.string());
    out << model_to_json(model).dump() << '\n';
}

ForestModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read model file " + path.string());
    return model_from_json(nlohmann::json::parse(in));
}

}  // namespace scalesentry
