#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "scalesentry/ipv4.hpp"
#include "scalesentry/logpipe.hpp"
#include "scalesentry/rng.hpp"

namespace scalesentry {

/// What kind of log entry a row came from; an ordinal feature next to the IP.
enum class RequestKind : int { homepage = 0, other_path = 1, error_entry = 2 };

/// The four IPv4 octets of the X-Forwarded-For address followed by the request kind.
inline constexpr std::size_t kFeatureCount = 5;
using FeatureVector = std::array<int, kFeatureCount>;

FeatureVector make_features(Ipv4 ip, RequestKind kind) noexcept;
FeatureVector features_of(const LabeledRecord& record) noexcept;

struct Sample {
    FeatureVector x{};
    int label = 0;
};

struct ForestParams {
    std::size_t n_trees = 100;
    std::uint64_t rng_seed = 42;
    std::size_t max_depth = 12;
    std::size_t min_samples_leaf = 1;
    std::size_t features_per_split = 3;  // ceil(sqrt(5))
    double train_fraction = 0.8;
    bool bootstrap = true;
    std::size_t threads = 0;  ///< 0 = hardware concurrency; never changes results
};

void validate(const ForestParams& params);

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    int threshold = 0; ///< go left iff x[feature] <= threshold
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
    double sample_count = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// CART tree over integer features; nodes[0] is the root.
class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    /// Positive fraction of the leaf `x` falls into.
    double predict(const FeatureVector& x) const;
    const TreeNode& leaf_for(const FeatureVector& x) const;
    std::size_t depth() const;
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

struct TreeOptions {
    std::size_t max_depth = 12;
    std::size_t min_samples_leaf = 1;
    std::size_t features_per_split = kFeatureCount;
};

/// Grows one tree with Gini impurity. `weights[i]` is the multiplicity of
/// samples[i] (bootstrap counts); empty weights means every sample counts once.
/// Candidate features per node are drawn from `rng`; among them the split with the
/// lowest weighted child impurity wins, ties going to the lower feature index and
/// then the lower threshold. Thresholds are the lower value of adjacent distinct
/// feature values, which is equivalent to splitting at their midpoint.
DecisionTree grow_tree(std::span<const Sample> samples, std::span<const std::uint32_t> weights,
                       const TreeOptions& options, Rng& rng);

struct ForestModel {
    ForestParams params;
    std::vector<DecisionTree> trees;
    double heldout_f1 = 0.0;
    bool degenerate = false;

    double predict_proba(const FeatureVector& x) const;
};

struct TrainResult {
    ForestModel model;
    double heldout_f1 = 0.0;
    bool degenerate = false;  ///< only one label present in the training split
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

/// Seeded 80/20 shuffle split, bootstrap per tree, held-out F1 at a 0.5 cut.
/// Throws ModelUnavailable on an empty table.
TrainResult train(std::span<const Sample> samples, const ForestParams& params);
TrainResult train(std::span<const LabeledRecord> records, const ForestParams& params);

double predict_proba(const ForestModel& model, const FeatureVector& x);

/// F1 of the positive class; 0 when precision + recall is 0.
double f1_score(std::span<const int> predictions, std::span<const int> truth);

struct RankedIp {
    Ipv4 ip;
    double score = 0.0;               ///< predicted future attack probability
    std::size_t abnormal_count = 0;   ///< label-1 records in the window

    friend bool operator==(const RankedIp&, const RankedIp&) = default;
};

/// Ranks the distinct IPs of `window_records`. An IP's score is the highest
/// forest probability among its access records in the window (IPs seen only in
/// error entries score 0). Ordered by score desc, abnormal count desc, IP asc;
/// truncated to k.
std::vector<RankedIp> top_k_attackers(const ForestModel& model, std::span<const LabeledRecord> window_records,
                                      std::size_t k = 10);

void to_json(nlohmann::json& j, const ForestParams& params);
void from_json(const nlohmann::json& j, ForestParams& params);
nlohmann::json model_to_json(const ForestModel& model);
ForestModel model_from_json(const nlohmann::json& j);
void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace scalesentry
