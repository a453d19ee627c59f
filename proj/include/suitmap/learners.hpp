#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "suitmap/dataset.hpp"
#include "suitmap/overlay.hpp"

namespace suitmap {

enum class ModelKind { tree, forest, logistic };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);

struct TreeConfig {
    int max_depth = 12;
    std::size_t min_samples_leaf = 2;
    std::uint64_t seed = 1;
    bool operator==(const TreeConfig&) const = default;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    int max_depth = 12;
    std::size_t min_samples_leaf = 2;
    std::size_t max_features = 0;  // 0 = ceil(sqrt(K))
    std::uint64_t seed = 1;
    bool bootstrap = true;         // false trains every tree on the full set
    bool operator==(const ForestConfig&) const = default;
};

struct LogisticConfig {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2 = 1e-4;
    std::uint64_t seed = 1;  // weights start at zero; kept for config symmetry
    bool operator==(const LogisticConfig&) const = default;
};

using TrainingConfig = std::variant<TreeConfig, ForestConfig, LogisticConfig>;

ModelKind kind_of(const TrainingConfig& cfg);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // class-1 fraction of the training rows reaching the node
    std::size_t samples = 0;
    double impurity = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

// Flat CART tree; node 0 is the root, rows with x[feature] <= threshold go left.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    std::size_t leaf_index(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }
    // Unnormalized mean decrease in impurity per feature.
    std::vector<double> raw_importance(std::size_t n_features) const;
    int depth() const;
    // Acyclic, every internal node has two in-range children, fractions in [0,1].
    void validate(std::size_t n_features) const;

    bool operator==(const DecisionTree&) const = default;
};

struct ForestParams {
    std::vector<DecisionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
    bool operator==(const ForestParams&) const = default;
};

struct LogisticParams {
    std::vector<double> weights;  // on standardized features
    double bias = 0.0;
    std::vector<double> means;
    std::vector<double> scales;
    bool operator==(const LogisticParams&) const = default;
};

struct ImportanceVector {
    std::vector<std::string> names;
    std::vector<double> scores;

    static ImportanceVector uniform(std::vector<std::string> names);
    // Normalizes `raw` to sum 1; an all-zero vector becomes uniform.
    static ImportanceVector from_raw(std::vector<std::string> names, std::vector<double> raw);
    void validate() const;
    std::size_t argmax() const;
    bool operator==(const ImportanceVector&) const = default;
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    bool operator==(const MetricsReport&) const = default;
};

struct TrainedModel {
    ModelKind kind = ModelKind::tree;
    std::vector<std::string> feature_names;
    ImportanceVector importance;
    TrainingConfig config;
    std::variant<DecisionTree, ForestParams, LogisticParams> params;
    // Layer weights of the suitability map the model was trained on, when known.
    std::optional<WeightVector> suitability_weights;

    std::size_t n_features() const noexcept { return feature_names.size(); }
    bool operator==(const TrainedModel&) const = default;
};

double gini(std::size_t positives, std::size_t n);

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double child_impurity = 0.0;  // sample-weighted mean Gini of the children
    std::size_t left_count = 0;
};

// Best split of `rows` (duplicates allowed) over `features` (ascending):
// minimal child impurity, ties to lower feature then lower threshold.
std::optional<Split> find_best_split(const FeatureMatrix& X, std::span<const int> y,
                                     std::span<const std::size_t> rows,
                                     std::span<const std::size_t> features,
                                     std::size_t min_samples_leaf);

TrainedModel train_tree(const SampleSet& train, const TreeConfig& cfg);
// threads = 0 picks hardware concurrency; results do not depend on it.
TrainedModel train_forest(const SampleSet& train, const ForestConfig& cfg, unsigned threads = 0);
TrainedModel train_logistic(const SampleSet& train, const LogisticConfig& cfg);
TrainedModel train_model(const SampleSet& train, const TrainingConfig& cfg);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

// Mean logistic loss plus (l2/2)*|w|^2 over already-standardized features.
LossGradient logistic_loss_gradient(const FeatureMatrix& Z, std::span<const int> y,
                                    std::span<const double> w, double b, double l2);

double predict_proba(const TrainedModel& model, std::span<const double> x);
std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& X);

MetricsReport metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
MetricsReport evaluate(const TrainedModel& model, const SampleSet& test);

ImportanceVector feature_importance(const TrainedModel& model);

struct EvaluatedModel {
    TrainedModel model;
    MetricsReport metrics;
};

// Argmax by F1, then accuracy, precision, recall, then list order.
std::size_t select_best_index(std::span<const EvaluatedModel> models);
TrainedModel select_best(std::span<const EvaluatedModel> models);

// Versioned JSON persistence.
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
nlohmann::json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);
nlohmann::json training_config_to_json(const TrainingConfig& cfg);

}  // namespace suitmap
