#include <cmath>

#include "suitmap/error.hpp"
#include "suitmap/learners.hpp"

namespace suitmap {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "suitmap.model";
constexpr int kVersion = 1;

json tree_to_json(const DecisionTree& t) {
    // Columnar node arrays keep forests compact.
    json feature = json::array(), threshold = json::array(), left = json::array(),
         right = json::array(), value = json::array(), samples = json::array(),
         impurity = json::array();
    for (const TreeNode& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
        samples.push_back(n.samples);
        impurity.push_back(n.impurity);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left},   {"right", right},
            {"value", value},     {"samples", samples},     {"impurity", impurity}};
}

DecisionTree tree_from_json(const json& j, std::size_t n_features) {
    DecisionTree t;
    const auto& feature = j.at("feature");
    const std::size_t n = feature.size();
    for (const char* key : {"threshold", "left", "right", "value", "samples", "impurity"})
        if (j.at(key).size() != n) throw Error(std::string("model tree column '") + key + "' has wrong length");
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        TreeNode& node = t.nodes[i];
        node.feature = feature[i].get<int>();
        node.threshold = j["threshold"][i].get<double>();
        node.left = j["left"][i].get<int>();
        node.right = j["right"][i].get<int>();
        node.value = j["value"][i].get<double>();
        node.samples = j["samples"][i].get<std::size_t>();
        node.impurity = j["impurity"][i].get<double>();
    }
    t.validate(n_features);
    return t;
}

}  // namespace

json training_config_to_json(const TrainingConfig& cfg) {
    return std::visit(
        [](const auto& c) -> json {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, TreeConfig>) {
                return {{"max_depth", c.max_depth},
                        {"min_samples_leaf", c.min_samples_leaf},
                        {"seed", c.seed}};
            } else if constexpr (std::is_same_v<C, ForestConfig>) {
                return {{"n_trees", c.n_trees},
                        {"max_depth", c.max_depth},
                        {"min_samples_leaf", c.min_samples_leaf},
                        {"max_features", c.max_features},
                        {"seed", c.seed},
                        {"bootstrap", c.bootstrap}};
            } else {
                return {{"learning_rate", c.learning_rate},
                        {"epochs", c.epochs},
                        {"l2", c.l2},
                        {"seed", c.seed}};
            }
        },
        cfg);
}

namespace {

TrainingConfig training_config_from_json(ModelKind kind, const json& j) {
    switch (kind) {
        case ModelKind::tree:
            return TreeConfig{j.at("max_depth").get<int>(), j.at("min_samples_leaf").get<std::size_t>(),
                              j.at("seed").get<std::uint64_t>()};
        case ModelKind::forest:
            return ForestConfig{j.at("n_trees").get<std::size_t>(),
                                j.at("max_depth").get<int>(),
                                j.at("min_samples_leaf").get<std::size_t>(),
                                j.at("max_features").get<std::size_t>(),
                                j.at("seed").get<std::uint64_t>(),
                                j.at("bootstrap").get<bool>()};
        case ModelKind::logistic:
            return LogisticConfig{j.at("learning_rate").get<double>(), j.at("epochs").get<int>(),
                                  j.at("l2").get<double>(), j.at("seed").get<std::uint64_t>()};
    }
    throw Error("unknown model kind");
}

}  // namespace

json model_to_json(const TrainedModel& m) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["kind"] = std::string(to_string(m.kind));
    j["feature_names"] = m.feature_names;
    j["config"] = training_config_to_json(m.config);
    json imp = json::array();
    for (std::size_t i = 0; i < m.importance.scores.size(); ++i)
        imp.push_back({{"feature", m.importance.names[i]}, {"score", m.importance.scores[i]}});
    j["importance"] = imp;
    if (m.suitability_weights) {
        json w = json::array();
        for (std::size_t i = 0; i < m.suitability_weights->size(); ++i)
            w.push_back({{"layer", m.suitability_weights->names[i]},
                         {"weight", m.suitability_weights->weights[i]}});
        j["suitability_weights"] = w;
    }
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, DecisionTree>) {
                j["tree"] = tree_to_json(p);
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                json trees = json::array();
                for (std::size_t t = 0; t < p.trees.size(); ++t) {
                    json tj = tree_to_json(p.trees[t]);
                    tj["seed"] = p.tree_seeds[t];
                    trees.push_back(std::move(tj));
                }
                j["trees"] = trees;
            } else {
                j["logistic"] = {{"weights", p.weights},
                                 {"bias", p.bias},
                                 {"means", p.means},
                                 {"scales", p.scales}};
            }
        },
        m.params);
    return j;
}

TrainedModel model_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != kFormat) throw Error("not a suitmap model document");
        if (j.at("version").get<int>() != kVersion)
            throw Error("unsupported model version " + j.at("version").dump());
        TrainedModel m;
        m.kind = model_kind_from_string(j.at("kind").get<std::string>());
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        const std::size_t k = m.feature_names.size();
        if (k == 0) throw Error("model has no features");
        m.config = training_config_from_json(m.kind, j.at("config"));
        for (const auto& e : j.at("importance")) {
            m.importance.names.push_back(e.at("feature").get<std::string>());
            m.importance.scores.push_back(e.at("score").get<double>());
        }
        m.importance.validate();
        if (j.contains("suitability_weights")) {
            WeightVector w;
            for (const auto& e : j["suitability_weights"]) {
                w.names.push_back(e.at("layer").get<std::string>());
                w.weights.push_back(e.at("weight").get<double>());
            }
            w.validate();
            m.suitability_weights = std::move(w);
        }
        switch (m.kind) {
            case ModelKind::tree: m.params = tree_from_json(j.at("tree"), k); break;
            case ModelKind::forest: {
                ForestParams fp;
                for (const auto& tj : j.at("trees")) {
                    fp.trees.push_back(tree_from_json(tj, k));
                    fp.tree_seeds.push_back(tj.at("seed").get<std::uint64_t>());
                }
                if (fp.trees.empty()) throw Error("forest model has no trees");
                m.params = std::move(fp);
                break;
            }
            case ModelKind::logistic: {
                const auto& lj = j.at("logistic");
                LogisticParams p{lj.at("weights").get<std::vector<double>>(), lj.at("bias").get<double>(),
                                 lj.at("means").get<std::vector<double>>(),
                                 lj.at("scales").get<std::vector<double>>()};
                if (p.weights.size() != k || p.means.size() != k || p.scales.size() != k)
                    throw Error("logistic model arrays do not match the feature count");
                for (double s : p.scales)
                    if (!(s > 0.0)) throw Error("logistic model has a non-positive scale");
                m.params = std::move(p);
                break;
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed model document: ") + e.what());
    }
}

json metrics_to_json(const MetricsReport& m) {
    return {{"accuracy", m.accuracy},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"confusion", {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}}}};
}

MetricsReport metrics_from_json(const json& j) {
    const auto& c = j.at("confusion");
    return metrics_from_confusion(c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                                  c.at("fn").get<std::size_t>(), c.at("tn").get<std::size_t>());
}

}  // namespace suitmap
