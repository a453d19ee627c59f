#include <algorithm>
#include <cmath>
#include <numeric>

#include "suitmap/error.hpp"
#include "learners_internal.hpp"

namespace suitmap {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::tree: return "tree";
        case ModelKind::forest: return "forest";
        case ModelKind::logistic: return "logistic";
    }
    return "unknown";
}

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "tree") return ModelKind::tree;
    if (s == "forest") return ModelKind::forest;
    if (s == "logistic") return ModelKind::logistic;
    throw Error("unknown model kind '" + std::string(s) + "'");
}

ModelKind kind_of(const TrainingConfig& cfg) {
    return static_cast<ModelKind>(cfg.index());
}

TrainedModel train_model(const SampleSet& train, const TrainingConfig& cfg) {
    return std::visit(
        [&](const auto& c) -> TrainedModel {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, TreeConfig>) return train_tree(train, c);
            else if constexpr (std::is_same_v<C, ForestConfig>) return train_forest(train, c);
            else return train_logistic(train, c);
        },
        cfg);
}

// ---------------------------------------------------------------------------

ImportanceVector ImportanceVector::uniform(std::vector<std::string> names) {
    ImportanceVector v;
    v.scores.assign(names.size(), names.empty() ? 0.0 : 1.0 / static_cast<double>(names.size()));
    v.names = std::move(names);
    return v;
}

ImportanceVector ImportanceVector::from_raw(std::vector<std::string> names, std::vector<double> raw) {
    if (names.size() != raw.size()) throw Error("importance names and scores differ in length");
    double total = 0.0;
    for (double& r : raw) {
        if (!std::isfinite(r) || r < 0.0) r = 0.0;
        total += r;
    }
    if (!(total > 0.0)) return uniform(std::move(names));
    ImportanceVector v;
    v.names = std::move(names);
    v.scores = std::move(raw);
    for (double& s : v.scores) s /= total;
    return v;
}

void ImportanceVector::validate() const {
    if (names.size() != scores.size() || scores.empty())
        throw Error("importance vector is empty or has mismatched names");
    double total = 0.0;
    for (double s : scores) {
        if (!std::isfinite(s) || s < 0.0) throw Error("importance scores must be nonnegative");
        total += s;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("importance scores must sum to 1");
}

std::size_t ImportanceVector::argmax() const {
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

// ---------------------------------------------------------------------------

double predict_proba(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.n_features())
        throw Error("feature width " + std::to_string(x.size()) + " does not match model width " +
                    std::to_string(model.n_features()));
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, DecisionTree>) {
                return p.predict(x);
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                double acc = 0.0;
                for (const auto& t : p.trees) acc += t.predict(x);
                return acc / static_cast<double>(p.trees.size());
            } else {
                return logistic_probability(p, x);
            }
        },
        model.params);
}

std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& X) {
    if (X.cols() != model.n_features() && X.rows() > 0)
        throw Error("feature width " + std::to_string(X.cols()) + " does not match model width " +
                    std::to_string(model.n_features()));
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_proba(model, X.row(i));
    return out;
}

MetricsReport metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    MetricsReport m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    const auto d = [](std::size_t v) { return static_cast<double>(v); };
    const std::size_t total = tp + fp + fn + tn;
    m.accuracy = total ? d(tp + tn) / d(total) : 0.0;
    m.precision = tp + fp ? d(tp) / d(tp + fp) : 0.0;
    m.recall = tp + fn ? d(tp) / d(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

MetricsReport evaluate(const TrainedModel& model, const SampleSet& test) {
    if (test.size() == 0) throw Error("cannot evaluate on an empty test set");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const bool pred = predict_proba(model, test.X.row(i)) >= 0.5;
        const bool truth = test.y[i] == 1;
        if (pred && truth) ++tp;
        else if (pred) ++fp;
        else if (truth) ++fn;
        else ++tn;
    }
    return metrics_from_confusion(tp, fp, fn, tn);
}

ImportanceVector feature_importance(const TrainedModel& model) { return model.importance; }

std::size_t select_best_index(std::span<const EvaluatedModel> models) {
    if (models.empty()) throw Error("no models to select from");
    auto key = [](const MetricsReport& m) {
        return std::make_tuple(m.f1, m.accuracy, m.precision, m.recall);
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < models.size(); ++i)
        if (key(models[i].metrics) > key(models[best].metrics)) best = i;
    return best;
}

TrainedModel select_best(std::span<const EvaluatedModel> models) {
    return models[select_best_index(models)].model;
}

}  // namespace suitmap
