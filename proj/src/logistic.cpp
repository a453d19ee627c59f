#include <cmath>

#include "suitmap/error.hpp"
#include "learners_internal.hpp"

namespace suitmap {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

LossGradient logistic_loss_gradient(const FeatureMatrix& Z, std::span<const int> y,
                                    std::span<const double> w, double b, double l2) {
    const std::size_t n = Z.rows(), k = Z.cols();
    LossGradient out;
    out.grad_w.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = Z.row(i);
        double z = b;
        for (std::size_t j = 0; j < k; ++j) z += w[j] * row[j];
        out.loss += softplus(z) - (y[i] == 1 ? z : 0.0);
        const double resid = sigmoid(z) - (y[i] == 1 ? 1.0 : 0.0);
        for (std::size_t j = 0; j < k; ++j) out.grad_w[j] += resid * row[j];
        out.grad_b += resid;
    }
    const double inv = 1.0 / static_cast<double>(n);
    out.loss *= inv;
    out.grad_b *= inv;
    for (std::size_t j = 0; j < k; ++j) {
        out.grad_w[j] = out.grad_w[j] * inv + l2 * w[j];
        out.loss += 0.5 * l2 * w[j] * w[j];
    }
    return out;
}

TrainedModel train_logistic(const SampleSet& train, const LogisticConfig& cfg) {
    const std::size_t n = train.size(), k = train.X.cols();
    if (n == 0 || k == 0 || k != train.feature_names.size())
        throw Error("training set is empty or has inconsistent feature columns");
    const std::size_t pos = train.count_class(1);
    if (pos == 0 || pos == n) throw Error("single-class input: both labels are required");
    if (!(cfg.learning_rate > 0.0) || cfg.epochs < 0 || !(cfg.l2 >= 0.0))
        throw Error("invalid logistic regression hyperparameters");

    LogisticParams p;
    p.means.assign(k, 0.0);
    p.scales.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) p.means[j] += train.X(i, j);
    for (double& m : p.means) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double d = train.X(i, j) - p.means[j];
            p.scales[j] += d * d;
        }
    for (double& s : p.scales) {
        s = std::sqrt(s / static_cast<double>(n));
        if (!(s > 1e-12)) s = 1.0;  // constant feature
    }

    FeatureMatrix Z(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) Z(i, j) = (train.X(i, j) - p.means[j]) / p.scales[j];

    p.weights.assign(k, 0.0);
    for (int e = 0; e < cfg.epochs; ++e) {
        const LossGradient g = logistic_loss_gradient(Z, train.y, p.weights, p.bias, cfg.l2);
        for (std::size_t j = 0; j < k; ++j) p.weights[j] -= cfg.learning_rate * g.grad_w[j];
        p.bias -= cfg.learning_rate * g.grad_b;
    }

    std::vector<double> raw(k);
    for (std::size_t j = 0; j < k; ++j) raw[j] = std::abs(p.weights[j]);

    TrainedModel m;
    m.kind = ModelKind::logistic;
    m.feature_names = train.feature_names;
    m.importance = ImportanceVector::from_raw(train.feature_names, std::move(raw));
    m.config = cfg;
    m.params = std::move(p);
    return m;
}

double logistic_probability(const LogisticParams& p, std::span<const double> x) {
    double z = p.bias;
    for (std::size_t j = 0; j < p.weights.size(); ++j)
        z += p.weights[j] * (x[j] - p.means[j]) / p.scales[j];
    return sigmoid(z);
}

}  // namespace suitmap
