#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "suitmap/error.hpp"
#include "suitmap/learners.hpp"
#include "suitmap/random.hpp"

namespace suitmap {

double gini(std::size_t positives, std::size_t n) {
    if (n == 0) return 0.0;
    const double p1 = static_cast<double>(positives) / static_cast<double>(n);
    const double p0 = 1.0 - p1;
    return 1.0 - p0 * p0 - p1 * p1;
}

std::optional<Split> find_best_split(const FeatureMatrix& X, std::span<const int> y,
                                     std::span<const std::size_t> rows,
                                     std::span<const std::size_t> features,
                                     std::size_t min_samples_leaf) {
    const std::size_t n = rows.size();
    const std::size_t msl = std::max<std::size_t>(min_samples_leaf, 1);
    if (n < 2 * msl) return std::nullopt;

    std::size_t total_pos = 0;
    for (std::size_t r : rows) total_pos += static_cast<std::size_t>(y[r] == 1);

    std::optional<Split> best;
    std::vector<std::pair<double, int>> col(n);
    for (std::size_t f : features) {
        for (std::size_t i = 0; i < n; ++i) col[i] = {X(rows[i], f), y[rows[i]]};
        std::sort(col.begin(), col.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t left_pos = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_pos += static_cast<std::size_t>(col[i].second == 1);
            if (col[i].first == col[i + 1].first) continue;
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < msl || nr < msl) continue;
            const double imp = (static_cast<double>(nl) * gini(left_pos, nl) +
                                static_cast<double>(nr) * gini(total_pos - left_pos, nr)) /
                               static_cast<double>(n);
            if (!best || imp < best->child_impurity - 1e-12) {
                double thr = 0.5 * (col[i].first + col[i + 1].first);
                if (!(thr < col[i + 1].first)) thr = col[i].first;
                best = Split{static_cast<int>(f), thr, imp, nl};
            }
        }
    }
    return best;
}

namespace {

struct GrowParams {
    int max_depth;
    std::size_t min_samples_leaf;
    std::size_t max_features;  // == K means every feature at every node
};

class TreeGrower {
public:
    TreeGrower(const SampleSet& s, GrowParams p, Rng* rng) : s_(s), p_(p), rng_(rng) {
        all_features_.resize(s.X.cols());
        std::iota(all_features_.begin(), all_features_.end(), 0);
    }

    DecisionTree grow(std::vector<std::size_t> rows) {
        tree_.nodes.clear();
        build(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int build(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::size_t pos = 0;
        for (std::size_t r : rows) pos += static_cast<std::size_t>(s_.y[r] == 1);
        {
            TreeNode& node = tree_.nodes.back();
            node.samples = rows.size();
            node.value = rows.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(rows.size());
            node.impurity = gini(pos, rows.size());
        }
        if (depth >= p_.max_depth || pos == 0 || pos == rows.size()) return id;

        std::optional<Split> split =
            find_best_split(s_.X, s_.y, rows, node_features(), p_.min_samples_leaf);
        if (!split) return id;

        std::vector<std::size_t> left, right;
        left.reserve(split->left_count);
        right.reserve(rows.size() - split->left_count);
        for (std::size_t r : rows)
            (s_.X(r, static_cast<std::size_t>(split->feature)) <= split->threshold ? left : right)
                .push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        tree_.nodes[static_cast<std::size_t>(id)].feature = split->feature;
        tree_.nodes[static_cast<std::size_t>(id)].threshold = split->threshold;
        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        tree_.nodes[static_cast<std::size_t>(id)].left = l;
        tree_.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    std::span<const std::size_t> node_features() {
        const std::size_t k = all_features_.size();
        if (p_.max_features >= k || rng_ == nullptr) return all_features_;
        subset_ = all_features_;
        rng_->partial_shuffle(subset_, p_.max_features);
        subset_.resize(p_.max_features);
        std::sort(subset_.begin(), subset_.end());
        return subset_;
    }

    const SampleSet& s_;
    GrowParams p_;
    Rng* rng_;
    std::vector<std::size_t> all_features_;
    std::vector<std::size_t> subset_;
    DecisionTree tree_;
};

void require_trainable(const SampleSet& s) {
    if (s.size() == 0) throw Error("training set is empty");
    if (s.X.cols() == 0 || s.X.cols() != s.feature_names.size())
        throw Error("training set has inconsistent feature columns");
    const std::size_t pos = s.count_class(1);
    if (pos == 0 || pos == s.size()) throw Error("single-class input: both labels are required");
}

void check_tree_params(int max_depth, std::size_t min_samples_leaf) {
    if (max_depth < 0) throw Error("max_depth must be nonnegative");
    if (min_samples_leaf < 1) throw Error("min_samples_leaf must be at least 1");
}

std::vector<std::size_t> identity_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

}  // namespace

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                         ? nodes[i].left
                                         : nodes[i].right);
    return i;
}

std::vector<double> DecisionTree::raw_importance(std::size_t n_features) const {
    std::vector<double> imp(n_features, 0.0);
    if (nodes.empty() || nodes[0].samples == 0) return imp;
    const double total = static_cast<double>(nodes[0].samples);
    for (const TreeNode& n : nodes) {
        if (n.is_leaf()) continue;
        const TreeNode& l = nodes[static_cast<std::size_t>(n.left)];
        const TreeNode& r = nodes[static_cast<std::size_t>(n.right)];
        const double ns = static_cast<double>(n.samples);
        const double child = (static_cast<double>(l.samples) * l.impurity +
                              static_cast<double>(r.samples) * r.impurity) / ns;
        imp[static_cast<std::size_t>(n.feature)] += (ns / total) * (n.impurity - child);
    }
    for (double& v : imp) v = std::max(v, 0.0);
    return imp;
}

int DecisionTree::depth() const {
    int best = 0;
    std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[i].is_leaf()) {
            stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
            stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
        }
    }
    return best;
}

void DecisionTree::validate(std::size_t n_features) const {
    if (nodes.empty()) throw Error("tree has no nodes");
    std::vector<int> parents(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const TreeNode& n = nodes[i];
        if (!(n.value >= 0.0 && n.value <= 1.0)) throw Error("leaf fraction outside [0, 1]");
        if (n.is_leaf()) continue;
        if (static_cast<std::size_t>(n.feature) >= n_features) throw Error("split feature out of range");
        for (int c : {n.left, n.right}) {
            // Children always follow their parent in the array, so no cycles.
            if (c <= static_cast<int>(i) || static_cast<std::size_t>(c) >= nodes.size())
                throw Error("tree child index out of order");
            ++parents[static_cast<std::size_t>(c)];
        }
    }
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (parents[i] != 1) throw Error("tree node without exactly one parent");
}

TrainedModel train_tree(const SampleSet& train, const TreeConfig& cfg) {
    require_trainable(train);
    check_tree_params(cfg.max_depth, cfg.min_samples_leaf);
    const std::size_t k = train.X.cols();
    TreeGrower grower(train, {cfg.max_depth, cfg.min_samples_leaf, k}, nullptr);
    DecisionTree tree = grower.grow(identity_rows(train.size()));

    TrainedModel m;
    m.kind = ModelKind::tree;
    m.feature_names = train.feature_names;
    m.importance = ImportanceVector::from_raw(train.feature_names, tree.raw_importance(k));
    m.config = cfg;
    m.params = std::move(tree);
    return m;
}

TrainedModel train_forest(const SampleSet& train, const ForestConfig& cfg, unsigned threads) {
    require_trainable(train);
    check_tree_params(cfg.max_depth, cfg.min_samples_leaf);
    if (cfg.n_trees == 0) throw Error("forest needs at least one tree");
    const std::size_t k = train.X.cols();
    std::size_t mtry = cfg.max_features;
    if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k))));
    mtry = std::clamp<std::size_t>(mtry, 1, k);

    ForestParams fp;
    fp.trees.resize(cfg.n_trees);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) fp.tree_seeds.push_back(mix_seed(cfg.seed, t));

    auto grow_one = [&](std::size_t t) {
        Rng rng(fp.tree_seeds[t]);
        std::vector<std::size_t> rows;
        if (cfg.bootstrap) {
            rows.resize(train.size());
            for (auto& r : rows) r = static_cast<std::size_t>(rng.below(train.size()));
        } else {
            rows = identity_rows(train.size());
        }
        TreeGrower grower(train, {cfg.max_depth, cfg.min_samples_leaf, mtry}, &rng);
        fp.trees[t] = grower.grow(std::move(rows));
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.n_trees));
    if (threads <= 1) {
        for (std::size_t t = 0; t < cfg.n_trees; ++t) grow_one(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex mu;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t t; (t = next.fetch_add(1)) < cfg.n_trees;) {
                    try {
                        grow_one(t);
                    } catch (...) {
                        std::lock_guard lock(mu);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<double> raw(k, 0.0);
    for (const auto& tree : fp.trees) {
        auto imp = tree.raw_importance(k);
        for (std::size_t f = 0; f < k; ++f) raw[f] += imp[f];
    }
    for (double& v : raw) v /= static_cast<double>(cfg.n_trees);

    TrainedModel m;
    m.kind = ModelKind::forest;
    m.feature_names = train.feature_names;
    m.importance = ImportanceVector::from_raw(train.feature_names, std::move(raw));
    m.config = cfg;
    m.params = std::move(fp);
    return m;
}

}  // namespace suitmap
