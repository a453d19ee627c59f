#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "suitmap/error.hpp"
#include "suitmap/pipeline.hpp"
#include "suitmap/random.hpp"
#include "test_support.hpp"

using namespace suitmap;
namespace fs = std::filesystem;

namespace {

// Smooth 0..10 integer score layers written under `dir`; returns a config
// pointing at them with sizes scaled for a quick run.
PipelineConfig small_study(const fs::path& dir, std::uint64_t seed, std::size_t k = 4, std::size_t n = 36) {
    Rng rng(seed);
    PipelineConfig cfg;
    cfg.base_dir = dir;
    for (std::size_t j = 0; j < k; ++j) {
        RasterGrid g(n, n, 50.0);
        const double fx = rng.uniform(0.05, 0.3), fy = rng.uniform(0.05, 0.3), ph = rng.uniform(0.0, 6.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                g.at(r, c) = std::round(5.0 + 5.0 * std::sin(fx * static_cast<double>(c) + fy * static_cast<double>(r) + ph));
        g.at(rng.below(n), rng.below(n)) = g.nodata_value;
        const std::string name = "layer" + std::to_string(j);
        write_ascii_grid(g, dir / (name + ".asc"));
        cfg.layers.push_back({name, name + ".asc", std::nullopt});
    }
    cfg.sampling.n = 300;
    ForestConfig fc;
    fc.n_trees = 10;
    LogisticConfig lc;
    lc.epochs = 100;
    cfg.classifiers = {TreeConfig{}, fc, lc};
    return cfg;
}

TrainedModel stump(double threshold, double left, double right, std::size_t k = 1) {
    DecisionTree t;
    t.nodes.resize(3);
    t.nodes[0] = {0, threshold, 1, 2, 0.5, 10, 0.5};
    t.nodes[1] = {-1, 0.0, -1, -1, left, 5, 0.0};
    t.nodes[2] = {-1, 0.0, -1, -1, right, 5, 0.0};
    TrainedModel m;
    m.kind = ModelKind::tree;
    for (std::size_t j = 0; j < k; ++j) m.feature_names.push_back("f" + std::to_string(j));
    m.importance = ImportanceVector::uniform(m.feature_names);
    m.params = t;
    return m;
}

void check_ranking_order(const CandidateRanking& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].rank == i + 1);
        CHECK((rows[i].likelihood >= 0.0 && rows[i].likelihood <= 1.0));
        if (i == 0) continue;
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        const bool ordered = a.likelihood > b.likelihood ||
                             (a.likelihood == b.likelihood &&
                              (a.suitability > b.suitability || (a.suitability == b.suitability && a.id < b.id)));
        CHECK(ordered);
    }
}

}  // namespace

TEST_CASE("initial weights") {
    const WeightVector six = initial_weights(6);
    REQUIRE(six.size() == 6);
    for (double w : six.weights) CHECK(w == 1.0 / 6.0);
    CHECK(initial_weights(1).weights == std::vector<double>{1.0});
    for (std::size_t k : {2, 3, 7, 10, 999, 10000}) CHECK(std::abs(initial_weights(k).sum() - 1.0) <= 1e-12);
    CHECK_THROWS_AS(initial_weights(0), Error);
    CHECK(initial_weights({"a", "b"}).names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("weights from importance") {
    const std::vector<std::string> layers{"landcover", "road", "rail", "slope", "urban", "supply_demand"};
    ImportanceVector imp;
    // Listed out of layer order on purpose; rail and urban share the remainder.
    imp.names = {"slope", "road", "landcover", "rail", "urban", "supply_demand"};
    imp.scores = {0.3955, 0.2406, 0.2035, 0.0800, 0.0678, 0.0126};
    const WeightVector w = weights_from_importance(imp, layers);
    CHECK(w.names == layers);
    CHECK(w.weights == std::vector<double>{0.2035, 0.2406, 0.0800, 0.3955, 0.0678, 0.0126});

    const WeightVector u = weights_from_importance(ImportanceVector::uniform(layers), layers);
    for (double v : u.weights) CHECK(v == 1.0 / 6.0);

    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> raw(layers.size());
        for (double& v : raw) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
        const WeightVector r = weights_from_importance(ImportanceVector::from_raw(layers, raw), layers);
        CHECK_NOTHROW(r.validate());
        CHECK(std::abs(r.sum() - 1.0) <= 1e-9);
    }

    ImportanceVector wrong = ImportanceVector::uniform({"a", "b", "c", "d", "e", "f"});
    CHECK_THROWS_AS(weights_from_importance(wrong, layers), Error);
    CHECK_THROWS_AS(weights_from_importance(ImportanceVector::uniform({"a"}), layers), Error);
}

TEST_CASE("rank_candidates ordering") {
    RasterGrid layer(3, 1, 1.0);
    layer.values = {0.0, 5.0, 1.0};
    RasterGrid suit(3, 1, 1.0);
    suit.values = {6.4, 7.1, 3.0};
    const std::vector<RasterGrid> layers{layer};
    const CandidateSet cands = extract_candidates(suit, candidate_mode::AllCells{});

    // Cells 0 and 2 fall left (0.2), cell 1 right (0.9).
    CandidateRanking r = rank_candidates(stump(2.0, 0.2, 0.9), layers, suit, cands);
    REQUIRE(r.size() == 3);
    CHECK(r[0].id == 1);
    CHECK(r[0].likelihood == 0.9);
    CHECK(r[0].rank == 1);
    // Equal likelihoods: the higher suitability ranks first.
    CHECK(r[1].id == 0);
    CHECK(r[2].id == 2);

    suit.values = {7.0, 7.1, 7.0};
    r = rank_candidates(stump(2.0, 0.5, 0.5), layers, suit, cands);
    CHECK(r[0].id == 1);
    CHECK(r[1].id == 0);
    CHECK(r[2].id == 2);
    check_ranking_order(r);

    std::vector<std::string> warnings;
    std::vector<RasterGrid> holes{layer};
    holes[0].values[1] = holes[0].nodata_value;
    r = rank_candidates(stump(2.0, 0.2, 0.9), holes, suit, cands, [&](const std::string& w) { warnings.push_back(w); });
    CHECK(r.size() == 2);
    CHECK(warnings.size() == 1);

    const std::vector<RasterGrid> two{layer, layer};
    CHECK_THROWS_AS(rank_candidates(stump(2.0, 0.2, 0.9), two, suit, cands), Error);
}

TEST_CASE("ranking is invariant under increasing transforms of the likelihood") {
    Rng rng(8);
    for (int t = 0; t < 30; ++t) {
        CandidateRanking rows;
        for (std::size_t i = 0; i < 200; ++i) {
            RankingRow r;
            r.id = i;
            r.likelihood = static_cast<double>(rng.below(20)) / 19.0;
            r.suitability = static_cast<double>(rng.below(5));
            rows.push_back(r);
        }
        sort_ranking(rows);
        check_ranking_order(rows);
        CandidateRanking cubed = rows;
        for (auto& r : cubed) r.likelihood = r.likelihood * r.likelihood * r.likelihood;
        rng.shuffle(cubed);
        sort_ranking(cubed);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(cubed[i].id == rows[i].id);
            CHECK(cubed[i].rank == rows[i].rank);
        }
    }
}

TEST_CASE("ranking CSV round trip") {
    CandidateRanking rows{{1, 4, 2, 3, 175.5, 0.1, 0.987654321, 7.25}, {2, 0, 0, 0, 25.0, 1e-7, 0.0, 1.0 / 3.0}};
    const std::string csv = ranking_to_csv(rows);
    CHECK(csv.rfind("rank,id,row,col,x,y,likelihood,suitability\n", 0) == 0);
    CHECK(ranking_from_csv(csv) == rows);
    CHECK_THROWS_AS(ranking_from_csv("rank,id\n1,2\n"), FormatError);
    CHECK_THROWS_AS(ranking_from_csv("rank,id,row,col,x,y,likelihood,suitability\n1,2,3\n"), FormatError);
}

TEST_CASE("weights JSON round trip") {
    const WeightVector w({"a", "b"}, {0.25, 0.75});
    CHECK(weights_from_json(nlohmann::json::parse(weights_to_json(w).dump())) == w);
    CHECK_THROWS(weights_from_json(nlohmann::json::parse(R"({"weights":[{"layer":"a","weight":-1}]})")));
}

TEST_CASE("config validation") {
    testing::TempDir tmp;
    PipelineConfig cfg = small_study(tmp.path(), 1);
    CHECK_NOTHROW(cfg.validate());
    auto expect_path = [](PipelineConfig c, const std::string& path) {
        try {
            c.validate();
            FAIL("expected a ConfigError at " << path);
        } catch (const ConfigError& e) {
            CHECK(e.path() == path);
        }
    };
    PipelineConfig c = cfg;
    c.layers.resize(1);
    expect_path(c, ".layers");
    c = cfg;
    c.iteration.max_iters = 0;
    expect_path(c, ".iteration.max_iters");
    c = cfg;
    c.iteration.weight_tol = -1.0;
    expect_path(c, ".iteration.weight_tol");
    c = cfg;
    c.layers[1].name = c.layers[0].name;
    expect_path(c, ".layers[1].name");
    c = cfg;
    c.classifiers.push_back(TreeConfig{});
    expect_path(c, ".classifiers");
    c = cfg;
    c.labels.q = 1.0;
    expect_path(c, ".labels.q");
}

TEST_CASE("pipeline run: layout, weight invariants and ranking") {
    testing::TempDir tmp;
    const PipelineConfig cfg = small_study(tmp.path(), 2);
    const fs::path out = tmp / "out";
    const PipelineResult res = run_lb_mcdm(cfg, out);

    REQUIRE(res.history.size() == 2);
    CHECK(res.reweightings == 2);
    for (const auto& rec : res.history) {
        for (const WeightVector* w : {&rec.weights, &rec.next_weights}) {
            for (double v : w->weights) CHECK(v >= 0.0);
            CHECK(std::abs(w->sum() - 1.0) <= 1e-9);
        }
        CHECK(rec.kinds.size() == 3);
        CHECK_NOTHROW(rec.importance.validate());
        CHECK(rec.next_weights.weights == rec.importance.scores);
    }
    CHECK(res.history[0].weights == initial_weights(cfg.layer_names()));
    CHECK(res.history[1].weights == res.history[0].next_weights);
    CHECK(res.final_weights == res.history[1].next_weights);
    CHECK(res.winner.kind == res.history.back().kinds[res.history.back().winner]);
    CHECK(res.winner.suitability_weights == res.final_weights);

    for (int i = 1; i <= 2; ++i) {
        const fs::path d = out / ("iter_" + std::to_string(i));
        for (const char* f : {"weights.json", "suitability.asc", "labels.asc", "selection.json",
                              "metrics_tree.json", "metrics_forest.json", "metrics_logistic.json",
                              "model_tree.json", "model_forest.json", "model_logistic.json"})
            CHECK_MESSAGE(fs::is_regular_file(d / f), (d / f).string());
    }
    for (const char* f : {"suitability.asc", "labels.asc", "weights.json", "model.json", "metrics.json", "ranking.csv"})
        CHECK_MESSAGE(fs::is_regular_file(out / "final" / f), f);
    CHECK(fs::is_regular_file(out / "summary.json"));
    for (const auto& e : fs::recursive_directory_iterator(out)) CHECK(e.path().extension() != ".tmp");

    const RasterGrid final_map = read_ascii_grid(out / "final" / "suitability.asc");
    CHECK(final_map.same_header(res.final_suitability));
    CHECK(weights_from_json(nlohmann::json::parse(testing::slurp(out / "final" / "weights.json"))) == res.final_weights);
    CHECK(model_from_json(nlohmann::json::parse(testing::slurp(out / "final" / "model.json"))) == res.winner);

    const CandidateRanking csv = ranking_from_csv(testing::slurp(out / "final" / "ranking.csv"));
    CHECK(csv == res.ranking);
    check_ranking_order(csv);
    const CandidateSet cands = build_candidates(cfg, res.final_suitability);
    std::set<std::pair<std::size_t, std::size_t>> cells;
    for (const auto& c : cands) cells.insert({c.row, c.col});
    for (const auto& r : csv) CHECK(cells.count({r.row, r.col}) == 1);
    CHECK(csv.size() <= cands.size());
}

TEST_CASE("pipeline with a single iteration reweights once") {
    testing::TempDir tmp;
    PipelineConfig cfg = small_study(tmp.path(), 3);
    cfg.iteration.max_iters = 1;
    const PipelineResult res = run_lb_mcdm(cfg, tmp / "out");
    CHECK(res.reweightings == 1);
    REQUIRE(res.history.size() == 1);
    CHECK(res.final_weights == weights_from_importance(res.history[0].importance, cfg.layer_names()));
    CHECK(fs::exists(tmp / "out" / "iter_1"));
    CHECK_FALSE(fs::exists(tmp / "out" / "iter_2"));
}

TEST_CASE("pipeline convergence stops early") {
    testing::TempDir tmp;
    PipelineConfig cfg = small_study(tmp.path(), 4);
    cfg.iteration.max_iters = 6;
    cfg.iteration.weight_tol = 10.0;  // any change is below this
    const PipelineResult res = run_lb_mcdm(cfg, tmp / "out");
    CHECK(res.converged);
    CHECK(res.history.size() == 1);
}

TEST_CASE("identical layers give the same map at every iteration") {
    testing::TempDir tmp;
    PipelineConfig cfg = small_study(tmp.path(), 5, 1);
    const LayerSpec base = cfg.layers[0];
    for (int j = 1; j < 3; ++j) cfg.layers.push_back({"copy" + std::to_string(j), base.path, std::nullopt});
    const PipelineResult res = run_lb_mcdm(cfg, tmp / "out");
    const RasterGrid layer = read_ascii_grid(tmp / "layer0.asc");
    const RasterGrid it1 = read_ascii_grid(tmp / "out" / "iter_1" / "suitability.asc");
    const RasterGrid it2 = read_ascii_grid(tmp / "out" / "iter_2" / "suitability.asc");
    CHECK(it1 == it2);
    CHECK(it1 == layer);
    CHECK(res.final_suitability == layer);
}

TEST_CASE("pipeline determinism") {
    testing::TempDir tmp;
    const PipelineConfig cfg = small_study(tmp.path(), 6);
    run_lb_mcdm(cfg, tmp / "a");
    run_lb_mcdm(cfg, tmp / "b");
    const auto a = testing::snapshot(tmp / "a"), b = testing::snapshot(tmp / "b");
    CHECK(a.size() == b.size());
    CHECK(a == b);

    PipelineConfig other = cfg;
    other.sampling.seed = 7;
    run_lb_mcdm(other, tmp / "c");
    CHECK_FALSE(testing::snapshot(tmp / "c") == a);
}

TEST_CASE("pipeline errors carry their stage") {
    testing::TempDir tmp;
    PipelineConfig cfg = small_study(tmp.path(), 7);
    cfg.labels.kind = LabelRule::Kind::threshold;
    cfg.labels.tau = 11.0;
    try {
        run_lb_mcdm(cfg, tmp / "out");
        FAIL("expected label degeneracy");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("iteration 1") != std::string::npos);
        CHECK(msg.find("label degeneracy") != std::string::npos);
    }

    cfg = small_study(tmp.path(), 7);
    cfg.sampling.n = 100000;
    CHECK_THROWS_WITH_AS(run_lb_mcdm(cfg, tmp / "out2"), doctest::Contains("iteration 1, sampling"), Error);

    cfg = small_study(tmp.path(), 7);
    cfg.layers[0].path = "missing.asc";
    CHECK_THROWS_WITH_AS(run_lb_mcdm(cfg, tmp / "out3"), doctest::Contains("loading layers"), Error);

    cfg = small_study(tmp.path(), 7);
    write_ascii_grid(RasterGrid(5, 5, 50.0), tmp / "odd.asc");
    cfg.layers[1].path = "odd.asc";
    CHECK_THROWS_AS(run_lb_mcdm(cfg, tmp / "out4"), Error);
}

TEST_CASE("candidate modes in the pipeline") {
    testing::TempDir tmp;
    PipelineConfig cfg = small_study(tmp.path(), 8);
    cfg.iteration.max_iters = 1;
    cfg.candidates.mode = candidate_mode::TopFraction{0.1};
    PipelineResult res = run_lb_mcdm(cfg, tmp / "top");
    CHECK(res.ranking.size() == top_count(0.1, res.final_suitability.count_data()));

    std::ofstream(tmp / "cells.csv") << "row,col\n3,4\n10,10\n";
    cfg.candidates.mode = candidate_mode::Explicit{};
    cfg.candidates.csv = "cells.csv";
    res = run_lb_mcdm(cfg, tmp / "explicit");
    REQUIRE(res.ranking.size() == 2);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& r : res.ranking) got.insert({r.row, r.col});
    CHECK(got == std::set<std::pair<std::size_t, std::size_t>>{{3, 4}, {10, 10}});
}
