#include "suitmap/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "suitmap/error.hpp"
#include "suitmap/io_util.hpp"
#include "suitmap/random.hpp"

namespace suitmap {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> PipelineConfig::layer_names() const {
    std::vector<std::string> names;
    for (const auto& l : layers) names.push_back(l.name);
    return names;
}

fs::path PipelineConfig::resolve(const fs::path& p) const {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void PipelineConfig::validate() const {
    if (layers.size() < 2) throw ConfigError(".layers", "at least 2 layers are required");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string at = ".layers[" + std::to_string(i) + "]";
        if (layers[i].name.empty()) throw ConfigError(at + ".name", "must not be empty");
        if (!seen.insert(layers[i].name).second)
            throw ConfigError(at + ".name", "duplicate layer name '" + layers[i].name + "'");
        if (layers[i].path.empty()) throw ConfigError(at + ".path", "must not be empty");
        if (layers[i].reclass) {
            try {
                layers[i].reclass->validate();
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError(at + ".reclass", e.what());
            }
        }
    }
    if (weights) {
        try {
            weights->validate();
        } catch (const Error& e) {
            throw ConfigError(".weights", e.what());
        }
        if (weights->names != layer_names())
            throw ConfigError(".weights", "must name every layer, in layer order");
        if (!(weights->sum() > 0.0)) throw ConfigError(".weights", "must not be all zero");
    }
    if (labels.kind == LabelRule::Kind::quantile && !(labels.q > 0.0 && labels.q < 1.0))
        throw ConfigError(".labels.q", "must lie strictly between 0 and 1");
    if (labels.kind == LabelRule::Kind::threshold && !std::isfinite(labels.tau))
        throw ConfigError(".labels.tau", "must be finite");
    if (sampling.n < 2) throw ConfigError(".sampling.n", "must be at least 2");
    if (!(sampling.test_fraction > 0.0 && sampling.test_fraction < 1.0))
        throw ConfigError(".sampling.test_fraction", "must lie strictly between 0 and 1");
    if (classifiers.empty()) throw ConfigError(".classifiers", "at least one classifier is required");
    std::set<std::size_t> kinds;
    for (const auto& c : classifiers)
        if (!kinds.insert(c.index()).second)
            throw ConfigError(".classifiers", "each classifier kind may appear once");
    if (iteration.max_iters < 1) throw ConfigError(".iteration.max_iters", "must be at least 1");
    if (!(iteration.weight_tol > 0.0)) throw ConfigError(".iteration.weight_tol", "must be positive");
    if (auto* top = std::get_if<candidate_mode::TopFraction>(&candidates.mode))
        if (!(top->fraction > 0.0 && top->fraction <= 1.0))
            throw ConfigError(".candidates.fraction", "must lie in (0, 1]");
}

ScoredLayers load_layers(const PipelineConfig& cfg) {
    ScoredLayers out;
    for (const auto& spec : cfg.layers) {
        RasterGrid g = read_ascii_grid(cfg.resolve(spec.path));
        out.names.push_back(spec.name);
        out.grids.push_back(spec.reclass ? reclassify(g, *spec.reclass) : std::move(g));
    }
    check_aligned(out.grids, out.names);
    return out;
}

WeightVector initial_weights(std::size_t k) {
    if (k < 1) throw Error("initial weights need at least one layer");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back("layer_" + std::to_string(i));
    return initial_weights(std::move(names));
}

WeightVector initial_weights(std::vector<std::string> names) {
    if (names.empty()) throw Error("initial weights need at least one layer");
    const std::size_t k = names.size();
    return WeightVector(std::move(names), std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

WeightVector weights_from_importance(const ImportanceVector& imp,
                                     std::span<const std::string> layer_names) {
    imp.validate();
    if (imp.names.size() != layer_names.size())
        throw Error("importance covers " + std::to_string(imp.names.size()) + " features but there are " +
                    std::to_string(layer_names.size()) + " layers");
    std::vector<double> w;
    for (const auto& name : layer_names) {
        auto it = std::find(imp.names.begin(), imp.names.end(), name);
        if (it == imp.names.end()) throw Error("no importance score for layer '" + name + "'");
        w.push_back(imp.scores[static_cast<std::size_t>(it - imp.names.begin())]);
    }
    return WeightVector({layer_names.begin(), layer_names.end()}, std::move(w));
}

RasterGrid apply_label_rule(const RasterGrid& s, const LabelRule& rule, double* tau_out) {
    const double tau = rule.kind == LabelRule::Kind::threshold ? rule.tau : quantile_threshold(s, rule.q);
    if (tau_out) *tau_out = tau;
    return threshold_labels(s, tau);
}

namespace {

std::vector<CellIndex> parse_cells_csv(const std::string& text, const std::string& what);

}  // namespace

CandidateSet build_candidates(const PipelineConfig& cfg, const RasterGrid& suitability) {
    if (cfg.candidates.csv) {
        const fs::path p = cfg.resolve(*cfg.candidates.csv);
        return extract_candidates(
            suitability, candidate_mode::Explicit{parse_cells_csv(read_file(p), p.string())});
    }
    return extract_candidates(suitability, cfg.candidates.mode);
}

// ---------------------------------------------------------------------------
// Ranking

void sort_ranking(CandidateRanking& rows) {
    std::sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
        if (a.likelihood != b.likelihood) return a.likelihood > b.likelihood;
        if (a.suitability != b.suitability) return a.suitability > b.suitability;
        return a.id < b.id;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
}

CandidateRanking rank_candidates(const TrainedModel& model, std::span<const RasterGrid> layers,
                                 const RasterGrid& suitability, const CandidateSet& candidates,
                                 const WarnFn& warn) {
    if (layers.size() != model.n_features())
        throw Error("model expects " + std::to_string(model.n_features()) + " layers, got " +
                    std::to_string(layers.size()));
    std::vector<const RasterGrid*> all{&suitability};
    for (const auto& l : layers) all.push_back(&l);
    check_aligned(std::span<const RasterGrid* const>(all));

    CandidateRanking rows;
    std::vector<double> x(layers.size());
    for (const Candidate& c : candidates) {
        if (c.row >= suitability.nrows || c.col >= suitability.ncols)
            throw Error("candidate " + std::to_string(c.id) + " is out of bounds");
        bool hole = suitability.is_nodata(c.row, c.col);
        for (std::size_t k = 0; k < layers.size() && !hole; ++k) {
            x[k] = layers[k].at(c.row, c.col);
            hole = layers[k].is_nodata(x[k]);
        }
        if (hole) {
            if (warn)
                warn("candidate " + std::to_string(c.id) + " (row " + std::to_string(c.row) + ", col " +
                     std::to_string(c.col) + ") has NODATA in a layer; dropped");
            continue;
        }
        rows.push_back({0, c.id, c.row, c.col, c.x, c.y, predict_proba(model, x),
                        suitability.at(c.row, c.col)});
    }
    sort_ranking(rows);
    return rows;
}

std::string ranking_to_csv(const CandidateRanking& rows) {
    std::string out = "rank,id,row,col,x,y,likelihood,suitability\n";
    for (const auto& r : rows) {
        out += std::to_string(r.rank) + ',' + std::to_string(r.id) + ',' + std::to_string(r.row) + ',' +
               std::to_string(r.col) + ',' + format_roundtrip(r.x) + ',' + format_roundtrip(r.y) + ',' +
               format_roundtrip(r.likelihood) + ',' + format_roundtrip(r.suitability) + '\n';
    }
    return out;
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    while (true) {
        auto comma = line.find(',');
        out.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    }
    return out;
}

template <class T>
T parse_field(std::string_view f, std::size_t line, const std::string& what) {
    T v{};
    auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw FormatError(what + ": unparseable field '" + std::string(f) + "'", line);
    return v;
}

// Calls `row(fields, line_no)` for every data line after the header.
template <class F>
void for_each_csv_row(const std::string& text, std::string_view header, const std::string& what, F&& row) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (!seen_header) {
            std::string joined;
            for (std::size_t i = 0; i < fields.size(); ++i) joined += (i ? "," : "") + std::string(fields[i]);
            if (joined != header)
                throw FormatError(what + ": expected header '" + std::string(header) + "'", line_no);
            seen_header = true;
            continue;
        }
        row(fields, line_no);
    }
    if (!seen_header) throw FormatError(what + ": missing header", line_no);
}

std::vector<CellIndex> parse_cells_csv(const std::string& text, const std::string& what) {
    std::vector<CellIndex> cells;
    for_each_csv_row(text, "row,col", what, [&](const auto& f, std::size_t line) {
        if (f.size() != 2) throw FormatError(what + ": expected 2 fields", line);
        cells.push_back({parse_field<std::size_t>(f[0], line, what), parse_field<std::size_t>(f[1], line, what)});
    });
    return cells;
}

}  // namespace

CandidateRanking ranking_from_csv(const std::string& text) {
    CandidateRanking rows;
    const std::string what = "ranking csv";
    for_each_csv_row(text, "rank,id,row,col,x,y,likelihood,suitability", what,
                     [&](const auto& f, std::size_t line) {
                         if (f.size() != 8) throw FormatError(what + ": expected 8 fields", line);
                         rows.push_back({parse_field<std::size_t>(f[0], line, what),
                                         parse_field<std::size_t>(f[1], line, what),
                                         parse_field<std::size_t>(f[2], line, what),
                                         parse_field<std::size_t>(f[3], line, what),
                                         parse_field<double>(f[4], line, what),
                                         parse_field<double>(f[5], line, what),
                                         parse_field<double>(f[6], line, what),
                                         parse_field<double>(f[7], line, what)});
                     });
    return rows;
}

// ---------------------------------------------------------------------------
// Pipeline

json weights_to_json(const WeightVector& w) {
    json arr = json::array();
    for (std::size_t i = 0; i < w.size(); ++i) arr.push_back({{"layer", w.names[i]}, {"weight", w.weights[i]}});
    return {{"weights", arr}};
}

WeightVector weights_from_json(const json& j) {
    WeightVector w;
    for (const auto& e : j.at("weights")) {
        w.names.push_back(e.at("layer").get<std::string>());
        w.weights.push_back(e.at("weight").get<double>());
    }
    w.validate();
    return w;
}

namespace {

void write_json(const fs::path& p, const json& j) { write_file_atomic(p, j.dump(2) + "\n"); }

json importance_to_json(const ImportanceVector& imp) {
    json arr = json::array();
    for (std::size_t i = 0; i < imp.scores.size(); ++i)
        arr.push_back({{"feature", imp.names[i]}, {"score", imp.scores[i]}});
    return arr;
}

void require_both_classes(const RasterGrid& labels, const std::string& stage) {
    bool has[2] = {false, false};
    for (double v : labels.values)
        if (!labels.is_nodata(v)) has[v == 1.0 ? 1 : 0] = true;
    for (int c = 0; c < 2; ++c)
        if (!has[c])
            throw Error(stage + ": label degeneracy, class " + std::to_string(c) +
                        " vanished (the quantile label rule avoids this)");
}

template <class F>
auto with_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw Error(stage + ": " + e.what());
    }
}

struct StageOutputs {
    RasterGrid suitability;
    RasterGrid labels;
    double tau = 0.0;
    SampleSet train;
    SampleSet test;
};

StageOutputs build_stage(const PipelineConfig& cfg, const ScoredLayers& layers, const WeightVector& w,
                         std::uint64_t stream, const std::string& stage) {
    StageOutputs s;
    s.suitability = with_stage(stage + ", overlay", [&] { return weighted_sum(layers.grids, w); });
    s.labels = with_stage(stage + ", labels", [&] { return apply_label_rule(s.suitability, cfg.labels, &s.tau); });
    require_both_classes(s.labels, stage);
    SampleSet sample = with_stage(stage + ", sampling", [&] {
        return sample_points(layers.grids, layers.names, s.labels, cfg.sampling.n, cfg.sampling.stratified,
                             mix_seed(cfg.sampling.seed, 2 * stream));
    });
    std::tie(s.train, s.test) = with_stage(stage + ", split", [&] {
        return train_test_split(sample, cfg.sampling.test_fraction, mix_seed(cfg.sampling.seed, 2 * stream + 1));
    });
    return s;
}

}  // namespace

PipelineResult run_lb_mcdm(const PipelineConfig& cfg, const fs::path& out_dir, const WarnFn& warn) {
    cfg.validate();
    const ScoredLayers layers = with_stage("loading layers", [&] { return load_layers(cfg); });
    fs::create_directories(out_dir);

    PipelineResult result;
    WeightVector w = initial_weights(layers.names);
    std::size_t winner_config = 0;

    for (int i = 1; i <= cfg.iteration.max_iters; ++i) {
        const std::string stage = "iteration " + std::to_string(i);
        const fs::path dir = out_dir / ("iter_" + std::to_string(i));
        fs::create_directories(dir);

        StageOutputs s = build_stage(cfg, layers, w, static_cast<std::uint64_t>(i), stage);

        std::vector<EvaluatedModel> evaluated;
        IterationRecord rec;
        rec.index = i;
        rec.weights = w;
        rec.tau = s.tau;
        for (const auto& tc : cfg.classifiers) {
            const ModelKind kind = kind_of(tc);
            const std::string kname(to_string(kind));
            EvaluatedModel em = with_stage(stage + ", training " + kname, [&] {
                TrainedModel m = train_model(s.train, tc);
                m.suitability_weights = w;
                MetricsReport r = evaluate(m, s.test);
                return EvaluatedModel{std::move(m), r};
            });
            write_json(dir / ("metrics_" + kname + ".json"), metrics_to_json(em.metrics));
            write_json(dir / ("model_" + kname + ".json"), model_to_json(em.model));
            rec.kinds.push_back(kind);
            rec.metrics.push_back(em.metrics);
            evaluated.push_back(std::move(em));
        }
        rec.winner = select_best_index(evaluated);
        winner_config = rec.winner;
        rec.importance = feature_importance(evaluated[rec.winner].model);
        rec.next_weights = weights_from_importance(rec.importance, layers.names);
        rec.weight_change = rec.next_weights.max_abs_diff(w);

        write_json(dir / "weights.json", weights_to_json(w));
        write_ascii_grid(s.suitability, dir / "suitability.asc");
        write_ascii_grid(s.labels, dir / "labels.asc");
        write_json(dir / "selection.json",
                   {{"iteration", i},
                    {"tau", s.tau},
                    {"winner", std::string(to_string(rec.kinds[rec.winner]))},
                    {"importance", importance_to_json(rec.importance)},
                    {"next_weights", weights_to_json(rec.next_weights)["weights"]},
                    {"weight_change", rec.weight_change}});

        w = rec.next_weights;
        ++result.reweightings;
        const bool converged = rec.weight_change < cfg.iteration.weight_tol;
        result.history.push_back(std::move(rec));
        if (converged) {
            result.converged = true;
            break;
        }
    }

    // Final stage: overlay with the refined weights, retrain the winning kind.
    const fs::path fdir = out_dir / "final";
    fs::create_directories(fdir);
    const auto stream = static_cast<std::uint64_t>(cfg.iteration.max_iters) + 1;
    StageOutputs s = build_stage(cfg, layers, w, stream, "final stage");
    const TrainingConfig& tc = cfg.classifiers[winner_config];
    result.winner = with_stage("final stage, training", [&] { return train_model(s.train, tc); });
    result.winner.suitability_weights = w;
    result.final_metrics = evaluate(result.winner, s.test);

    const CandidateSet cands = with_stage("final stage, candidates", [&] { return build_candidates(cfg, s.suitability); });
    result.ranking = rank_candidates(result.winner, layers.grids, s.suitability, cands, warn);

    write_ascii_grid(s.suitability, fdir / "suitability.asc");
    write_ascii_grid(s.labels, fdir / "labels.asc");
    write_json(fdir / "weights.json", weights_to_json(w));
    write_json(fdir / "model.json", model_to_json(result.winner));
    write_json(fdir / "metrics.json", metrics_to_json(result.final_metrics));
    write_file_atomic(fdir / "ranking.csv", ranking_to_csv(result.ranking));

    json hist = json::array();
    for (const auto& r : result.history) {
        json models = json::array();
        for (std::size_t k = 0; k < r.kinds.size(); ++k)
            models.push_back({{"kind", std::string(to_string(r.kinds[k]))}, {"metrics", metrics_to_json(r.metrics[k])}});
        hist.push_back({{"iteration", r.index},
                        {"winner", std::string(to_string(r.kinds[r.winner]))},
                        {"weight_change", r.weight_change},
                        {"models", models}});
    }
    write_json(out_dir / "summary.json", {{"iterations", hist},
                                          {"reweightings", result.reweightings},
                                          {"converged", result.converged},
                                          {"final_kind", std::string(to_string(result.winner.kind))},
                                          {"final_metrics", metrics_to_json(result.final_metrics)},
                                          {"final_weights", weights_to_json(w)["weights"]},
                                          {"candidates", result.ranking.size()}});

    result.final_suitability = std::move(s.suitability);
    result.final_labels = std::move(s.labels);
    result.final_weights = w;
    return result;
}

}  // namespace suitmap
