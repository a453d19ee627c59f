#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "suitmap/config.hpp"
#include "suitmap/dataset.hpp"
#include "suitmap/error.hpp"
#include "suitmap/learners.hpp"
#include "suitmap/overlay.hpp"
#include "suitmap/pipeline.hpp"
#include "suitmap/raster.hpp"
#include "suitmap/render.hpp"
#include "suitmap/terrain.hpp"

namespace py = pybind11;
using namespace suitmap;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array2 grid_to_numpy(const RasterGrid& g) {
    Array2 a({g.nrows, g.ncols});
    std::copy(g.values.begin(), g.values.end(), a.mutable_data());
    return a;
}

RasterGrid grid_from_numpy(Array2 a, double cellsize, double xll, double yll, double nodata) {
    if (a.ndim() != 2) throw Error("expected a 2-D array");
    RasterGrid g(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)), cellsize, 0.0, xll, yll,
                 nodata);
    std::copy(a.data(), a.data() + a.size(), g.values.begin());
    g.validate();
    return g;
}

FeatureMatrix matrix_from_numpy(Array2 a) {
    if (a.ndim() != 2) throw Error("expected a 2-D feature array");
    FeatureMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = a.at(i, j);
    return m;
}

Array2 matrix_to_numpy(const FeatureMatrix& m) {
    Array2 a({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), a.mutable_data());
    return a;
}

py::dict metrics_dict(const MetricsReport& r) {
    py::dict d;
    d["accuracy"] = r.accuracy;
    d["precision"] = r.precision;
    d["recall"] = r.recall;
    d["f1"] = r.f1;
    d["tp"] = r.tp;
    d["fp"] = r.fp;
    d["fn"] = r.fn;
    d["tn"] = r.tn;
    return d;
}

WeightVector weights_arg(const std::vector<std::string>& names, const std::vector<double>& w) {
    return WeightVector(names, w);
}

}  // namespace

PYBIND11_MODULE(_suitmap, m) {
    m.doc() = "Raster multi-criteria site suitability with learned criterion weights";

    static py::exception<Error> base(m, "SuitmapError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(base, e.what());
        }
    });
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<AlignmentError>(m, "AlignmentError", base.ptr());

    py::class_<RasterGrid>(m, "RasterGrid")
        .def(py::init([](Array2 values, double cellsize, double xll, double yll, double nodata) {
                 return grid_from_numpy(std::move(values), cellsize, xll, yll, nodata);
             }),
             py::arg("values"), py::arg("cellsize") = 1.0, py::arg("xllcorner") = 0.0, py::arg("yllcorner") = 0.0,
             py::arg("nodata_value") = -9999.0)
        .def_readonly("ncols", &RasterGrid::ncols)
        .def_readonly("nrows", &RasterGrid::nrows)
        .def_readwrite("xllcorner", &RasterGrid::xllcorner)
        .def_readwrite("yllcorner", &RasterGrid::yllcorner)
        .def_readwrite("cellsize", &RasterGrid::cellsize)
        .def_readwrite("nodata_value", &RasterGrid::nodata_value)
        .def("to_numpy", &grid_to_numpy, "Copy of the cell values, shape (nrows, ncols)")
        .def("count_data", &RasterGrid::count_data)
        .def("same_header", &RasterGrid::same_header, py::arg("other"), py::arg("tol") = 1e-9)
        .def("cell_x", &RasterGrid::cell_x)
        .def("cell_y", &RasterGrid::cell_y)
        .def("__eq__", [](const RasterGrid& a, const RasterGrid& b) { return a == b; })
        .def("__repr__", [](const RasterGrid& g) {
            return "<RasterGrid " + std::to_string(g.nrows) + "x" + std::to_string(g.ncols) + " cellsize " +
                   std::to_string(g.cellsize) + ">";
        });

    m.def("read_ascii_grid", &read_ascii_grid, py::arg("path"));
    m.def("write_ascii_grid", &write_ascii_grid, py::arg("grid"), py::arg("path"));
    m.def("format_ascii_grid", &format_ascii_grid, py::arg("grid"));
    m.def("parse_ascii_grid", &parse_ascii_grid, py::arg("text"));

    py::class_<ReclassTable>(m, "ReclassTable")
        .def_static("categorical", &ReclassTable::categorical, py::arg("classes"))
        .def_static(
            "continuous",
            [](const std::vector<std::pair<std::optional<double>, double>>& bps) {
                std::vector<ReclassTable::Breakpoint> out;
                for (const auto& [ub, s] : bps) out.push_back({ub.value_or(std::numeric_limits<double>::infinity()), s});
                return ReclassTable::continuous(std::move(out));
            },
            py::arg("breakpoints"), "List of (upper_bound or None, score)")
        .def("score", &ReclassTable::score);
    m.def("reclassify", &reclassify, py::arg("grid"), py::arg("table"));

    m.def("slope_degrees", &slope_degrees, py::arg("dem"));
    m.def("distance_map", &distance_map, py::arg("mask"));
    m.def("supply_demand_layer", &supply_demand_layer, py::arg("zone"), py::arg("capacity"), py::arg("availability"));

    m.def(
        "weighted_sum",
        [](const std::vector<RasterGrid>& layers, const std::vector<std::string>& names,
           const std::vector<double>& weights) { return weighted_sum(layers, weights_arg(names, weights)); },
        py::arg("layers"), py::arg("names"), py::arg("weights"));
    m.def("threshold_labels", &threshold_labels, py::arg("suitability"), py::arg("tau"));
    m.def("quantile_threshold", &quantile_threshold, py::arg("suitability"), py::arg("q"));
    m.def(
        "extract_candidates",
        [](const RasterGrid& s, std::optional<double> top_fraction, std::optional<std::vector<std::pair<std::size_t, std::size_t>>> cells) {
            CandidateMode mode = candidate_mode::AllCells{};
            if (top_fraction && cells) throw Error("pass top_fraction or cells, not both");
            if (top_fraction) mode = candidate_mode::TopFraction{*top_fraction};
            if (cells) {
                candidate_mode::Explicit ex;
                for (auto [r, c] : *cells) ex.cells.push_back({r, c});
                mode = ex;
            }
            std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double, double>> out;
            for (const Candidate& c : extract_candidates(s, mode)) out.emplace_back(c.id, c.row, c.col, c.x, c.y);
            return out;
        },
        py::arg("suitability"), py::arg("top_fraction") = py::none(), py::arg("cells") = py::none(),
        "Candidates as (id, row, col, x, y) tuples");

    m.def(
        "gen_synthetic_landscape",
        [](std::size_t nrows, std::size_t ncols, double cellsize, std::uint64_t seed) {
            const SyntheticLandscape l = gen_synthetic_landscape(nrows, ncols, cellsize, seed);
            py::dict d;
            d["dem"] = l.dem;
            d["landcover"] = l.landcover;
            d["road_mask"] = l.road_mask;
            d["rail_mask"] = l.rail_mask;
            d["urban_mask"] = l.urban_mask;
            d["zone"] = l.zone;
            d["capacity"] = l.capacity;
            d["availability"] = l.availability;
            d["effective_seed"] = l.effective_seed;
            return d;
        },
        py::arg("nrows"), py::arg("ncols"), py::arg("cellsize") = 100.0, py::arg("seed") = 0);

    py::class_<SampleSet>(m, "SampleSet")
        .def(py::init([](Array2 X, std::vector<int> y, std::vector<std::string> names) {
                 SampleSet s;
                 s.X = matrix_from_numpy(std::move(X));
                 if (y.size() != s.X.rows()) throw Error("X and y differ in length");
                 if (names.empty())
                     for (std::size_t j = 0; j < s.X.cols(); ++j) names.push_back("f" + std::to_string(j));
                 if (names.size() != s.X.cols()) throw Error("feature names do not match X columns");
                 s.feature_names = std::move(names);
                 s.y = std::move(y);
                 for (std::size_t i = 0; i < s.y.size(); ++i) s.cells.push_back({i, 0});
                 return s;
             }),
             py::arg("X"), py::arg("y"), py::arg("feature_names") = std::vector<std::string>{})
        .def_readonly("feature_names", &SampleSet::feature_names)
        .def_readonly("y", &SampleSet::y)
        .def_property_readonly("X", [](const SampleSet& s) { return matrix_to_numpy(s.X); })
        .def_property_readonly("cells",
                               [](const SampleSet& s) {
                                   std::vector<std::pair<std::size_t, std::size_t>> out;
                                   for (const auto& c : s.cells) out.emplace_back(c.row, c.col);
                                   return out;
                               })
        .def("__len__", &SampleSet::size);
    m.def("sample_points", &sample_points, py::arg("layers"), py::arg("names"), py::arg("labels"), py::arg("n"),
          py::arg("stratified") = true, py::arg("seed") = 42);
    m.def("train_test_split", &train_test_split, py::arg("samples"), py::arg("test_fraction") = 0.2,
          py::arg("seed") = 0);

    py::class_<TreeConfig>(m, "TreeConfig")
        .def(py::init<>())
        .def_readwrite("max_depth", &TreeConfig::max_depth)
        .def_readwrite("min_samples_leaf", &TreeConfig::min_samples_leaf)
        .def_readwrite("seed", &TreeConfig::seed);
    py::class_<ForestConfig>(m, "ForestConfig")
        .def(py::init<>())
        .def_readwrite("n_trees", &ForestConfig::n_trees)
        .def_readwrite("max_depth", &ForestConfig::max_depth)
        .def_readwrite("min_samples_leaf", &ForestConfig::min_samples_leaf)
        .def_readwrite("max_features", &ForestConfig::max_features)
        .def_readwrite("seed", &ForestConfig::seed)
        .def_readwrite("bootstrap", &ForestConfig::bootstrap);
    py::class_<LogisticConfig>(m, "LogisticConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &LogisticConfig::learning_rate)
        .def_readwrite("epochs", &LogisticConfig::epochs)
        .def_readwrite("l2", &LogisticConfig::l2)
        .def_readwrite("seed", &LogisticConfig::seed);

    py::class_<TrainedModel>(m, "TrainedModel")
        .def_property_readonly("kind", [](const TrainedModel& t) { return std::string(to_string(t.kind)); })
        .def_readonly("feature_names", &TrainedModel::feature_names)
        .def_property_readonly("importance",
                               [](const TrainedModel& t) {
                                   py::dict d;
                                   for (std::size_t i = 0; i < t.importance.names.size(); ++i)
                                       d[py::str(t.importance.names[i])] = t.importance.scores[i];
                                   return d;
                               })
        .def("predict_proba",
             [](const TrainedModel& t, Array2 X) {
                 const auto p = predict_proba(t, matrix_from_numpy(std::move(X)));
                 return py::array_t<double>(static_cast<py::ssize_t>(p.size()), p.data());
             })
        .def("to_json", [](const TrainedModel& t) { return model_to_json(t).dump(); })
        .def_static("from_json", [](const std::string& s) { return model_from_json(nlohmann::json::parse(s)); });

    m.def("train_tree", &train_tree, py::arg("train"), py::arg("config") = TreeConfig{});
    m.def("train_forest", &train_forest, py::arg("train"), py::arg("config") = ForestConfig{}, py::arg("threads") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("train_logistic", &train_logistic, py::arg("train"), py::arg("config") = LogisticConfig{});
    m.def(
        "evaluate", [](const TrainedModel& t, const SampleSet& s) { return metrics_dict(evaluate(t, s)); },
        py::arg("model"), py::arg("test"));
    m.def(
        "metrics_from_confusion",
        [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
            return metrics_dict(metrics_from_confusion(tp, fp, fn, tn));
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

    m.def(
        "render_png",
        [](const RasterGrid& g, const std::string& ramp, const std::filesystem::path& out) {
            render_png(g, color_ramp_from_string(ramp), out);
        },
        py::arg("grid"), py::arg("out"), py::arg("ramp") = "viridis");

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
            const PipelineConfig cfg = parse_config(config);
            std::filesystem::path dir;
            if (out) dir = *out;
            else if (cfg.output_dir) dir = cfg.resolve(*cfg.output_dir);
            else throw Error("no output directory: pass out or set output_dir in the config");
            std::vector<std::string> warnings;
            PipelineResult r;
            {
                py::gil_scoped_release release;
                r = run_lb_mcdm(cfg, dir, [&](const std::string& w) { warnings.push_back(w); });
            }
            py::dict d;
            py::list history;
            for (const auto& it : r.history) {
                py::dict h;
                h["iteration"] = it.index;
                h["winner"] = std::string(to_string(it.kinds[it.winner]));
                h["f1"] = it.metrics[it.winner].f1;
                h["weights"] = it.weights.weights;
                h["next_weights"] = it.next_weights.weights;
                h["weight_change"] = it.weight_change;
                history.append(h);
            }
            d["history"] = history;
            d["layer_names"] = r.final_weights.names;
            d["final_weights"] = r.final_weights.weights;
            d["final_metrics"] = metrics_dict(r.final_metrics);
            d["winner"] = r.winner;
            d["final_suitability"] = r.final_suitability;
            d["reweightings"] = r.reweightings;
            d["converged"] = r.converged;
            d["ranked"] = r.ranking.size();
            d["warnings"] = warnings;
            return d;
        },
        py::arg("config"), py::arg("out") = py::none());

    m.def(
        "default_config_json", [] { return config_to_json(default_pipeline_config()).dump(2); },
        "The built-in default pipeline config as JSON text");
}
