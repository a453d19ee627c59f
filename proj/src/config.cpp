#include "suitmap/config.hpp"

#include <charconv>
#include <limits>
#include <set>
#include <sstream>

#include "suitmap/error.hpp"
#include "suitmap/io_util.hpp"

namespace suitmap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where(), "must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string at(const std::string& key) const { return path_ + "." + key; }

    const json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key), "required key is missing");
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key) {
        return convert<T>(raw(key), at(key));
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        return get<T>(key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError(at(k), "unknown key");
    }

    template <class T>
    static T convert(const json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(path, "expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(path, "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
            // Integers built in code are stored signed even when nonnegative.
            if (v.is_number_unsigned()) {
                const auto u = v.get<std::uint64_t>();
                if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max()))
                    throw ConfigError(path, "integer out of range");
                return static_cast<T>(u);
            }
            const auto i = v.get<std::int64_t>();
            if constexpr (std::is_unsigned_v<T>) {
                if (i < 0) throw ConfigError(path, "expected a nonnegative integer");
            } else {
                if (i < std::numeric_limits<T>::min() || i > std::numeric_limits<T>::max())
                    throw ConfigError(path, "integer out of range");
            }
            return static_cast<T>(i);
        } else {
            if (!v.is_number()) throw ConfigError(path, "expected a number");
            return v.get<T>();
        }
    }

private:
    std::string where() const { return path_.empty() ? "." : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

const json& expect_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    return v;
}

TreeConfig parse_tree(const json& j, const std::string& path) {
    StrictObject o(j, path);
    TreeConfig c;
    c.max_depth = o.get<int>("max_depth", c.max_depth);
    c.min_samples_leaf = o.get<std::size_t>("min_samples_leaf", c.min_samples_leaf);
    c.seed = o.get<std::uint64_t>("seed", c.seed);
    o.finish();
    if (c.max_depth < 0) throw ConfigError(o.at("max_depth"), "must be nonnegative");
    if (c.min_samples_leaf < 1) throw ConfigError(o.at("min_samples_leaf"), "must be at least 1");
    return c;
}

ForestConfig parse_forest(const json& j, const std::string& path) {
    StrictObject o(j, path);
    ForestConfig c;
    c.n_trees = o.get<std::size_t>("n_trees", c.n_trees);
    c.max_depth = o.get<int>("max_depth", c.max_depth);
    c.min_samples_leaf = o.get<std::size_t>("min_samples_leaf", c.min_samples_leaf);
    c.max_features = o.get<std::size_t>("max_features", c.max_features);
    c.seed = o.get<std::uint64_t>("seed", c.seed);
    c.bootstrap = o.get<bool>("bootstrap", c.bootstrap);
    o.finish();
    if (c.n_trees < 1) throw ConfigError(o.at("n_trees"), "must be at least 1");
    if (c.max_depth < 0) throw ConfigError(o.at("max_depth"), "must be nonnegative");
    if (c.min_samples_leaf < 1) throw ConfigError(o.at("min_samples_leaf"), "must be at least 1");
    return c;
}

LogisticConfig parse_logistic(const json& j, const std::string& path) {
    StrictObject o(j, path);
    LogisticConfig c;
    c.learning_rate = o.get<double>("learning_rate", c.learning_rate);
    c.epochs = o.get<int>("epochs", c.epochs);
    c.l2 = o.get<double>("l2", c.l2);
    c.seed = o.get<std::uint64_t>("seed", c.seed);
    o.finish();
    if (!(c.learning_rate > 0.0)) throw ConfigError(o.at("learning_rate"), "must be positive");
    if (c.epochs < 0) throw ConfigError(o.at("epochs"), "must be nonnegative");
    if (!(c.l2 >= 0.0)) throw ConfigError(o.at("l2"), "must be nonnegative");
    return c;
}

}  // namespace

ReclassTable reclass_from_json(const json& j, const std::string& path) {
    StrictObject o(j, path);
    const std::string kind = o.get<std::string>("kind");
    ReclassTable t;
    if (kind == "categorical") {
        t.kind = ReclassTable::Kind::categorical;
        const json& classes = expect_array(o.raw("classes"), o.at("classes"));
        for (std::size_t i = 0; i < classes.size(); ++i) {
            StrictObject e(classes[i], o.at("classes") + "[" + std::to_string(i) + "]");
            const auto code = e.get<std::int64_t>("code");
            const double score = e.get<double>("score");
            e.finish();
            if (!(score >= 0.0 && score <= 10.0)) throw ConfigError(e.at("score"), "must lie in [0, 10]");
            if (!t.categorical_map.emplace(code, score).second)
                throw ConfigError(e.at("code"), "duplicate class code " + std::to_string(code));
        }
        if (t.categorical_map.empty()) throw ConfigError(o.at("classes"), "must not be empty");
    } else if (kind == "continuous") {
        t.kind = ReclassTable::Kind::continuous;
        const json& bps = expect_array(o.raw("breakpoints"), o.at("breakpoints"));
        for (std::size_t i = 0; i < bps.size(); ++i) {
            StrictObject e(bps[i], o.at("breakpoints") + "[" + std::to_string(i) + "]");
            const json& upper = e.raw("upper");
            double ub = std::numeric_limits<double>::infinity();
            if (!upper.is_null()) ub = StrictObject::convert<double>(upper, e.at("upper"));
            const double score = e.get<double>("score");
            e.finish();
            if (!(score >= 0.0 && score <= 10.0)) throw ConfigError(e.at("score"), "must lie in [0, 10]");
            if (!t.breakpoints.empty() && !(ub > t.breakpoints.back().upper_bound))
                throw ConfigError(e.at("upper"), "breakpoints must be strictly ascending");
            t.breakpoints.push_back({ub, score});
        }
        if (t.breakpoints.empty()) throw ConfigError(o.at("breakpoints"), "must not be empty");
    } else {
        throw ConfigError(o.at("kind"), "expected 'categorical' or 'continuous'");
    }
    o.finish();
    return t;
}

json reclass_to_json(const ReclassTable& t) {
    if (t.kind == ReclassTable::Kind::categorical) {
        json classes = json::array();
        for (const auto& [code, score] : t.categorical_map) classes.push_back({{"code", code}, {"score", score}});
        return {{"kind", "categorical"}, {"classes", classes}};
    }
    json bps = json::array();
    for (const auto& bp : t.breakpoints)
        bps.push_back({{"upper", std::isinf(bp.upper_bound) ? json(nullptr) : json(bp.upper_bound)},
                       {"score", bp.score}});
    return {{"kind", "continuous"}, {"breakpoints", bps}};
}

PipelineConfig parse_config_json(const json& j, const fs::path& base_dir) {
    StrictObject root(j, "");
    PipelineConfig cfg;
    cfg.base_dir = base_dir;

    const json& layers = expect_array(root.raw("layers"), ".layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string at = ".layers[" + std::to_string(i) + "]";
        StrictObject o(layers[i], at);
        LayerSpec spec;
        spec.name = o.get<std::string>("name");
        spec.path = o.get<std::string>("path");
        if (o.has("reclass")) spec.reclass = reclass_from_json(o.raw("reclass"), o.at("reclass"));
        o.finish();
        cfg.layers.push_back(std::move(spec));
    }

    if (root.has("weights")) {
        StrictObject o(root.raw("weights"), ".weights");
        WeightVector w;
        for (const auto& l : cfg.layers) {
            w.names.push_back(l.name);
            w.weights.push_back(o.get<double>(l.name));
            if (w.weights.back() < 0.0) throw ConfigError(o.at(l.name), "must be nonnegative");
        }
        o.finish();
        cfg.weights = std::move(w);
    }

    if (root.has("labels")) {
        StrictObject o(root.raw("labels"), ".labels");
        const std::string rule = o.get<std::string>("rule");
        if (rule == "quantile") {
            cfg.labels.kind = LabelRule::Kind::quantile;
            cfg.labels.q = o.get<double>("q", cfg.labels.q);
        } else if (rule == "threshold") {
            cfg.labels.kind = LabelRule::Kind::threshold;
            cfg.labels.tau = o.get<double>("tau", cfg.labels.tau);
        } else {
            throw ConfigError(".labels.rule", "expected 'quantile' or 'threshold'");
        }
        o.finish();
    }

    if (root.has("sampling")) {
        StrictObject o(root.raw("sampling"), ".sampling");
        auto& s = cfg.sampling;
        s.n = o.get<std::size_t>("n", s.n);
        s.stratified = o.get<bool>("stratified", s.stratified);
        s.seed = o.get<std::uint64_t>("seed", s.seed);
        s.test_fraction = o.get<double>("test_fraction", s.test_fraction);
        o.finish();
    }

    if (root.has("classifiers")) {
        StrictObject o(root.raw("classifiers"), ".classifiers");
        cfg.classifiers.clear();
        if (o.has("tree")) cfg.classifiers.push_back(parse_tree(o.raw("tree"), o.at("tree")));
        if (o.has("forest")) cfg.classifiers.push_back(parse_forest(o.raw("forest"), o.at("forest")));
        if (o.has("logistic")) cfg.classifiers.push_back(parse_logistic(o.raw("logistic"), o.at("logistic")));
        o.finish();
    }

    if (root.has("iteration")) {
        StrictObject o(root.raw("iteration"), ".iteration");
        cfg.iteration.max_iters = o.get<int>("max_iters", cfg.iteration.max_iters);
        cfg.iteration.weight_tol = o.get<double>("weight_tol", cfg.iteration.weight_tol);
        o.finish();
    }

    if (root.has("candidates")) {
        StrictObject o(root.raw("candidates"), ".candidates");
        const std::string mode = o.get<std::string>("mode");
        if (mode == "all_cells") {
            cfg.candidates.mode = candidate_mode::AllCells{};
        } else if (mode == "top_fraction") {
            cfg.candidates.mode = candidate_mode::TopFraction{o.get<double>("fraction")};
        } else if (mode == "explicit") {
            candidate_mode::Explicit ex;
            if (o.has("path")) {
                cfg.candidates.csv = o.get<std::string>("path");
            } else {
                const json& cells = expect_array(o.raw("cells"), o.at("cells"));
                for (std::size_t i = 0; i < cells.size(); ++i) {
                    const std::string at = o.at("cells") + "[" + std::to_string(i) + "]";
                    if (!cells[i].is_array() || cells[i].size() != 2)
                        throw ConfigError(at, "expected [row, col]");
                    ex.cells.push_back({StrictObject::convert<std::size_t>(cells[i][0], at + "[0]"),
                                        StrictObject::convert<std::size_t>(cells[i][1], at + "[1]")});
                }
            }
            cfg.candidates.mode = std::move(ex);
        } else {
            throw ConfigError(".candidates.mode", "expected 'all_cells', 'top_fraction' or 'explicit'");
        }
        o.finish();
    }

    if (root.has("output_dir")) cfg.output_dir = root.get<std::string>("output_dir");
    root.finish();
    cfg.validate();
    return cfg;
}

PipelineConfig parse_config(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error&) {
        throw Error("cannot read config " + path.string());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("cannot parse config " + path.string() + ": " + e.what());
    }
    return parse_config_json(j, path.parent_path());
}

json config_to_json(const PipelineConfig& cfg) {
    json j;
    json layers = json::array();
    for (const auto& l : cfg.layers) {
        json lj = {{"name", l.name}, {"path", l.path.generic_string()}};
        if (l.reclass) lj["reclass"] = reclass_to_json(*l.reclass);
        layers.push_back(std::move(lj));
    }
    j["layers"] = layers;
    if (cfg.weights) {
        json w = json::object();
        for (std::size_t i = 0; i < cfg.weights->size(); ++i) w[cfg.weights->names[i]] = cfg.weights->weights[i];
        j["weights"] = w;
    }
    if (cfg.labels.kind == LabelRule::Kind::quantile)
        j["labels"] = {{"rule", "quantile"}, {"q", cfg.labels.q}};
    else
        j["labels"] = {{"rule", "threshold"}, {"tau", cfg.labels.tau}};
    j["sampling"] = {{"n", cfg.sampling.n},
                     {"stratified", cfg.sampling.stratified},
                     {"seed", cfg.sampling.seed},
                     {"test_fraction", cfg.sampling.test_fraction}};
    json classifiers = json::object();
    for (const auto& c : cfg.classifiers) classifiers[std::string(to_string(kind_of(c)))] = training_config_to_json(c);
    j["classifiers"] = classifiers;
    j["iteration"] = {{"max_iters", cfg.iteration.max_iters}, {"weight_tol", cfg.iteration.weight_tol}};
    if (cfg.candidates.csv) {
        j["candidates"] = {{"mode", "explicit"}, {"path", cfg.candidates.csv->generic_string()}};
    } else if (auto* top = std::get_if<candidate_mode::TopFraction>(&cfg.candidates.mode)) {
        j["candidates"] = {{"mode", "top_fraction"}, {"fraction", top->fraction}};
    } else if (auto* ex = std::get_if<candidate_mode::Explicit>(&cfg.candidates.mode)) {
        json cells = json::array();
        for (const auto& c : ex->cells) cells.push_back({c.row, c.col});
        j["candidates"] = {{"mode", "explicit"}, {"cells", cells}};
    } else {
        j["candidates"] = {{"mode", "all_cells"}};
    }
    if (cfg.output_dir) j["output_dir"] = cfg.output_dir->generic_string();
    return j;
}

// ---------------------------------------------------------------------------

ReclassTable default_landcover_table() {
    return ReclassTable::categorical({{landcover_class::developed_open, 9.0},
                                      {landcover_class::forest, 8.0},
                                      {landcover_class::agriculture, 6.0},
                                      {landcover_class::barren, 4.0},
                                      {landcover_class::wetland, 0.0},
                                      {landcover_class::water, 0.0}});
}

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ReclassTable default_slope_table() {
    return ReclassTable::continuous({{2.0, 10.0}, {5.0, 8.0}, {10.0, 5.0}, {15.0, 2.0}, {kInf, 0.0}});
}

ReclassTable default_network_distance_table() {
    return ReclassTable::continuous({{500.0, 10.0}, {1000.0, 8.0}, {2000.0, 5.0}, {5000.0, 2.0}, {kInf, 0.0}});
}

ReclassTable default_urban_distance_table() {
    return ReclassTable::continuous({{5000.0, 10.0}, {15000.0, 7.0}, {30000.0, 4.0}, {kInf, 1.0}});
}

ReclassTable default_supply_demand_table() {
    return ReclassTable::continuous({{0.5, 10.0}, {0.8, 6.0}, {1.0, 3.0}, {kInf, 0.0}});
}

PipelineConfig default_pipeline_config() {
    PipelineConfig cfg;
    cfg.layers = {{"landcover", "landcover.asc", default_landcover_table()},
                  {"road", "road_distance.asc", default_network_distance_table()},
                  {"rail", "rail_distance.asc", default_network_distance_table()},
                  {"slope", "slope.asc", default_slope_table()},
                  {"urban", "urban_distance.asc", default_urban_distance_table()},
                  {"supply_demand", "supply_demand.asc", default_supply_demand_table()}};
    return cfg;
}

// ---------------------------------------------------------------------------

ZoneTable read_zone_table(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    ZoneTable t;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!header) {
            if (line != "zone_id,value")
                throw FormatError(path.string() + ": expected header 'zone_id,value'", line_no);
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError(path.string() + ": expected 2 fields", line_no);
        std::int64_t id = 0;
        double v = 0.0;
        const char* b = line.data();
        auto r1 = std::from_chars(b, b + comma, id);
        auto r2 = std::from_chars(b + comma + 1, b + line.size(), v);
        if (r1.ec != std::errc() || r1.ptr != b + comma || r2.ec != std::errc() || r2.ptr != b + line.size() ||
            !std::isfinite(v))
            throw FormatError(path.string() + ": unparseable row", line_no);
        if (!t.emplace(id, v).second)
            throw FormatError(path.string() + ": duplicate zone id " + std::to_string(id), line_no);
    }
    if (!header) throw FormatError(path.string() + ": missing header", line_no);
    return t;
}

void write_zone_table(const ZoneTable& table, const fs::path& path) {
    std::string out = "zone_id,value\n";
    for (const auto& [id, v] : table) out += std::to_string(id) + "," + format_roundtrip(v) + "\n";
    write_file_atomic(path, out);
}

}  // namespace suitmap
