#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

#include "suitmap/config.hpp"
#include "suitmap/dataset.hpp"
#include "suitmap/error.hpp"
#include "suitmap/io_util.hpp"
#include "suitmap/learners.hpp"
#include "suitmap/overlay.hpp"
#include "suitmap/pipeline.hpp"
#include "suitmap/raster.hpp"
#include "suitmap/render.hpp"
#include "suitmap/terrain.hpp"

namespace suitmap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    // gen-synthetic
    std::vector<std::size_t> size;
    double cellsize = 100.0;
    std::uint64_t seed = 0;
    // shared
    std::string in, out, table, dem, mask, config, model, ramp = "viridis";
    std::string zone, capacity, availability;
};

json load_json(const fs::path& p, const std::string& what) {
    std::string text;
    try {
        text = read_file(p);
    } catch (const Error&) {
        throw Error("cannot read " + what + " " + p.string());
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("cannot parse " + what + " " + p.string() + ": " + e.what());
    }
}

void gen_synthetic(const Options& o, std::ostream& out) {
    const fs::path dir = o.out;
    fs::create_directories(dir);
    const SyntheticLandscape land = gen_synthetic_landscape(o.size[0], o.size[1], o.cellsize, o.seed);

    write_ascii_grid(land.dem, dir / "dem.asc");
    write_ascii_grid(land.landcover, dir / "landcover.asc");
    write_ascii_grid(land.road_mask, dir / "road_mask.asc");
    write_ascii_grid(land.rail_mask, dir / "rail_mask.asc");
    write_ascii_grid(land.urban_mask, dir / "urban_mask.asc");
    write_ascii_grid(land.zone, dir / "zone.asc");
    write_zone_table(land.capacity, dir / "capacity.csv");
    write_zone_table(land.availability, dir / "availability.csv");

    // Derived criterion layers consumed by the default config.
    write_ascii_grid(slope_degrees(land.dem), dir / "slope.asc");
    write_ascii_grid(distance_map(land.road_mask), dir / "road_distance.asc");
    write_ascii_grid(distance_map(land.rail_mask), dir / "rail_distance.asc");
    write_ascii_grid(distance_map(land.urban_mask), dir / "urban_distance.asc");
    write_ascii_grid(supply_demand_layer(land.zone, land.capacity, land.availability), dir / "supply_demand.asc");

    write_file_atomic(dir / "pipeline.json", config_to_json(default_pipeline_config()).dump(2) + "\n");
    out << "wrote synthetic landscape " << o.size[0] << "x" << o.size[1] << " (seed " << land.effective_seed
        << ") to " << dir.string() << "\n";
}

void overlay_cmd(const Options& o, std::ostream& out) {
    const PipelineConfig cfg = parse_config(o.config);
    const ScoredLayers layers = load_layers(cfg);
    const WeightVector w = cfg.weights ? cfg.weights->normalized() : initial_weights(layers.names);
    write_ascii_grid(weighted_sum(layers.grids, w), o.out);
    out << "wrote " << o.out << "\n";
}

void run_pipeline_cmd(const Options& o, std::ostream& out, std::ostream& err) {
    const PipelineConfig cfg = parse_config(o.config);
    fs::path dir;
    if (!o.out.empty()) dir = o.out;
    else if (cfg.output_dir) dir = cfg.resolve(*cfg.output_dir);
    else throw Error("no output directory: pass --out or set output_dir in the config");

    const PipelineResult r = run_lb_mcdm(cfg, dir, [&](const std::string& m) { err << "warning: " << m << "\n"; });
    for (const auto& it : r.history) {
        out << "iteration " << it.index << ": winner " << to_string(it.kinds[it.winner]) << " f1 "
            << format_roundtrip(it.metrics[it.winner].f1) << ", weight change " << format_roundtrip(it.weight_change)
            << "\n";
    }
    out << "final " << to_string(r.winner.kind) << " f1 " << format_roundtrip(r.final_metrics.f1) << "\n";
    out << "weights:";
    for (std::size_t i = 0; i < r.final_weights.size(); ++i)
        out << " " << r.final_weights.names[i] << "=" << format_roundtrip(r.final_weights.weights[i]);
    out << "\nranked " << r.ranking.size() << " candidates into " << (dir / "final" / "ranking.csv").string() << "\n";
}

void rank_cmd(const Options& o, std::ostream& out, std::ostream& err) {
    const TrainedModel model = model_from_json(load_json(o.model, "model"));
    const PipelineConfig cfg = parse_config(o.config);
    const ScoredLayers layers = load_layers(cfg);
    if (model.feature_names != layers.names)
        throw Error("model features do not match the config's layers");
    WeightVector w;
    if (model.suitability_weights) w = *model.suitability_weights;
    else if (cfg.weights) w = cfg.weights->normalized();
    else w = initial_weights(layers.names);
    const RasterGrid map = weighted_sum(layers.grids, w);
    const CandidateSet cands = build_candidates(cfg, map);
    const CandidateRanking ranking =
        rank_candidates(model, layers.grids, map, cands, [&](const std::string& m) { err << "warning: " << m << "\n"; });
    write_file_atomic(o.out, ranking_to_csv(ranking));
    out << "ranked " << ranking.size() << " candidates into " << o.out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Raster multi-criteria site suitability with learned criterion weights", "suitmap"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("gen-synthetic", "Generate a seeded synthetic landscape");
    gen->add_option("--size", o.size, "Rows and columns")->expected(2)->required();
    gen->add_option("--cellsize", o.cellsize, "Cell size in map units")->capture_default_str();
    gen->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    gen->add_option("--out", o.out, "Output directory")->required();

    auto* recl = app.add_subcommand("reclassify", "Reclassify a raster onto the 0-10 scale");
    recl->add_option("--in", o.in, "Input grid")->required();
    recl->add_option("--table", o.table, "Reclass table JSON")->required();
    recl->add_option("--out", o.out, "Output grid")->required();

    auto* slope = app.add_subcommand("slope", "Slope in degrees from a DEM");
    slope->add_option("--dem", o.dem, "DEM grid")->required();
    slope->add_option("--out", o.out, "Output grid")->required();

    auto* dist = app.add_subcommand("distance", "Euclidean distance to source cells of a mask");
    dist->add_option("--mask", o.mask, "Mask grid (1 = source)")->required();
    dist->add_option("--out", o.out, "Output grid")->required();

    auto* sd = app.add_subcommand("supply-demand", "Zone capacity / availability ratio layer");
    sd->add_option("--zone", o.zone, "Zone id grid")->required();
    sd->add_option("--capacity", o.capacity, "zone_id,value CSV")->required();
    sd->add_option("--availability", o.availability, "zone_id,value CSV")->required();
    sd->add_option("--out", o.out, "Output grid")->required();

    auto* ovl = app.add_subcommand("overlay", "Weighted sum of the config's layers");
    ovl->add_option("--config", o.config, "Pipeline config JSON")->required();
    ovl->add_option("--out", o.out, "Output grid")->required();

    auto* run = app.add_subcommand("run-pipeline", "Run the learned-weight suitability pipeline");
    run->add_option("--config", o.config, "Pipeline config JSON")->required();
    run->add_option("--out", o.out, "Output directory");

    auto* rank = app.add_subcommand("rank", "Rank candidates with a saved model");
    rank->add_option("--model", o.model, "Model JSON")->required();
    rank->add_option("--config", o.config, "Pipeline config JSON")->required();
    rank->add_option("--out", o.out, "Ranking CSV")->required();

    auto* render = app.add_subcommand("render", "Render a grid as PNG");
    render->add_option("--in", o.in, "Input grid")->required();
    render->add_option("--out", o.out, "Output PNG")->required();
    render->add_option("--ramp", o.ramp, "viridis or suitability")
        ->check(CLI::IsMember({"viridis", "suitability"}))
        ->capture_default_str();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*gen) gen_synthetic(o, out);
        else if (*recl) {
            const ReclassTable t = reclass_from_json(load_json(o.table, "reclass table"));
            write_ascii_grid(reclassify(read_ascii_grid(o.in), t), o.out);
        } else if (*slope) write_ascii_grid(slope_degrees(read_ascii_grid(o.dem)), o.out);
        else if (*dist) write_ascii_grid(distance_map(read_ascii_grid(o.mask)), o.out);
        else if (*sd)
            write_ascii_grid(supply_demand_layer(read_ascii_grid(o.zone), read_zone_table(o.capacity),
                                                 read_zone_table(o.availability)),
                             o.out);
        else if (*ovl) overlay_cmd(o, out);
        else if (*run) run_pipeline_cmd(o, out, err);
        else if (*rank) rank_cmd(o, out, err);
        else if (*render) render_png(read_ascii_grid(o.in), color_ramp_from_string(o.ramp), o.out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace suitmap::cli
