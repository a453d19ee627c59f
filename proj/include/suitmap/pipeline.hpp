#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suitmap/dataset.hpp"
#include "suitmap/learners.hpp"
#include "suitmap/overlay.hpp"
#include "suitmap/raster.hpp"

namespace suitmap {

struct LayerSpec {
    std::string name;
    std::filesystem::path path;
    std::optional<ReclassTable> reclass;  // absent: the file already holds 0..10 scores
    bool operator==(const LayerSpec&) const = default;
};

struct LabelRule {
    enum class Kind { threshold, quantile };
    Kind kind = Kind::quantile;
    double tau = 6.0;
    double q = 0.3;
    bool operator==(const LabelRule&) const = default;
};

struct SamplingConfig {
    std::size_t n = 5000;
    bool stratified = true;
    std::uint64_t seed = 42;
    double test_fraction = 0.2;
    bool operator==(const SamplingConfig&) const = default;
};

struct IterationConfig {
    int max_iters = 2;
    double weight_tol = 1e-3;
    bool operator==(const IterationConfig&) const = default;
};

struct CandidateSpec {
    CandidateMode mode = candidate_mode::AllCells{};
    std::optional<std::filesystem::path> csv;  // explicit cells read from a `row,col` CSV
    bool operator==(const CandidateSpec&) const = default;
};

struct PipelineConfig {
    std::vector<LayerSpec> layers;
    std::optional<WeightVector> weights;  // used by the standalone overlay; runs start equal
    LabelRule labels;
    SamplingConfig sampling;
    std::vector<TrainingConfig> classifiers{TreeConfig{}, ForestConfig{}, LogisticConfig{}};
    IterationConfig iteration;
    CandidateSpec candidates;
    std::optional<std::filesystem::path> output_dir;

    // Relative layer/candidate paths resolve against this directory.
    std::filesystem::path base_dir;

    std::vector<std::string> layer_names() const;
    std::filesystem::path resolve(const std::filesystem::path& p) const;
    void validate() const;

    bool operator==(const PipelineConfig&) const = default;
};

using WarnFn = std::function<void(const std::string&)>;

struct ScoredLayers {
    std::vector<std::string> names;
    std::vector<RasterGrid> grids;  // reclassified, aligned
};

ScoredLayers load_layers(const PipelineConfig& cfg);

WeightVector initial_weights(std::size_t k);
WeightVector initial_weights(std::vector<std::string> names);

// Importances become weights, reordered to `layer_names`.
WeightVector weights_from_importance(const ImportanceVector& imp,
                                     std::span<const std::string> layer_names);

RasterGrid apply_label_rule(const RasterGrid& suitability, const LabelRule& rule, double* tau_out = nullptr);

CandidateSet build_candidates(const PipelineConfig& cfg, const RasterGrid& suitability);

struct RankingRow {
    std::size_t rank = 0;
    std::size_t id = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    double x = 0.0;
    double y = 0.0;
    double likelihood = 0.0;
    double suitability = 0.0;
    bool operator==(const RankingRow&) const = default;
};

using CandidateRanking = std::vector<RankingRow>;

// Sorted by likelihood desc, suitability desc, id asc. Candidates on NODATA
// in any layer are dropped and reported through `warn`.
CandidateRanking rank_candidates(const TrainedModel& model, std::span<const RasterGrid> layers,
                                 const RasterGrid& suitability, const CandidateSet& candidates,
                                 const WarnFn& warn = {});

// Re-sorts rows in place by the ranking order and renumbers ranks.
void sort_ranking(CandidateRanking& rows);

std::string ranking_to_csv(const CandidateRanking& rows);
CandidateRanking ranking_from_csv(const std::string& text);

struct IterationRecord {
    int index = 0;  // 1-based
    WeightVector weights;          // weights that built this iteration's map
    double tau = 0.0;
    std::vector<ModelKind> kinds;
    std::vector<MetricsReport> metrics;
    std::size_t winner = 0;
    ImportanceVector importance;   // winner's
    WeightVector next_weights;
    double weight_change = 0.0;    // max-norm between weights and next_weights
};

struct PipelineResult {
    RasterGrid final_suitability;
    RasterGrid final_labels;
    WeightVector final_weights;
    TrainedModel winner;           // retrained on the final map
    MetricsReport final_metrics;   // winner's held-out metrics on the final map
    std::vector<IterationRecord> history;
    int reweightings = 0;
    bool converged = false;
    CandidateRanking ranking;
};

// Writes iter_<i>/ and final/ artifacts under `out_dir` (created if needed).
PipelineResult run_lb_mcdm(const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                           const WarnFn& warn = {});

nlohmann::json weights_to_json(const WeightVector& w);
WeightVector weights_from_json(const nlohmann::json& j);

}  // namespace suitmap
