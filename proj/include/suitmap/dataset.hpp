#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "suitmap/overlay.hpp"
#include "suitmap/raster.hpp"
#include "suitmap/terrain.hpp"

namespace suitmap {

// Dense row-major sample-by-feature matrix.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    void append_row(std::span<const double> values);
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct SampleSet {
    std::vector<std::string> feature_names;
    FeatureMatrix X;
    std::vector<int> y;
    std::vector<CellIndex> cells;

    std::size_t size() const noexcept { return y.size(); }
    std::size_t count_class(int label) const;
    SampleSet subset(std::span<const std::size_t> rows) const;

    bool operator==(const SampleSet&) const = default;
};

// Uniform sampling without replacement over cells that are data in every
// layer and in `labels`. Stratified draws ceil(n/2) positives, floor(n/2) negatives.
SampleSet sample_points(std::span<const RasterGrid> layers, std::span<const std::string> names,
                        const RasterGrid& labels, std::size_t n, bool stratified,
                        std::uint64_t seed);

// Class-stratified split; the test part is round(test_fraction * n) rows
// apportioned across classes by largest remainder.
std::pair<SampleSet, SampleSet> train_test_split(const SampleSet& s, double test_fraction,
                                                 std::uint64_t seed);

using ZoneTable = std::map<std::int64_t, double>;

// capacity[z] / availability[z] per cell of zone z.
RasterGrid supply_demand_layer(const RasterGrid& zone, const ZoneTable& capacity,
                               const ZoneTable& availability);

struct Polyline {
    std::vector<Point> vertices;
};

std::vector<Segment> to_segments(std::span<const Polyline> lines);

struct SyntheticLandscape {
    RasterGrid dem;
    RasterGrid landcover;
    RasterGrid road_mask;
    RasterGrid rail_mask;
    RasterGrid urban_mask;
    RasterGrid zone;
    ZoneTable capacity;
    ZoneTable availability;
    std::uint64_t effective_seed = 0;  // seed actually used after span retries
};

// Land-cover class codes written by the generator.
namespace landcover_class {
inline constexpr int developed_open = 1;
inline constexpr int forest = 2;
inline constexpr int agriculture = 3;
inline constexpr int barren = 4;
inline constexpr int wetland = 5;
inline constexpr int water = 6;
}  // namespace landcover_class

// Deterministic in (nrows, ncols, cellsize, seed); nrows, ncols >= 32.
SyntheticLandscape gen_synthetic_landscape(std::size_t nrows, std::size_t ncols, double cellsize,
                                           std::uint64_t seed);

}  // namespace suitmap
