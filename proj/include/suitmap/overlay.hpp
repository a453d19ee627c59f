#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "suitmap/raster.hpp"

namespace suitmap {

struct WeightVector {
    std::vector<std::string> names;
    std::vector<double> weights;

    WeightVector() = default;
    WeightVector(std::vector<std::string> names, std::vector<double> weights);

    std::size_t size() const noexcept { return weights.size(); }
    double sum() const noexcept;

    // Nonnegative, finite, names unique, sizes match.
    void validate() const;
    WeightVector normalized() const;
    WeightVector scaled(double c) const;

    // Largest absolute per-layer difference; names must match in order.
    double max_abs_diff(const WeightVector& other) const;

    bool operator==(const WeightVector&) const = default;
};

struct Candidate {
    std::size_t id = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Candidate&) const = default;
};

using CandidateSet = std::vector<Candidate>;

struct CellIndex {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const CellIndex&) const = default;
};

namespace candidate_mode {
struct AllCells {
    bool operator==(const AllCells&) const = default;
};
struct TopFraction {
    double fraction = 0.1;
    bool operator==(const TopFraction&) const = default;
};
struct Explicit {
    std::vector<CellIndex> cells;
    bool operator==(const Explicit&) const = default;
};
}  // namespace candidate_mode

using CandidateMode =
    std::variant<candidate_mode::AllCells, candidate_mode::TopFraction, candidate_mode::Explicit>;

// Cell-wise sum of w_k * layer_k; NODATA in any layer gives NODATA.
// Weights are used as given (not renormalized).
RasterGrid weighted_sum(std::span<const RasterGrid> layers, const WeightVector& weights);

// 1 where value >= tau, else 0; NODATA propagates.
RasterGrid threshold_labels(const RasterGrid& suitability, double tau);

// Threshold that labels the top `q` fraction of data cells as 1 (ties at the
// boundary all go to class 1).
double quantile_threshold(const RasterGrid& suitability, double q);

// Number of top cells for `fraction` of `n` cells: ceil(fraction * n), at least 1.
std::size_t top_count(double fraction, std::size_t n);

CandidateSet extract_candidates(const RasterGrid& suitability, const CandidateMode& mode);

}  // namespace suitmap
