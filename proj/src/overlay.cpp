#include "suitmap/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "suitmap/error.hpp"

namespace suitmap {

WeightVector::WeightVector(std::vector<std::string> n, std::vector<double> w)
    : names(std::move(n)), weights(std::move(w)) {
    validate();
}

double WeightVector::sum() const noexcept {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void WeightVector::validate() const {
    if (names.size() != weights.size()) throw Error("weight names and values differ in length");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights[i]) || weights[i] < 0.0)
            throw Error("weight for '" + names[i] + "' must be finite and nonnegative");
        if (!seen.insert(names[i]).second) throw Error("duplicate layer name '" + names[i] + "'");
    }
}

WeightVector WeightVector::normalized() const {
    validate();
    const double s = sum();
    if (!(s > 0.0)) throw Error("cannot normalize an all-zero weight vector");
    WeightVector out = *this;
    for (double& w : out.weights) w /= s;
    return out;
}

WeightVector WeightVector::scaled(double c) const {
    WeightVector out = *this;
    for (double& w : out.weights) w *= c;
    return out;
}

double WeightVector::max_abs_diff(const WeightVector& other) const {
    if (names != other.names) throw Error("weight vectors name different layers");
    double d = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        d = std::max(d, std::abs(weights[i] - other.weights[i]));
    return d;
}

RasterGrid weighted_sum(std::span<const RasterGrid> layers, const WeightVector& weights) {
    weights.validate();
    if (layers.empty()) throw Error("weighted sum needs at least one layer");
    if (layers.size() != weights.size())
        throw Error("weighted sum: " + std::to_string(layers.size()) + " layers but " +
                    std::to_string(weights.size()) + " weights");
    check_aligned(layers, weights.names);

    RasterGrid out = RasterGrid::like(layers[0], layers[0].nodata_value);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        bool hole = false;
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const double v = layers[k].values[i];
            if (layers[k].is_nodata(v)) {
                hole = true;
                break;
            }
            acc += weights.weights[k] * v;
        }
        if (!hole) out.values[i] = acc;
    }
    return out;
}

RasterGrid threshold_labels(const RasterGrid& s, double tau) {
    RasterGrid out = RasterGrid::like(s, s.nodata_value);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double v = s.values[i];
        if (!s.is_nodata(v)) out.values[i] = v >= tau ? 1.0 : 0.0;
    }
    return out;
}

std::size_t top_count(double fraction, std::size_t n) {
    // Guard against products like 0.3 * 10 = 3.0000000000000004.
    const double exact = fraction * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

double quantile_threshold(const RasterGrid& s, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw Error("label quantile must lie in (0, 1]");
    std::vector<double> data;
    data.reserve(s.size());
    for (double v : s.values)
        if (!s.is_nodata(v)) data.push_back(v);
    if (data.empty()) throw Error("suitability map has no data cells");
    const std::size_t k = top_count(q, data.size());
    std::nth_element(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(k - 1), data.end(),
                     std::greater<>());
    return data[k - 1];
}

CandidateSet extract_candidates(const RasterGrid& s, const CandidateMode& mode) {
    CandidateSet out;
    auto push = [&](std::size_t r, std::size_t c) {
        out.push_back({out.size(), r, c, s.cell_x(c), s.cell_y(r)});
    };

    if (std::holds_alternative<candidate_mode::AllCells>(mode)) {
        for (std::size_t r = 0; r < s.nrows; ++r)
            for (std::size_t c = 0; c < s.ncols; ++c)
                if (!s.is_nodata(r, c)) push(r, c);
    } else if (auto* top = std::get_if<candidate_mode::TopFraction>(&mode)) {
        if (!(top->fraction > 0.0 && top->fraction <= 1.0))
            throw Error("top fraction must lie in (0, 1]");
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (!s.is_nodata(s.values[i])) idx.push_back(i);
        if (idx.empty()) return out;
        const std::size_t k = top_count(top->fraction, idx.size());
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (s.values[a] != s.values[b]) return s.values[a] > s.values[b];
                              return a < b;
                          });
        for (std::size_t j = 0; j < k; ++j) push(idx[j] / s.ncols, idx[j] % s.ncols);
    } else {
        const auto& cells = std::get<candidate_mode::Explicit>(mode).cells;
        for (const CellIndex& cell : cells) {
            if (cell.row >= s.nrows || cell.col >= s.ncols)
                throw Error("candidate (row " + std::to_string(cell.row) + ", col " +
                            std::to_string(cell.col) + ") is out of bounds");
            if (s.is_nodata(cell.row, cell.col))
                throw Error("candidate (row " + std::to_string(cell.row) + ", col " +
                            std::to_string(cell.col) + ") lies on a NODATA cell");
            push(cell.row, cell.col);
        }
    }
    return out;
}

}  // namespace suitmap
