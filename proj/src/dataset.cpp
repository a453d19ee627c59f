#include "suitmap/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "suitmap/error.hpp"
#include "suitmap/random.hpp"

namespace suitmap {

void FeatureMatrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && data_.empty()) cols_ = values.size();
    if (values.size() != cols_) throw Error("feature row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

std::size_t SampleSet::count_class(int label) const {
    return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
}

SampleSet SampleSet::subset(std::span<const std::size_t> rows) const {
    SampleSet out;
    out.feature_names = feature_names;
    out.X = FeatureMatrix(0, X.cols());
    for (std::size_t r : rows) {
        out.X.append_row(X.row(r));
        out.y.push_back(y[r]);
        if (!cells.empty()) out.cells.push_back(cells[r]);
    }
    return out;
}

SampleSet sample_points(std::span<const RasterGrid> layers, std::span<const std::string> names,
                        const RasterGrid& labels, std::size_t n, bool stratified,
                        std::uint64_t seed) {
    if (layers.empty()) throw Error("sampling needs at least one layer");
    if (names.size() != layers.size()) throw Error("sampling: layer names and layers differ in count");
    if (n == 0) throw Error("sample size must be positive");
    std::vector<const RasterGrid*> all;
    for (const auto& l : layers) all.push_back(&l);
    all.push_back(&labels);
    check_aligned(std::span<const RasterGrid* const>(all));

    std::vector<std::size_t> valid[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double lab = labels.values[i];
        if (labels.is_nodata(lab)) continue;
        if (lab != 0.0 && lab != 1.0) throw Error("label grid must hold 0, 1 or NODATA");
        bool ok = true;
        for (const auto& l : layers) ok = ok && !l.is_nodata(l.values[i]);
        if (ok) valid[lab == 1.0 ? 1 : 0].push_back(i);
    }

    Rng rng(seed);
    std::vector<std::size_t> picked;
    if (stratified) {
        const std::size_t want[2] = {n / 2, n - n / 2};
        for (int c : {1, 0}) {
            if (valid[c].empty()) throw Error("class " + std::to_string(c) + " empty");
            if (valid[c].size() < want[c])
                throw Error("class " + std::to_string(c) + " has " + std::to_string(valid[c].size()) +
                            " valid cells, fewer than the " + std::to_string(want[c]) + " requested");
            rng.partial_shuffle(valid[c], want[c]);
            picked.insert(picked.end(), valid[c].begin(),
                          valid[c].begin() + static_cast<std::ptrdiff_t>(want[c]));
        }
        rng.shuffle(picked);
    } else {
        std::vector<std::size_t> pool;
        std::merge(valid[0].begin(), valid[0].end(), valid[1].begin(), valid[1].end(),
                   std::back_inserter(pool));
        if (pool.size() < n)
            throw Error("fewer valid cells (" + std::to_string(pool.size()) + ") than the " +
                        std::to_string(n) + " samples requested");
        rng.partial_shuffle(pool, n);
        picked.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    }

    SampleSet s;
    s.feature_names.assign(names.begin(), names.end());
    s.X = FeatureMatrix(0, layers.size());
    std::vector<double> row(layers.size());
    for (std::size_t i : picked) {
        for (std::size_t k = 0; k < layers.size(); ++k) row[k] = layers[k].values[i];
        s.X.append_row(row);
        s.y.push_back(labels.values[i] == 1.0 ? 1 : 0);
        s.cells.push_back({i / labels.ncols, i % labels.ncols});
    }
    return s;
}

std::pair<SampleSet, SampleSet> train_test_split(const SampleSet& s, double test_fraction,
                                                 std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error("test fraction must lie strictly between 0 and 1");
    const std::size_t n = s.size();
    if (n < 2) throw Error("cannot split fewer than 2 samples");
    const auto total = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n))), 1, n - 1);

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < n; ++i) by_class[s.y[i] == 1 ? 1 : 0].push_back(i);

    // Largest-remainder apportionment of `total` across classes.
    std::size_t quota[2];
    double frac[2];
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
        const double ideal = static_cast<double>(total) * static_cast<double>(by_class[c].size()) /
                             static_cast<double>(n);
        quota[c] = static_cast<std::size_t>(std::floor(ideal));
        frac[c] = ideal - std::floor(ideal);
        assigned += quota[c];
    }
    while (assigned < total) {
        int c = frac[1] > frac[0] ? 1 : 0;
        if (quota[c] >= by_class[c].size()) c = 1 - c;
        ++quota[c];
        frac[c] = -1.0;
        ++assigned;
    }

    Rng rng(seed);
    std::vector<std::size_t> train, test;
    for (int c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        rng.shuffle(idx);
        test.insert(test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]));
        train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {s.subset(train), s.subset(test)};
}

RasterGrid supply_demand_layer(const RasterGrid& zone, const ZoneTable& capacity,
                               const ZoneTable& availability) {
    zone.validate();
    RasterGrid out = RasterGrid::like(zone, zone.nodata_value);
    for (std::size_t i = 0; i < zone.size(); ++i) {
        const double z = zone.values[i];
        if (zone.is_nodata(z)) continue;
        const auto id = static_cast<std::int64_t>(std::llround(z));
        if (static_cast<double>(id) != z)
            throw Error("zone raster holds non-integer id " + std::to_string(z));
        auto cap = capacity.find(id);
        auto avail = availability.find(id);
        if (cap == capacity.end()) throw Error("zone " + std::to_string(id) + " missing from capacity table");
        if (avail == availability.end())
            throw Error("zone " + std::to_string(id) + " missing from availability table");
        if (!(avail->second > 0.0))
            throw Error("zone " + std::to_string(id) + " has non-positive availability");
        if (cap->second < 0.0) throw Error("zone " + std::to_string(id) + " has negative capacity");
        out.values[i] = cap->second / avail->second;
    }
    return out;
}

std::vector<Segment> to_segments(std::span<const Polyline> lines) {
    std::vector<Segment> segs;
    for (const auto& l : lines)
        for (std::size_t i = 1; i < l.vertices.size(); ++i)
            segs.push_back({l.vertices[i - 1], l.vertices[i]});
    return segs;
}

}  // namespace suitmap
