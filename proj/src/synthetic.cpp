#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "suitmap/dataset.hpp"
#include "suitmap/error.hpp"
#include "suitmap/random.hpp"
#include "suitmap/terrain.hpp"

namespace suitmap {

namespace {

constexpr int kBumps = 6;
constexpr int kMaxAttempts = 100;

RasterGrid make_dem(const RasterGrid& tmpl, Rng& rng) {
    RasterGrid dem = RasterGrid::like(tmpl, 0.0);
    const double extent = static_cast<double>(std::min(tmpl.nrows, tmpl.ncols)) * tmpl.cellsize;
    const double width = static_cast<double>(tmpl.ncols) * tmpl.cellsize;
    const double height = static_cast<double>(tmpl.nrows) * tmpl.cellsize;
    const double base = rng.uniform(50.0, 150.0);

    struct Bump {
        double x, y, sigma, amp;
    };
    std::array<Bump, kBumps> bumps;
    for (auto& b : bumps) {
        b.x = tmpl.xllcorner + rng.uniform() * width;
        b.y = tmpl.yllcorner + rng.uniform() * height;
        b.sigma = rng.uniform(0.06, 0.2) * extent;
        // amp/sigma in [0.4, 1.2] puts the steepest flank between ~13 and ~36 degrees.
        b.amp = rng.uniform(0.4, 1.2) * b.sigma;
    }
    for (std::size_t r = 0; r < dem.nrows; ++r) {
        for (std::size_t c = 0; c < dem.ncols; ++c) {
            double z = base;
            const double x = dem.cell_x(c), y = dem.cell_y(r);
            for (const auto& b : bumps) {
                const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
                z += b.amp * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
            }
            dem.at(r, c) = z;
        }
    }
    return dem;
}

// Bilinear interpolation of a coarse random lattice with smoothstep easing.
std::vector<double> smooth_noise(std::size_t nrows, std::size_t ncols, std::size_t spacing, Rng& rng) {
    const std::size_t lr = nrows / spacing + 2, lc = ncols / spacing + 2;
    std::vector<double> lattice(lr * lc);
    for (double& v : lattice) v = rng.uniform();
    auto ease = [](double t) { return t * t * (3.0 - 2.0 * t); };
    std::vector<double> out(nrows * ncols);
    for (std::size_t r = 0; r < nrows; ++r) {
        const double fr = static_cast<double>(r) / static_cast<double>(spacing);
        const auto r0 = static_cast<std::size_t>(fr);
        const double tr = ease(fr - static_cast<double>(r0));
        for (std::size_t c = 0; c < ncols; ++c) {
            const double fc = static_cast<double>(c) / static_cast<double>(spacing);
            const auto c0 = static_cast<std::size_t>(fc);
            const double tc = ease(fc - static_cast<double>(c0));
            auto L = [&](std::size_t i, std::size_t j) { return lattice[i * lc + j]; };
            const double top = L(r0, c0) * (1 - tc) + L(r0, c0 + 1) * tc;
            const double bot = L(r0 + 1, c0) * (1 - tc) + L(r0 + 1, c0 + 1) * tc;
            out[r * ncols + c] = top * (1 - tr) + bot * tr;
        }
    }
    return out;
}

RasterGrid make_landcover(const RasterGrid& tmpl, Rng& rng) {
    const std::size_t spacing = std::max<std::size_t>(8, std::min(tmpl.nrows, tmpl.ncols) / 8);
    std::vector<double> noise = smooth_noise(tmpl.nrows, tmpl.ncols, spacing, rng);

    // Classes in ascending noise order with their target area shares.
    struct Share {
        int code;
        double fraction;
    };
    static constexpr std::array<Share, 6> shares = {{{landcover_class::water, 0.06},
                                                     {landcover_class::wetland, 0.08},
                                                     {landcover_class::forest, 0.34},
                                                     {landcover_class::agriculture, 0.26},
                                                     {landcover_class::barren, 0.10},
                                                     {landcover_class::developed_open, 0.16}}};
    std::vector<double> sorted = noise;
    std::sort(sorted.begin(), sorted.end());
    std::array<double, 6> upper{};
    double cum = 0.0;
    for (std::size_t k = 0; k < shares.size(); ++k) {
        cum += shares[k].fraction;
        const auto idx = std::min(sorted.size() - 1,
                                  static_cast<std::size_t>(cum * static_cast<double>(sorted.size())));
        upper[k] = k + 1 == shares.size() ? std::numeric_limits<double>::infinity() : sorted[idx];
    }
    RasterGrid lc = RasterGrid::like(tmpl, 0.0);
    for (std::size_t i = 0; i < noise.size(); ++i) {
        std::size_t k = 0;
        while (noise[i] >= upper[k]) ++k;
        lc.values[i] = shares[k].code;
    }
    return lc;
}

// Edge-to-opposite-edge polylines with one or two interior bends.
std::vector<Polyline> make_lines(const RasterGrid& tmpl, Rng& rng, int count) {
    const double w = static_cast<double>(tmpl.ncols) * tmpl.cellsize;
    const double h = static_cast<double>(tmpl.nrows) * tmpl.cellsize;
    const double x0 = tmpl.xllcorner, y0 = tmpl.yllcorner;
    std::vector<Polyline> lines;
    for (int i = 0; i < count; ++i) {
        Polyline pl;
        const bool horizontal = rng.below(2) == 0;
        const int bends = static_cast<int>(rng.between(1, 2));
        const int pts = bends + 2;
        for (int p = 0; p < pts; ++p) {
            const double t = static_cast<double>(p) / static_cast<double>(pts - 1);
            if (horizontal)
                pl.vertices.push_back({x0 + t * w, y0 + rng.uniform(0.05, 0.95) * h});
            else
                pl.vertices.push_back({x0 + rng.uniform(0.05, 0.95) * w, y0 + t * h});
        }
        lines.push_back(std::move(pl));
    }
    return lines;
}

RasterGrid make_urban(const RasterGrid& tmpl, Rng& rng) {
    RasterGrid mask = RasterGrid::like(tmpl, 0.0);
    const int discs = static_cast<int>(rng.between(1, 3));
    const double dim = static_cast<double>(std::min(tmpl.nrows, tmpl.ncols));
    for (int d = 0; d < discs; ++d) {
        const double cr = rng.uniform() * static_cast<double>(tmpl.nrows);
        const double cc = rng.uniform() * static_cast<double>(tmpl.ncols);
        const double radius = std::max(1.0, rng.uniform(0.03, 0.08) * dim);
        for (std::size_t r = 0; r < tmpl.nrows; ++r)
            for (std::size_t c = 0; c < tmpl.ncols; ++c) {
                const double dr = static_cast<double>(r) + 0.5 - cr;
                const double dc = static_cast<double>(c) + 0.5 - cc;
                if (dr * dr + dc * dc <= radius * radius) mask.at(r, c) = 1.0;
            }
    }
    return mask;
}

bool slope_spans_range(const RasterGrid& dem) {
    const RasterGrid slope = slope_degrees(dem);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : slope.values) {
        if (slope.is_nodata(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return lo < 2.0 && hi > 15.0;
}

bool has_source(const RasterGrid& mask) {
    return std::find(mask.values.begin(), mask.values.end(), 1.0) != mask.values.end();
}

}  // namespace

SyntheticLandscape gen_synthetic_landscape(std::size_t nrows, std::size_t ncols, double cellsize,
                                           std::uint64_t seed) {
    if (nrows < 32 || ncols < 32) throw Error("synthetic landscape needs at least 32x32 cells");
    if (!(cellsize > 0.0) || !std::isfinite(cellsize)) throw Error("cellsize must be positive");
    const RasterGrid tmpl(ncols, nrows, cellsize);

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        Rng rng(mix_seed(s, 0));
        SyntheticLandscape out;
        out.effective_seed = s;
        out.dem = make_dem(tmpl, rng);
        if (!slope_spans_range(out.dem)) continue;

        out.landcover = make_landcover(tmpl, rng);
        out.road_mask = rasterize_polyline(
            to_segments(make_lines(tmpl, rng, static_cast<int>(rng.between(2, 5)))), tmpl);
        out.rail_mask = rasterize_polyline(
            to_segments(make_lines(tmpl, rng, static_cast<int>(rng.between(2, 5)))), tmpl);
        out.urban_mask = make_urban(tmpl, rng);
        if (!has_source(out.road_mask) || !has_source(out.rail_mask) || !has_source(out.urban_mask))
            continue;

        // 3x3 county-like blocks, ids 1..9.
        out.zone = RasterGrid::like(tmpl, 0.0);
        for (std::size_t r = 0; r < nrows; ++r)
            for (std::size_t c = 0; c < ncols; ++c)
                out.zone.at(r, c) = static_cast<double>(1 + (r * 3 / nrows) * 3 + (c * 3 / ncols));

        // Ratios cover [0, 1.5] evenly, assigned to zones in random order.
        std::vector<double> ratios;
        for (int k = 0; k < 9; ++k) ratios.push_back(1.5 * k / 8.0);
        rng.shuffle(ratios);
        for (int z = 1; z <= 9; ++z) {
            const double avail = std::round(rng.uniform(50'000.0, 250'000.0));
            out.availability[z] = avail;
            out.capacity[z] = ratios[static_cast<std::size_t>(z - 1)] * avail;
        }
        return out;
    }
    throw Error("synthetic generator could not meet the slope span after " +
                std::to_string(kMaxAttempts) + " seeds");
}

}  // namespace suitmap
