#include "suitmap/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "suitmap/error.hpp"

namespace suitmap {

RasterGrid slope_degrees(const RasterGrid& dem) {
    dem.validate();
    if (dem.ncols < 3 || dem.nrows < 3) throw Error("slope needs a DEM of at least 3x3 cells");

    RasterGrid out = RasterGrid::like(dem, dem.nodata_value);
    const double denom = 8.0 * dem.cellsize;
    constexpr double to_deg = 180.0 / std::numbers::pi;

    for (std::size_t r = 1; r + 1 < dem.nrows; ++r) {
        for (std::size_t c = 1; c + 1 < dem.ncols; ++c) {
            // a b c
            // d e f
            // g h i
            double w[9];
            bool hole = false;
            for (int k = 0; k < 9 && !hole; ++k) {
                w[k] = dem.at(r - 1 + k / 3, c - 1 + k % 3);
                hole = dem.is_nodata(w[k]);
            }
            if (hole) continue;
            const double dzdx = ((w[2] + 2 * w[5] + w[8]) - (w[0] + 2 * w[3] + w[6])) / denom;
            const double dzdy = ((w[6] + 2 * w[7] + w[8]) - (w[0] + 2 * w[1] + w[2])) / denom;
            out.at(r, c) = std::atan(std::sqrt(dzdx * dzdx + dzdy * dzdy)) * to_deg;
        }
    }
    return out;
}

void squared_distance_1d(const std::vector<double>& f, std::vector<double>& out) {
    const std::size_t n = f.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    out.assign(n, inf);

    std::vector<std::size_t> v;  // parabola vertices in the envelope
    std::vector<double> z;       // boundaries between consecutive parabolas
    v.reserve(n);
    z.reserve(n + 1);
    for (std::size_t q = 0; q < n; ++q) {
        if (!std::isfinite(f[q])) continue;
        const double fq = f[q] + static_cast<double>(q * q);
        double s = -inf;
        while (!v.empty()) {
            const std::size_t p = v.back();
            s = (fq - (f[p] + static_cast<double>(p * p))) / (2.0 * static_cast<double>(q - p));
            if (s > z.back()) break;
            v.pop_back();
            z.pop_back();
        }
        if (v.empty()) s = -inf;
        v.push_back(q);
        z.push_back(s);
    }
    if (v.empty()) return;
    z.push_back(inf);

    std::size_t k = 0;
    for (std::size_t q = 0; q < n; ++q) {
        while (z[k + 1] < static_cast<double>(q)) ++k;
        const double d = static_cast<double>(q) - static_cast<double>(v[k]);
        out[q] = d * d + f[v[k]];
    }
}

RasterGrid distance_map(const RasterGrid& mask) {
    mask.validate();
    const std::size_t rows = mask.nrows, cols = mask.ncols;
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<double> sq(mask.size(), inf);
    bool any = false;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask.is_nodata(mask.values[i]) && mask.values[i] == 1.0) {
            sq[i] = 0.0;
            any = true;
        }
    }
    if (!any) throw Error("distance map needs at least one source cell");

    // Columns, then rows.
    std::vector<double> line, res;
    line.resize(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) line[r] = sq[r * cols + c];
        squared_distance_1d(line, res);
        for (std::size_t r = 0; r < rows; ++r) sq[r * cols + c] = res[r];
    }
    line.resize(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(sq.begin() + static_cast<std::ptrdiff_t>(r * cols), cols, line.begin());
        squared_distance_1d(line, res);
        std::copy(res.begin(), res.end(), sq.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }

    RasterGrid out = RasterGrid::like(mask, 0.0);
    for (std::size_t i = 0; i < sq.size(); ++i) out.values[i] = std::sqrt(sq[i]) * mask.cellsize;
    return out;
}

double point_segment_distance(Point p, const Segment& s) {
    const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2, 0.0, 1.0);
    return std::hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

RasterGrid rasterize_polyline(const std::vector<Segment>& segments, const RasterGrid& tmpl) {
    tmpl.validate();
    RasterGrid out = RasterGrid::like(tmpl, 0.0);
    const double cs = tmpl.cellsize;
    const double half = cs / 2.0;
    const double top = tmpl.yllcorner + static_cast<double>(tmpl.nrows) * cs;

    auto col_range = [&](double lo, double hi, std::size_t& c0, std::size_t& c1) {
        // Cells whose center could lie within `half` of [lo, hi].
        double a = std::floor((lo - half - tmpl.xllcorner) / cs) - 1.0;
        double b = std::ceil((hi + half - tmpl.xllcorner) / cs) + 1.0;
        a = std::clamp(a, 0.0, static_cast<double>(tmpl.ncols));
        b = std::clamp(b, 0.0, static_cast<double>(tmpl.ncols));
        c0 = static_cast<std::size_t>(a);
        c1 = static_cast<std::size_t>(b);
    };
    auto row_range = [&](double lo, double hi, std::size_t& r0, std::size_t& r1) {
        double a = std::floor((top - hi - half) / cs) - 1.0;
        double b = std::ceil((top - lo + half) / cs) + 1.0;
        a = std::clamp(a, 0.0, static_cast<double>(tmpl.nrows));
        b = std::clamp(b, 0.0, static_cast<double>(tmpl.nrows));
        r0 = static_cast<std::size_t>(a);
        r1 = static_cast<std::size_t>(b);
    };

    for (const Segment& s : segments) {
        std::size_t c0, c1, r0, r1;
        col_range(std::min(s.a.x, s.b.x), std::max(s.a.x, s.b.x), c0, c1);
        row_range(std::min(s.a.y, s.b.y), std::max(s.a.y, s.b.y), r0, r1);
        for (std::size_t r = r0; r < r1; ++r)
            for (std::size_t c = c0; c < c1; ++c)
                if (point_segment_distance({tmpl.cell_x(c), tmpl.cell_y(r)}, s) <= half)
                    out.at(r, c) = 1.0;
    }
    return out;
}

}  // namespace suitmap
