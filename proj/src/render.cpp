#include "suitmap/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "suitmap/error.hpp"
#include "suitmap/io_util.hpp"

namespace suitmap {

namespace {

struct Anchor {
    double t;
    double r, g, b;
};

// Matplotlib viridis sampled at eighths.
constexpr Anchor kViridis[] = {
    {0.000, 68, 1, 84},    {0.125, 71, 44, 122},  {0.250, 59, 81, 139},
    {0.375, 44, 113, 142}, {0.500, 33, 144, 141}, {0.625, 39, 173, 129},
    {0.750, 92, 200, 99},  {0.875, 170, 220, 50}, {1.000, 253, 231, 37},
};

// Scores 0..10 mapped to t = score/10.
constexpr Anchor kSuitability[] = {
    {0.00, 215, 25, 28}, {0.25, 253, 174, 97}, {0.50, 255, 255, 191}, {0.75, 166, 217, 106}, {1.00, 26, 150, 65},
};

template <std::size_t N>
Rgba sample(const Anchor (&ramp)[N], double t) {
    t = std::clamp(t, 0.0, 1.0);
    std::size_t i = 1;
    while (i + 1 < N && t > ramp[i].t) ++i;
    const Anchor& a = ramp[i - 1];
    const Anchor& b = ramp[i];
    const double u = (t - a.t) / (b.t - a.t);
    auto ch = [&](double x, double y) { return static_cast<std::uint8_t>(std::lround(x + (y - x) * u)); };
    return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b), 255};
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), len);
}

void png_flush_noop(png_structp) {}

}  // namespace

ColorRamp color_ramp_from_string(std::string_view s) {
    if (s == "viridis") return ColorRamp::viridis;
    if (s == "suitability") return ColorRamp::suitability;
    throw Error("unknown color ramp '" + std::string(s) + "'");
}

std::vector<Rgba> render_pixels(const RasterGrid& grid, ColorRamp ramp) {
    grid.validate();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : grid.values) {
        if (grid.is_nodata(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<Rgba> px(grid.size(), Rgba{0, 0, 0, 0});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = grid.values[i];
        if (grid.is_nodata(v)) continue;
        if (ramp == ColorRamp::suitability) {
            px[i] = sample(kSuitability, v / 10.0);
        } else {
            const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
            px[i] = sample(kViridis, t);
        }
    }
    return px;
}

std::string encode_png(const RasterGrid& grid, ColorRamp ramp) {
    const std::vector<Rgba> px = render_pixels(grid, ramp);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("cannot initialise PNG encoder");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("cannot initialise PNG encoder");
    }
    std::string out;
    std::vector<png_bytep> rows(grid.nrows);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encoding failed");
    }
    png_set_write_fn(png, &out, png_write_to_string, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(grid.ncols), static_cast<png_uint_32>(grid.nrows), 8,
                 PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_write_info(png, info);
    for (std::size_t r = 0; r < grid.nrows; ++r)
        rows[r] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(px.data() + r * grid.ncols));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void render_png(const RasterGrid& grid, ColorRamp ramp, const std::filesystem::path& out) {
    write_file_atomic(out, encode_png(grid, ramp));
}

}  // namespace suitmap
