#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "suitmap/raster.hpp"

namespace suitmap {

enum class ColorRamp {
    viridis,      // min-max normalized over data cells
    suitability,  // fixed anchors: 0 red, 5 yellow, 10 green
};

ColorRamp color_ramp_from_string(std::string_view s);

using Rgba = std::array<std::uint8_t, 4>;

// One RGBA pixel per cell, row-major; NODATA cells are fully transparent.
std::vector<Rgba> render_pixels(const RasterGrid& grid, ColorRamp ramp);

// Encoded PNG bytes (RGBA8, fixed compression settings, no timestamps).
std::string encode_png(const RasterGrid& grid, ColorRamp ramp);

void render_png(const RasterGrid& grid, ColorRamp ramp, const std::filesystem::path& out);

}  // namespace suitmap
