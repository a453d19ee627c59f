#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace suitmap {

// Georeferenced grid. Row 0 is the northernmost row (ESRI ASCII order).
struct RasterGrid {
    std::size_t ncols = 0;
    std::size_t nrows = 0;
    double xllcorner = 0.0;
    double yllcorner = 0.0;
    double cellsize = 1.0;
    double nodata_value = -9999.0;
    std::vector<double> values;

    RasterGrid() = default;
    RasterGrid(std::size_t ncols, std::size_t nrows, double cellsize = 1.0,
               double fill = 0.0, double xll = 0.0, double yll = 0.0,
               double nodata = -9999.0);

    // Grid with the same header as `tmpl`, every cell set to `fill`.
    static RasterGrid like(const RasterGrid& tmpl, double fill = 0.0);

    std::size_t size() const noexcept { return values.size(); }
    std::size_t index(std::size_t row, std::size_t col) const noexcept { return row * ncols + col; }

    double& at(std::size_t row, std::size_t col) { return values[index(row, col)]; }
    double at(std::size_t row, std::size_t col) const { return values[index(row, col)]; }

    bool is_nodata(double v) const noexcept { return v == nodata_value; }
    bool is_nodata(std::size_t row, std::size_t col) const { return is_nodata(at(row, col)); }

    // Map coordinates of a cell center.
    double cell_x(std::size_t col) const noexcept {
        return xllcorner + (static_cast<double>(col) + 0.5) * cellsize;
    }
    double cell_y(std::size_t row) const noexcept {
        return yllcorner + (static_cast<double>(nrows - row) - 0.5) * cellsize;
    }

    bool same_header(const RasterGrid& other, double tol = 1e-9) const noexcept;
    std::size_t count_data() const noexcept;

    // Throws Error if an invariant is broken (size, cellsize, NaN).
    void validate() const;

    bool operator==(const RasterGrid&) const = default;
};

RasterGrid read_ascii_grid(const std::filesystem::path& path);
RasterGrid parse_ascii_grid(const std::string& text);

void write_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path);
std::string format_ascii_grid(const RasterGrid& grid);

// Throws AlignmentError naming the first grid (by index, optionally by name)
// whose header disagrees with grids[0].
void check_aligned(std::span<const RasterGrid> grids,
                   std::span<const std::string> names = {});
void check_aligned(std::span<const RasterGrid* const> grids,
                   std::span<const std::string> names = {});

// Maps raw layer values onto the 0..10 suitability scale.
struct ReclassTable {
    enum class Kind { categorical, continuous };

    struct Breakpoint {
        double upper_bound;  // +inf for the catch-all entry
        double score;
        bool operator==(const Breakpoint&) const = default;
    };

    Kind kind = Kind::continuous;
    std::map<std::int64_t, double> categorical_map;
    // Value v takes the score of the first entry with v <= upper_bound;
    // values above every bound take the last entry's score.
    std::vector<Breakpoint> breakpoints;

    static ReclassTable categorical(std::map<std::int64_t, double> classes);
    static ReclassTable continuous(std::vector<Breakpoint> breakpoints);

    void validate() const;
    // NaN means "propagate NODATA".
    double score(double value) const;

    bool operator==(const ReclassTable&) const = default;
};

RasterGrid reclassify(const RasterGrid& grid, const ReclassTable& table);

}  // namespace suitmap
