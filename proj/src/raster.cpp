#include "suitmap/raster.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "suitmap/error.hpp"
#include "suitmap/io_util.hpp"

namespace suitmap {

RasterGrid::RasterGrid(std::size_t ncols_, std::size_t nrows_, double cellsize_, double fill,
                       double xll, double yll, double nodata)
    : ncols(ncols_), nrows(nrows_), xllcorner(xll), yllcorner(yll), cellsize(cellsize_),
      nodata_value(nodata), values(ncols_ * nrows_, fill) {}

RasterGrid RasterGrid::like(const RasterGrid& tmpl, double fill) {
    return RasterGrid(tmpl.ncols, tmpl.nrows, tmpl.cellsize, fill, tmpl.xllcorner,
                      tmpl.yllcorner, tmpl.nodata_value);
}

bool RasterGrid::same_header(const RasterGrid& o, double tol) const noexcept {
    return ncols == o.ncols && nrows == o.nrows && std::abs(xllcorner - o.xllcorner) <= tol &&
           std::abs(yllcorner - o.yllcorner) <= tol && std::abs(cellsize - o.cellsize) <= tol;
}

std::size_t RasterGrid::count_data() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [this](double v) { return !is_nodata(v); }));
}

void RasterGrid::validate() const {
    if (ncols == 0 || nrows == 0) throw Error("raster dimensions must be positive");
    if (values.size() != ncols * nrows) throw Error("cell count mismatch");
    if (!(cellsize > 0.0) || !std::isfinite(cellsize)) throw Error("cellsize must be positive");
    if (!std::isfinite(xllcorner) || !std::isfinite(yllcorner) || !std::isfinite(nodata_value))
        throw Error("raster header values must be finite");
    for (double v : values)
        if (!std::isfinite(v)) throw Error("raster contains a non-finite cell value");
}

// ---------------------------------------------------------------------------
// ESRI ASCII grid

namespace {

struct LineCursor {
    const std::string& text;
    std::size_t pos = 0;
    std::size_t line = 0;

    // Next line with at least one non-space character; false at EOF.
    bool next(std::string_view& out) {
        while (pos < text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            std::string_view l(text.data() + pos, end - pos);
            pos = end + 1;
            ++line;
            if (l.find_first_not_of(" \t\r\f\v") != std::string_view::npos) {
                out = l;
                return true;
            }
        }
        return false;
    }
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

template <class F>
void for_each_token(std::string_view l, F&& f) {
    std::size_t i = 0;
    while (i < l.size()) {
        while (i < l.size() && is_space(l[i])) ++i;
        std::size_t j = i;
        while (j < l.size() && !is_space(l[j])) ++j;
        if (j > i) f(l.substr(i, j - i));
        i = j;
    }
}

bool parse_real(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size() && std::isfinite(out);
}

std::string lower(std::string_view s) {
    std::string r(s);
    std::transform(r.begin(), r.end(), r.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return r;
}

}  // namespace

RasterGrid parse_ascii_grid(const std::string& text) {
    LineCursor cur{text};
    static constexpr const char* keys[] = {"ncols",     "nrows",    "xllcorner",
                                           "yllcorner", "cellsize", "nodata_value"};
    double header[6] = {};
    for (int k = 0; k < 6; ++k) {
        std::string_view l;
        if (!cur.next(l))
            throw FormatError(std::string("malformed header: missing ") + keys[k], cur.line);
        std::vector<std::string_view> toks;
        for_each_token(l, [&](std::string_view t) { toks.push_back(t); });
        if (toks.size() != 2 || lower(toks[0]) != keys[k])
            throw FormatError(std::string("malformed header: expected '") + keys[k] + " <value>'",
                              cur.line);
        if (k < 2) {
            std::size_t v = 0;
            auto res = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), v);
            if (res.ec != std::errc() || res.ptr != toks[1].data() + toks[1].size() || v == 0)
                throw FormatError(std::string("malformed header: ") + keys[k] +
                                      " must be a positive integer",
                                  cur.line);
            header[k] = static_cast<double>(v);
        } else if (!parse_real(toks[1], header[k])) {
            throw FormatError(std::string("malformed header: unparseable ") + keys[k], cur.line);
        }
    }
    if (!(header[4] > 0.0)) throw FormatError("malformed header: cellsize must be positive", 5);

    RasterGrid g;
    g.ncols = static_cast<std::size_t>(header[0]);
    g.nrows = static_cast<std::size_t>(header[1]);
    g.xllcorner = header[2];
    g.yllcorner = header[3];
    g.cellsize = header[4];
    g.nodata_value = header[5];
    const std::size_t expected = g.ncols * g.nrows;
    g.values.reserve(expected);

    std::string_view l;
    while (cur.next(l)) {
        for_each_token(l, [&](std::string_view tok) {
            if (g.values.size() == expected)
                throw FormatError("cell count mismatch: more than " + std::to_string(expected) +
                                      " values",
                                  cur.line);
            double v = 0.0;
            if (!parse_real(tok, v))
                throw FormatError("unparseable number '" + std::string(tok) + "'", cur.line);
            g.values.push_back(v);
        });
    }
    if (g.values.size() != expected)
        throw FormatError("cell count mismatch: expected " + std::to_string(expected) +
                              " values, found " + std::to_string(g.values.size()),
                          cur.line);
    return g;
}

RasterGrid read_ascii_grid(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error&) {
        throw Error("cannot read raster " + path.string());
    }
    try {
        return parse_ascii_grid(text);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.message(), e.line());
    }
}

std::string format_ascii_grid(const RasterGrid& g) {
    g.validate();
    std::string out;
    out.reserve(96 + g.values.size() * 12);
    out += "ncols " + std::to_string(g.ncols) + "\n";
    out += "nrows " + std::to_string(g.nrows) + "\n";
    out += "xllcorner " + format_roundtrip(g.xllcorner) + "\n";
    out += "yllcorner " + format_roundtrip(g.yllcorner) + "\n";
    out += "cellsize " + format_roundtrip(g.cellsize) + "\n";
    const std::string nodata = format_roundtrip(g.nodata_value);
    out += "NODATA_value " + nodata + "\n";
    for (std::size_t r = 0; r < g.nrows; ++r) {
        for (std::size_t c = 0; c < g.ncols; ++c) {
            if (c) out += ' ';
            double v = g.at(r, c);
            out += g.is_nodata(v) ? nodata : format_fixed6(v);
        }
        out += '\n';
    }
    return out;
}

void write_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path) {
    write_file_atomic(path, format_ascii_grid(grid));
}

// ---------------------------------------------------------------------------
// Alignment

namespace {

template <class Get>
void check_aligned_impl(std::size_t n, Get get, std::span<const std::string> names) {
    if (n == 0) throw Error("check_aligned: empty layer list");
    const RasterGrid& ref = get(0);
    auto label = [&](std::size_t i) {
        return i < names.size() ? "'" + names[i] + "'" : "#" + std::to_string(i);
    };
    auto differs = [](double a, double b) { return std::abs(a - b) > 1e-9; };
    for (std::size_t i = 1; i < n; ++i) {
        const RasterGrid& g = get(i);
        const char* field = nullptr;
        if (g.ncols != ref.ncols) field = "ncols";
        else if (g.nrows != ref.nrows) field = "nrows";
        else if (differs(g.xllcorner, ref.xllcorner)) field = "xllcorner";
        else if (differs(g.yllcorner, ref.yllcorner)) field = "yllcorner";
        else if (differs(g.cellsize, ref.cellsize)) field = "cellsize";
        if (field)
            throw AlignmentError("misaligned raster " + label(i) + ": " + field + " differs from " +
                                     label(0),
                                 i, field);
    }
}

}  // namespace

void check_aligned(std::span<const RasterGrid> grids, std::span<const std::string> names) {
    check_aligned_impl(grids.size(), [&](std::size_t i) -> const RasterGrid& { return grids[i]; },
                       names);
}

void check_aligned(std::span<const RasterGrid* const> grids, std::span<const std::string> names) {
    check_aligned_impl(grids.size(), [&](std::size_t i) -> const RasterGrid& { return *grids[i]; },
                       names);
}

// ---------------------------------------------------------------------------
// Reclassification

ReclassTable ReclassTable::categorical(std::map<std::int64_t, double> classes) {
    ReclassTable t;
    t.kind = Kind::categorical;
    t.categorical_map = std::move(classes);
    t.validate();
    return t;
}

ReclassTable ReclassTable::continuous(std::vector<Breakpoint> bps) {
    ReclassTable t;
    t.kind = Kind::continuous;
    t.breakpoints = std::move(bps);
    t.validate();
    return t;
}

void ReclassTable::validate() const {
    auto check_score = [](double s) {
        if (!(s >= 0.0 && s <= 10.0)) throw Error("reclass score outside [0, 10]");
    };
    if (kind == Kind::categorical) {
        if (categorical_map.empty()) throw Error("categorical reclass table is empty");
        for (const auto& [code, s] : categorical_map) check_score(s);
    } else {
        if (breakpoints.empty()) throw Error("continuous reclass table is empty");
        for (std::size_t i = 0; i < breakpoints.size(); ++i) {
            check_score(breakpoints[i].score);
            if (std::isnan(breakpoints[i].upper_bound)) throw Error("breakpoint bound is NaN");
            if (i && !(breakpoints[i].upper_bound > breakpoints[i - 1].upper_bound))
                throw Error("reclass breakpoints must be strictly ascending");
        }
    }
}

double ReclassTable::score(double v) const {
    if (kind == Kind::categorical) {
        double ip = 0.0;
        if (std::modf(v, &ip) != 0.0 || std::abs(v) > 9.0e15)
            return std::numeric_limits<double>::quiet_NaN();
        auto it = categorical_map.find(static_cast<std::int64_t>(ip));
        return it == categorical_map.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    }
    for (const auto& bp : breakpoints)
        if (v <= bp.upper_bound) return bp.score;
    return breakpoints.back().score;
}

RasterGrid reclassify(const RasterGrid& grid, const ReclassTable& table) {
    table.validate();
    RasterGrid out = RasterGrid::like(grid, grid.nodata_value);
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        double v = grid.values[i];
        if (grid.is_nodata(v)) continue;
        double s = table.score(v);
        if (!std::isnan(s)) out.values[i] = s;
    }
    return out;
}

}  // namespace suitmap
