#pragma once

#include <vector>

#include "suitmap/raster.hpp"

namespace suitmap {

// Slope in degrees by Horn's 3x3 weighted differences. Border cells and
// cells whose window touches NODATA come out as NODATA.
RasterGrid slope_degrees(const RasterGrid& dem);

// Exact Euclidean distance (map units, cell center to cell center) to the
// nearest source cell (value 1). NODATA and 0 are non-source.
RasterGrid distance_map(const RasterGrid& mask);

// Squared distances in cell units along one line, Felzenszwalb-Huttenlocher
// lower envelope of parabolas. Entries of `f` that are +inf are ignored.
void squared_distance_1d(const std::vector<double>& f, std::vector<double>& out);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Segment {
    Point a;
    Point b;
};

double point_segment_distance(Point p, const Segment& s);

// 1 where the cell center lies within cellsize/2 of any segment, else 0.
RasterGrid rasterize_polyline(const std::vector<Segment>& segments, const RasterGrid& tmpl);

}  // namespace suitmap
