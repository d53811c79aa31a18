#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fieldscope/vec2.hpp"

namespace fieldscope {

/// Axis-aligned rectangle of environment coordinates.
struct Bounds {
    double x_min = -20.0;
    double x_max = 20.0;
    double y_min = -20.0;
    double y_max = 20.0;
};

/// Regular 2-D grid over a bounding rectangle.
///
/// Points sit at min + i*step per axis (the last point is clipped to the
/// upper bound when rounding pushes it past), giving
/// floor((max-min)/step)+1 points per axis. Enumeration order is fixed as
/// row-major with y as the outer ascending loop, so grid dumps and stencil
/// indexing are reproducible byte for byte.
struct Grid {
    Bounds bounds;
    double step = 0.3;
    int nx = 0;
    int ny = 0;

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

    double x_at(int i) const;
    double y_at(int j) const;
    Vec2 point(int i, int j) const { return {x_at(i), y_at(j)}; }

    /// Indices of the grid point closest to p; positions outside the
    /// bounds clamp to the border.
    std::pair<int, int> nearest_index(Vec2 p) const;
};

/// Builds a grid, rejecting inverted bounds and non-positive steps.
Grid make_grid(const Bounds& bounds, double step);
Grid make_grid(double x_min, double x_max, double y_min, double y_max, double step);

/// All grid points in row-major order (y outer ascending, x inner ascending).
std::vector<Vec2> grid_points(const Grid& g);

}  // namespace fieldscope
