#include "fieldscope/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fieldscope {

namespace {

int axis_points(double lo, double hi, double step) {
    // Small slack so counts match the exact-arithmetic value when
    // (hi-lo)/step is an integer that floating point lands just under.
    return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

}  // namespace

double Grid::x_at(int i) const { return std::min(bounds.x_min + i * step, bounds.x_max); }

double Grid::y_at(int j) const { return std::min(bounds.y_min + j * step, bounds.y_max); }

std::pair<int, int> Grid::nearest_index(Vec2 p) const {
    const auto clamp_axis = [](double v, double lo, double step_, int n) {
        const int i = static_cast<int>(std::llround((v - lo) / step_));
        return std::clamp(i, 0, n - 1);
    };
    return {clamp_axis(p.x, bounds.x_min, step, nx), clamp_axis(p.y, bounds.y_min, step, ny)};
}

Grid make_grid(const Bounds& bounds, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
    if (!(bounds.x_min < bounds.x_max) || !(bounds.y_min < bounds.y_max))
        throw std::invalid_argument("grid bounds must satisfy min < max on both axes");
    Grid g;
    g.bounds = bounds;
    g.step = step;
    g.nx = axis_points(bounds.x_min, bounds.x_max, step);
    g.ny = axis_points(bounds.y_min, bounds.y_max, step);
    return g;
}

Grid make_grid(double x_min, double x_max, double y_min, double y_max, double step) {
    return make_grid(Bounds{x_min, x_max, y_min, y_max}, step);
}

std::vector<Vec2> grid_points(const Grid& g) {
    std::vector<Vec2> pts;
    pts.reserve(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) pts.push_back(g.point(i, j));
    return pts;
}

}  // namespace fieldscope
