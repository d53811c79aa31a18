#include "fieldscope/localize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fieldscope {

ScalarField divergence(const GridField& f) {
    const Grid& g = f.grid;
    if (g.nx < 3 || g.ny < 3) throw std::invalid_argument("divergence needs at least a 3x3 grid");
    if (f.vectors.size() != g.size())
        throw std::invalid_argument("grid field size mismatch");

    ScalarField div;
    div.grid = g;
    div.values.resize(g.size());

    const double h = g.step;
    const auto vx = [&](int i, int j) { return f.vectors[g.index(i, j)].x; };
    const auto vy = [&](int i, int j) { return f.vectors[g.index(i, j)].y; };

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double dvx_dx;
            if (i == 0)
                dvx_dx = (vx(1, j) - vx(0, j)) / h;
            else if (i == g.nx - 1)
                dvx_dx = (vx(i, j) - vx(i - 1, j)) / h;
            else
                dvx_dx = (vx(i + 1, j) - vx(i - 1, j)) / (2.0 * h);

            double dvy_dy;
            if (j == 0)
                dvy_dy = (vy(i, 1) - vy(i, 0)) / h;
            else if (j == g.ny - 1)
                dvy_dy = (vy(i, j) - vy(i, j - 1)) / h;
            else
                dvy_dy = (vy(i, j + 1) - vy(i, j - 1)) / (2.0 * h);

            div.values[g.index(i, j)] = dvx_dx + dvy_dy;
        }
    }
    return div;
}

bool GridMask::any() const {
    return std::any_of(covered.begin(), covered.end(), [](std::uint8_t c) { return c != 0; });
}

GridMask coverage_mask(const Grid& g, const Dataset& d, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("coverage radius must be > 0");
    GridMask mask;
    mask.grid = g;
    mask.covered.assign(g.size(), 0);

    const int iw = static_cast<int>(std::ceil(radius / g.step));
    const double r2 = radius * radius;
    for (const Vec2& s : d.inputs) {
        const auto [ci, cj] = g.nearest_index(s);
        const int i0 = std::max(0, ci - iw), i1 = std::min(g.nx - 1, ci + iw);
        const int j0 = std::max(0, cj - iw), j1 = std::min(g.ny - 1, cj + iw);
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                const Vec2 p = g.point(i, j);
                const double dx = p.x - s.x, dy = p.y - s.y;
                if (dx * dx + dy * dy <= r2) mask.covered[g.index(i, j)] = 1;
            }
        }
    }
    return mask;
}

namespace {

// Bilinear sample of a scalar field, clamped to the grid.
double sample(const ScalarField& f, Vec2 p) {
    const Grid& g = f.grid;
    const double fx = std::clamp((p.x - g.bounds.x_min) / g.step, 0.0, double(g.nx - 1));
    const double fy = std::clamp((p.y - g.bounds.y_min) / g.step, 0.0, double(g.ny - 1));
    const int i0 = std::min(static_cast<int>(fx), g.nx - 2);
    const int j0 = std::min(static_cast<int>(fy), g.ny - 2);
    const double tx = fx - i0, ty = fy - j0;
    const double v00 = f.values[g.index(i0, j0)], v10 = f.values[g.index(i0 + 1, j0)];
    const double v01 = f.values[g.index(i0, j0 + 1)], v11 = f.values[g.index(i0 + 1, j0 + 1)];
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
}

double size_from_rays(const ScalarField& div, Vec2 center, double peak_abs) {
    if (!(peak_abs > 0.0)) return 0.0;
    const Grid& g = div.grid;
    const double max_r = std::max(g.bounds.x_max - g.bounds.x_min, g.bounds.y_max - g.bounds.y_min);
    constexpr int kRays = 16;
    double sum = 0.0;
    int crossed = 0;
    for (int a = 0; a < kRays; ++a) {
        const double ang = 2.0 * std::numbers::pi * a / kRays;
        const Vec2 dir{std::cos(ang), std::sin(ang)};
        for (double r = g.step; r <= max_r; r += g.step) {
            const Vec2 p = center + r * dir;
            if (p.x < g.bounds.x_min || p.x > g.bounds.x_max || p.y < g.bounds.y_min ||
                p.y > g.bounds.y_max)
                break;
            if (std::abs(sample(div, p)) < 0.1 * peak_abs) {
                sum += r;
                ++crossed;
                break;
            }
        }
    }
    return crossed > 0 ? sum / crossed : 0.0;
}

}  // namespace

ObjectEstimate locate(const ScalarField& div, const GridMask* mask) {
    const Grid& g = div.grid;
    if (mask && mask->covered.size() != g.size())
        throw std::invalid_argument("mask size mismatch");

    std::size_t best = g.size();
    double best_abs = -1.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        if (mask && !mask->covered[idx]) continue;
        const double a = std::abs(div.values[idx]);
        if (a > best_abs) {  // strict: ties keep the smallest row-major index
            best_abs = a;
            best = idx;
        }
    }
    if (best == g.size())
        throw std::runtime_error("no covered grid cell to search; coverage mask is empty");

    const int j = static_cast<int>(best) / g.nx;
    const int i = static_cast<int>(best) % g.nx;

    ObjectEstimate est;
    est.position = g.point(i, j);
    est.div_value = div.values[best];
    est.nature = est.div_value < 0.0 ? Nature::Attractive : Nature::Repulsive;
    est.size_estimate = size_from_rays(div, est.position, best_abs);
    return est;
}

const char* nature_str(Nature n) { return n == Nature::Attractive ? "attractive" : "repulsive"; }

}  // namespace fieldscope
