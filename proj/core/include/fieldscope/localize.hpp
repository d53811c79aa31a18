#pragma once

#include <cstdint>
#include <vector>

#include "fieldscope/train.hpp"

namespace fieldscope {

struct ScalarField {
    Grid grid;
    std::vector<double> values;  // row-major
};

/// Discrete divergence dvx/dx + dvy/dy: central differences on interior
/// points, one-sided at the borders so the whole environment stays in the
/// argmax domain. Requires at least a 3x3 grid.
ScalarField divergence(const GridField& f);

/// True where the regressor can be trusted: some training input lies
/// within radius of the grid point.
struct GridMask {
    Grid grid;
    std::vector<std::uint8_t> covered;  // row-major

    bool any() const;
};

GridMask coverage_mask(const Grid& g, const Dataset& d, double radius);

enum class Nature { Attractive, Repulsive };

struct ObjectEstimate {
    Vec2 position;
    Nature nature = Nature::Attractive;
    double div_value = 0.0;
    /// Extension diagnostic, not part of the extraction rule: mean radius at
    /// which |div| along rays from the estimate falls below 10% of the peak.
    double size_estimate = 0.0;
};

/// Center-of-force extraction: the covered cell with the largest |div|
/// (ties broken by smallest row-major index), classified attractive when
/// the divergence there is negative and repulsive otherwise. Pass mask =
/// nullptr to search every cell.
ObjectEstimate locate(const ScalarField& div, const GridMask* mask = nullptr);

const char* nature_str(Nature n);

}  // namespace fieldscope
