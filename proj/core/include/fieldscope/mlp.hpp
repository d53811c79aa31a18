#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "fieldscope/grid.hpp"
#include "fieldscope/vec2.hpp"

namespace fieldscope {

inline constexpr int kHiddenUnits = 10;
inline constexpr int kParamCount = 52;  // 10*2 + 10 + 2*10 + 2

/// Per-axis affine map taking the environment rectangle to [-1, 1], so the
/// tanh layer sees well-conditioned inputs and models trained on different
/// stages share one coordinate frame.
struct Normalizer {
    double x_lo = -20.0, x_hi = 20.0;
    double y_lo = -20.0, y_hi = 20.0;

    static Normalizer from_bounds(const Bounds& b);

    Vec2 normalize(Vec2 p) const;
    Vec2 denormalize(Vec2 u) const;
};

/// 2 -> 10 -> 2 regressor with tanh hidden units and linear outputs,
/// approximating one object's velocity field G(x, y).
struct MlpModel {
    Eigen::Matrix<double, kHiddenUnits, 2> W1 = Eigen::Matrix<double, kHiddenUnits, 2>::Zero();
    Eigen::Matrix<double, kHiddenUnits, 1> b1 = Eigen::Matrix<double, kHiddenUnits, 1>::Zero();
    Eigen::Matrix<double, 2, kHiddenUnits> W2 = Eigen::Matrix<double, 2, kHiddenUnits>::Zero();
    Eigen::Vector2d b2 = Eigen::Vector2d::Zero();
    Normalizer norm;
    std::uint64_t seed = 0;  // weight-init seed, recorded in the model file

    /// W2 * tanh(W1 * normalize(p) + b1) + b2.
    Vec2 forward(Vec2 p) const;

    /// Hidden activations for a normalized input; shared by forward and the
    /// Jacobian assembly.
    Eigen::Matrix<double, kHiddenUnits, 1> hidden(Vec2 u) const;

    /// Flat parameter vector in the fixed order W1 (row-major), b1,
    /// W2 (row-major), b2.
    Eigen::Matrix<double, kParamCount, 1> pack() const;
    void unpack(const Eigen::Matrix<double, kParamCount, 1>& theta);
};

/// Plain-text model file: an architecture/seed header then one line per
/// parameter group (W1 b1 W2 b2 norm), full precision.
void save_model(const MlpModel& m, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace fieldscope
