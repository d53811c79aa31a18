#pragma once

#include <Eigen/Dense>

#include "fieldscope/vec2.hpp"

namespace fieldscope {

/// Agent kinematic state: position plus the velocity the environment
/// induces at that position.
struct StateVector {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;

    Vec2 position() const { return {x, y}; }
    Vec2 velocity() const { return {vx, vy}; }
};

/// Position fix from the locating sensor at discrete time index k.
struct Measurement {
    double x = 0.0;
    double y = 0.0;
    int k = 0;

    Vec2 position() const { return {x, y}; }
};

/// Fixed matrices of the discrete motion and observation model
///
///   X_{k+1} = F X_k + B V_k + n_k        Z_k = H X_k + nu_k
///
/// F carries position through unchanged and zeroes the velocity rows; B
/// injects a commanded velocity V into the position rows (scaled by dk)
/// and the velocity rows; H observes position. These shapes give the
/// identity H*B = dk*I2, which is what lets a position innovation be read
/// back as a velocity via division by dk.
struct SystemMatrices {
    Eigen::Matrix4d F;
    Eigen::Matrix<double, 4, 2> B;
    Eigen::Matrix<double, 2, 4> H;
    double dk = 1.0;

    static SystemMatrices make(double dk = 1.0);
};

}  // namespace fieldscope
