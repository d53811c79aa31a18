#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fieldscope/filter.hpp"
#include "fieldscope/mlp.hpp"
#include "fieldscope/rng.hpp"

namespace fieldscope {

/// Regression data: measured positions paired with residual-velocity
/// targets.
struct Dataset {
    std::vector<Vec2> inputs;
    std::vector<Vec2> targets;

    std::size_t size() const { return inputs.size(); }
};

/// Pools innovation records into a training set. The first record of each
/// agent is dropped by default: it reflects the filter's arbitrary
/// zero-velocity initialization rather than a field sample.
Dataset dataset_from_innovations(const std::vector<AgentInnovations>& per_agent,
                                 bool drop_first = true);

enum class WeightInit { Uniform, NguyenWidrow };

/// Levenberg-Marquardt schedule. lambda is multiplied by lambda_up after a
/// rejected step and by lambda_down after an accepted one; training stops
/// at max_epochs, when the gradient infinity-norm falls below grad_tol, or
/// when lambda exceeds lambda_max.
///
/// val_fraction > 0 holds out a seeded random slice of the samples. The
/// optimizer minimizes the training SSE; the held-out error stops a run
/// once it has not improved for val_patience accepted steps and scores the
/// run when restarts > 1 rerun the fit from fresh seeded initializations.
/// Restart selection by held-out score is what rescues the occasional run
/// that stalls in a poor local minimum.
struct TrainConfig {
    double lambda0 = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    int max_epochs = 1000;
    double grad_tol = 1e-7;
    double lambda_max = 1e10;
    int restarts = 3;
    double val_fraction = 0.0;
    int val_patience = 50;
    std::uint64_t seed = 0;
    WeightInit init = WeightInit::NguyenWidrow;
};

struct ResidualJacobian {
    Eigen::VectorXd residual;  // 2n stacked (forward(p_i) - target_i)
    Eigen::MatrixXd jacobian;  // 2n x 52, exact backpropagated derivatives
};

ResidualJacobian residual_and_jacobian(const MlpModel& m, const Dataset& d);

struct TrainResult {
    MlpModel model;
    /// Training-set RMSE per component after the initial point and after
    /// every accepted step; non-increasing by construction.
    std::vector<double> loss_history;
    /// Held-out RMSE of the returned weights; matches the training RMSE
    /// when no validation split was used.
    double score = 0.0;
    std::string warning;
};

/// Fits the 2->10->2 regressor to the dataset by damped Gauss-Newton
/// steps on the normal equations, (J'J + lambda I) delta = -J'r. The rng
/// supplies weight initialization only, so equal seeds with equal data
/// reproduce identical weights.
TrainResult lm_train(const Dataset& d, const TrainConfig& cfg, const Normalizer& norm, Rng& rng);

/// Model evaluated at every grid point, row-major.
struct GridField {
    Grid grid;
    std::vector<Vec2> vectors;
};

GridField evaluate_on_grid(const MlpModel& m, const Grid& g);

}  // namespace fieldscope
