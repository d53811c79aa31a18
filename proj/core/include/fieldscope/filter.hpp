#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "fieldscope/sim.hpp"
#include "fieldscope/state.hpp"
#include "fieldscope/vec2.hpp"

namespace fieldscope {

/// Position -> velocity evaluator for one previously learned field.
using FieldFn = std::function<Vec2(Vec2)>;

/// Whether innovations come from the gain-corrected Kalman recursion or
/// from pure open-loop prediction anchored at the previous measurement.
enum class InnovationSource { Filtered, OpenLoop };

/// Where the control input is evaluated: at the latest measurement (the
/// default, matching the stationary-field assumption) or at the posterior
/// position estimate.
enum class ControlPoint { Measurement, Posterior };

/// A level-N dynamic model: the non-interactive dynamics plus the summed
/// control input of N already-learned velocity fields. Its innovation then
/// exposes only whatever those N fields do not explain -- the newest
/// object's contribution.
struct KalmanModel {
    SystemMatrices sys;
    std::vector<FieldFn> learned_fields;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Eigen::Matrix2d R = Eigen::Matrix2d::Zero();
    Eigen::Matrix4d P0 = Eigen::Matrix4d::Zero();
    InnovationSource source = InnovationSource::Filtered;
    ControlPoint control_point = ControlPoint::Measurement;

    int level() const { return static_cast<int>(learned_fields.size()); }
};

/// Filter noise configuration. The position process noise is
/// sigma_process^2 + (q_mismatch_std * dk)^2: the second term budgets for
/// the not-yet-learned velocity fields that the dynamic model cannot
/// explain, and keeps the filter tracking measurements tightly enough that
/// innovations read out those fields without lag bias. Set q_mismatch_std
/// to 0 to model only the process jitter.
struct FilterConfig {
    double q_velocity = 1e-2;
    double q_mismatch_std = 1.0;
    bool has_r_override = false;
    double r_override = 0.0;
    InnovationSource source = InnovationSource::Filtered;
    ControlPoint control_point = ControlPoint::Measurement;
};

/// Assembles a model with Q = diag(qp, qp, qv, qv), R = sigma_meas^2 * I
/// (unless overridden) and P0 = diag(R11, R22, 1, 1).
KalmanModel make_kalman_model(const SystemMatrices& sys, std::vector<FieldFn> learned_fields,
                              const NoiseParams& noise, const FilterConfig& cfg = {});

/// One innovation: the residual of the model prediction against the
/// measurement taken one step later, paired with the measured position the
/// step departed from. v_residual = y_tilde / dk is a sample of the
/// unmodeled velocity field at that position.
struct InnovationRecord {
    Measurement z;
    Vec2 y_tilde;
    Vec2 v_residual;
};

struct FilterState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
};

/// Sum of the learned field evaluations at p; zero vector at level 0.
Vec2 control_input(const KalmanModel& model, Vec2 p);

/// Time update: x- = F x + B u(control_pos), P- = F P F' + Q.
FilterState predict(const KalmanModel& model, const FilterState& state, Vec2 control_pos);

struct UpdateResult {
    FilterState post;
    Vec2 y_tilde;
};

/// Measurement update with the standard gain. Throws when the innovation
/// covariance H P- H' + R is numerically singular.
UpdateResult update(const KalmanModel& model, const FilterState& predicted,
                    const Measurement& z);

/// Runs the filter over a trajectory's measurements: state initialized at
/// the first measurement with zero velocity and P0, then predict/update per
/// step. Returns one record per transition, carrying the departed-from
/// measurement.
std::vector<InnovationRecord> run_filter(const KalmanModel& model, const Trajectory& traj);

/// Per-agent innovation bundle, the unit the innovation CSV is written in.
struct AgentInnovations {
    int agent_id = 0;
    std::vector<InnovationRecord> records;
};

}  // namespace fieldscope
