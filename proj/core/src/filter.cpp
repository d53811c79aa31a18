#include "fieldscope/filter.hpp"

#include <cmath>
#include <stdexcept>

namespace fieldscope {

KalmanModel make_kalman_model(const SystemMatrices& sys, std::vector<FieldFn> learned_fields,
                              const NoiseParams& noise, const FilterConfig& cfg) {
    KalmanModel m;
    m.sys = sys;
    m.learned_fields = std::move(learned_fields);
    const double qp = noise.sigma_process * noise.sigma_process +
                      cfg.q_mismatch_std * cfg.q_mismatch_std * sys.dk * sys.dk;
    m.Q = Eigen::Vector4d(qp, qp, cfg.q_velocity, cfg.q_velocity).asDiagonal();
    const double r = cfg.has_r_override ? cfg.r_override : noise.sigma_meas * noise.sigma_meas;
    m.R = r * Eigen::Matrix2d::Identity();
    m.P0 = Eigen::Vector4d(m.R(0, 0), m.R(1, 1), 1.0, 1.0).asDiagonal();
    m.source = cfg.source;
    m.control_point = cfg.control_point;
    return m;
}

Vec2 control_input(const KalmanModel& model, Vec2 p) {
    Vec2 u;
    for (const auto& field : model.learned_fields) u += field(p);
    return u;
}

FilterState predict(const KalmanModel& model, const FilterState& state, Vec2 control_pos) {
    const Vec2 u = control_input(model, control_pos);
    FilterState pred;
    pred.x = model.sys.F * state.x + model.sys.B * Eigen::Vector2d(u.x, u.y);
    pred.P = model.sys.F * state.P * model.sys.F.transpose() + model.Q;
    return pred;
}

UpdateResult update(const KalmanModel& model, const FilterState& predicted,
                    const Measurement& z) {
    const Eigen::Vector2d zv(z.x, z.y);
    const Eigen::Vector2d innovation = zv - model.sys.H * predicted.x;
    const Eigen::Matrix2d S =
        model.sys.H * predicted.P * model.sys.H.transpose() + model.R;

    // 2x2 solve by adjugate; reject numerically singular innovation covariance.
    const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    const double scale = S.cwiseAbs().maxCoeff();
    if (!(std::abs(det) > 1e-300) || !(std::abs(det) > 1e-14 * scale * scale))
        throw std::runtime_error("singular innovation covariance: degenerate R/P configuration");
    Eigen::Matrix2d S_inv;
    S_inv << S(1, 1), -S(0, 1), -S(1, 0), S(0, 0);
    S_inv /= det;

    const Eigen::Matrix<double, 4, 2> K = predicted.P * model.sys.H.transpose() * S_inv;

    UpdateResult res;
    res.post.x = predicted.x + K * innovation;
    const Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * model.sys.H;
    res.post.P = IKH * predicted.P;
    res.post.P = 0.5 * (res.post.P + res.post.P.transpose()).eval();
    res.y_tilde = {innovation(0), innovation(1)};
    return res;
}

std::vector<InnovationRecord> run_filter(const KalmanModel& model, const Trajectory& traj) {
    if (traj.points.empty()) throw std::invalid_argument("trajectory has no measurements");

    std::vector<InnovationRecord> records;
    if (traj.points.size() < 2) return records;
    records.reserve(traj.points.size() - 1);

    const Measurement& z0 = traj.points.front().meas;
    FilterState state;
    state.x << z0.x, z0.y, 0.0, 0.0;
    state.P = model.P0;

    const double dk = model.sys.dk;
    for (std::size_t t = 1; t < traj.points.size(); ++t) {
        const Measurement& z_from = traj.points[t - 1].meas;
        const Measurement& z_new = traj.points[t].meas;

        Vec2 y_tilde;
        if (model.source == InnovationSource::OpenLoop) {
            // Prediction re-anchored at the previous measurement each step.
            const Vec2 u = control_input(model, z_from.position());
            const Vec2 pred_pos = z_from.position() + dk * u;
            y_tilde = z_new.position() - pred_pos;
        } else {
            const Vec2 control_pos = model.control_point == ControlPoint::Measurement
                                         ? z_from.position()
                                         : Vec2{state.x(0), state.x(1)};
            const FilterState pred = predict(model, state, control_pos);
            UpdateResult res = update(model, pred, z_new);
            state = res.post;
            y_tilde = res.y_tilde;
        }

        InnovationRecord rec;
        rec.z = z_from;
        rec.y_tilde = y_tilde;
        rec.v_residual = {y_tilde.x / dk, y_tilde.y / dk};
        records.push_back(rec);
    }
    return records;
}

}  // namespace fieldscope
