#include "fieldscope/train.hpp"

#include <cmath>
#include <stdexcept>

namespace fieldscope {

Dataset dataset_from_innovations(const std::vector<AgentInnovations>& per_agent,
                                 bool drop_first) {
    Dataset d;
    for (const auto& agent : per_agent) {
        const std::size_t begin = drop_first && !agent.records.empty() ? 1 : 0;
        for (std::size_t i = begin; i < agent.records.size(); ++i) {
            const auto& rec = agent.records[i];
            d.inputs.push_back(rec.z.position());
            d.targets.push_back(rec.v_residual);
        }
    }
    return d;
}

ResidualJacobian residual_and_jacobian(const MlpModel& m, const Dataset& d) {
    if (d.size() == 0) throw std::invalid_argument("empty dataset");
    const auto n = static_cast<Eigen::Index>(d.size());

    ResidualJacobian rj;
    rj.residual.resize(2 * n);
    rj.jacobian.setZero(2 * n, kParamCount);

    for (Eigen::Index s = 0; s < n; ++s) {
        const Vec2 u = m.norm.normalize(d.inputs[static_cast<std::size_t>(s)]);
        const auto h = m.hidden(u);
        const Eigen::Vector2d out = m.W2 * h + m.b2;
        const Vec2 target = d.targets[static_cast<std::size_t>(s)];
        rj.residual(2 * s) = out(0) - target.x;
        rj.residual(2 * s + 1) = out(1) - target.y;

        // Parameter layout: W1 row-major (20), b1 (10), W2 row-major (20), b2 (2).
        for (int c = 0; c < 2; ++c) {
            auto row = rj.jacobian.row(2 * s + c);
            for (int j = 0; j < kHiddenUnits; ++j) {
                const double dtanh = 1.0 - h(j) * h(j);
                const double back = m.W2(c, j) * dtanh;
                row(2 * j) = back * u.x;        // dW1(j,0)
                row(2 * j + 1) = back * u.y;    // dW1(j,1)
                row(20 + j) = back;             // db1(j)
                row(30 + c * kHiddenUnits + j) = h(j);  // dW2(c,j)
            }
            row(50 + c) = 1.0;  // db2(c)
        }
    }
    return rj;
}

namespace {

void init_weights(MlpModel& m, const TrainConfig& cfg, Rng& rng) {
    if (cfg.init == WeightInit::Uniform) {
        Eigen::Matrix<double, kParamCount, 1> theta;
        for (int i = 0; i < kParamCount; ++i) theta(i) = rng.uniform(-0.5, 0.5);
        m.unpack(theta);
        return;
    }
    // Nguyen-Widrow: hidden weight rows get a fixed magnitude and spread
    // biases so the active tanh regions tile the normalized input square.
    const double beta = 0.7 * std::pow(static_cast<double>(kHiddenUnits), 1.0 / 2.0);
    for (int j = 0; j < kHiddenUnits; ++j) {
        Eigen::Vector2d w(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const double len = w.norm();
        w = len > 0.0 ? (beta / len) * w : Eigen::Vector2d(beta, 0.0);
        m.W1(j, 0) = w(0);
        m.W1(j, 1) = w(1);
        m.b1(j) = rng.uniform(-beta, beta);
    }
    for (int c = 0; c < 2; ++c) {
        for (int j = 0; j < kHiddenUnits; ++j) m.W2(c, j) = rng.uniform(-0.5, 0.5);
        m.b2(c) = rng.uniform(-0.5, 0.5);
    }
}

double sse_at(const MlpModel& m, const Dataset& d) {
    double sse = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Vec2 e = m.forward(d.inputs[i]) - d.targets[i];
        sse += e.x * e.x + e.y * e.y;
    }
    return sse;
}

}  // namespace

namespace {

TrainResult lm_train_once(const Dataset& d, const TrainConfig& cfg, const Normalizer& norm,
                          Rng& rng) {
    TrainResult result;
    if (2 * d.size() < static_cast<std::size_t>(kParamCount))
        result.warning = "dataset smaller than parameter count; fit is underdetermined";

    MlpModel& m = result.model;
    m.norm = norm;
    m.seed = rng.seed();
    init_weights(m, cfg, rng);

    // Seeded per-sample split; the draw happens before training so the
    // partition is independent of everything but the rng stream.
    Dataset train, val;
    if (cfg.val_fraction > 0.0) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            Dataset& dst = rng.uniform01() < cfg.val_fraction ? val : train;
            dst.inputs.push_back(d.inputs[i]);
            dst.targets.push_back(d.targets[i]);
        }
    }
    const bool use_val = !val.inputs.empty() && !train.inputs.empty();
    const Dataset& fit = use_val ? train : d;

    const double denom = static_cast<double>(2 * fit.size());
    const auto rmse_of = [&](double sse) { return std::sqrt(sse / denom); };

    double sse = sse_at(m, fit);
    result.loss_history.push_back(rmse_of(sse));

    double val_best = use_val ? sse_at(m, val) : sse;
    int since_best = 0;

    double lambda = cfg.lambda0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const ResidualJacobian rj = residual_and_jacobian(m, fit);
        const Eigen::Matrix<double, kParamCount, 1> g =
            rj.jacobian.transpose() * rj.residual;
        if (g.cwiseAbs().maxCoeff() < cfg.grad_tol) break;
        const Eigen::Matrix<double, kParamCount, kParamCount> JtJ =
            rj.jacobian.transpose() * rj.jacobian;

        const Eigen::Matrix<double, kParamCount, 1> theta = m.pack();
        bool accepted = false;
        while (lambda <= cfg.lambda_max) {
            Eigen::Matrix<double, kParamCount, kParamCount> A = JtJ;
            A.diagonal().array() += lambda;
            const Eigen::LDLT<Eigen::Matrix<double, kParamCount, kParamCount>> ldlt(A);
            const Eigen::Matrix<double, kParamCount, 1> delta = ldlt.solve(-g);
            if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
                lambda *= cfg.lambda_up;
                if (lambda > cfg.lambda_max)
                    throw std::runtime_error(
                        "LM normal matrix remained singular up to lambda_max");
                continue;
            }
            MlpModel trial = m;
            trial.unpack(theta + delta);
            const double trial_sse = sse_at(trial, fit);
            if (std::isfinite(trial_sse) && trial_sse < sse) {
                m = trial;
                sse = trial_sse;
                lambda = std::max(lambda * cfg.lambda_down, 1e-15);
                accepted = true;
                result.loss_history.push_back(rmse_of(sse));
                break;
            }
            lambda *= cfg.lambda_up;
        }
        if (!accepted) break;  // lambda exhausted without improvement

        if (use_val) {
            const double val_sse = sse_at(m, val);
            if (val_sse < val_best) {
                val_best = val_sse;
                since_best = 0;
            } else if (++since_best >= cfg.val_patience) {
                break;
            }
        }
    }

    // The converged weights are returned as-is; the held-out split guards
    // the stopping point and scores the run for restart selection.
    result.score = use_val ? std::sqrt(sse_at(m, val) / static_cast<double>(2 * val.size()))
                           : result.loss_history.back();
    return result;
}

}  // namespace

TrainResult lm_train(const Dataset& d, const TrainConfig& cfg, const Normalizer& norm,
                     Rng& rng) {
    if (d.size() == 0) throw std::invalid_argument("empty dataset");
    if (d.inputs.size() != d.targets.size())
        throw std::invalid_argument("dataset inputs/targets length mismatch");
    if (!(cfg.lambda0 > 0.0) || !(cfg.lambda_up > 1.0) || !(cfg.lambda_down <= 1.0) ||
        !(cfg.lambda_down > 0.0))
        throw std::invalid_argument("invalid LM damping schedule");
    if (cfg.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (!(cfg.val_fraction >= 0.0 && cfg.val_fraction < 1.0))
        throw std::invalid_argument("val_fraction must be in [0, 1)");

    TrainResult best;
    for (int r = 0; r < cfg.restarts; ++r) {
        Rng attempt_rng = rng.child(static_cast<std::uint64_t>(r));
        TrainResult attempt = lm_train_once(d, cfg, norm, attempt_rng);
        if (r == 0 || attempt.score < best.score) best = std::move(attempt);
    }
    return best;
}

GridField evaluate_on_grid(const MlpModel& m, const Grid& g) {
    GridField field;
    field.grid = g;
    field.vectors.reserve(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) field.vectors.push_back(m.forward(g.point(i, j)));
    return field;
}

}  // namespace fieldscope
