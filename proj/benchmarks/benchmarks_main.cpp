#include <benchmark/benchmark.h>

#include "fieldscope/filter.hpp"
#include "fieldscope/localize.hpp"
#include "fieldscope/sim.hpp"
#include "fieldscope/train.hpp"

using namespace fieldscope;

namespace {

const Bounds kEnv{-20, 20, -20, 20};
const CentralFieldSpec kA1 = CentralFieldSpec::attractor_sqrt({0, 15}, 2.0, 4.0, 80.0);
const CentralFieldSpec kRep = CentralFieldSpec::repeller_exp({0, -5}, 0.8, 1000.0);

MlpModel seeded_model() {
    MlpModel m;
    m.norm = Normalizer::from_bounds(kEnv);
    Rng rng(17);
    Eigen::Matrix<double, kParamCount, 1> theta;
    for (int i = 0; i < kParamCount; ++i) theta(i) = rng.uniform(-1.0, 1.0);
    m.unpack(theta);
    return m;
}

Dataset seeded_dataset(std::size_t n) {
    Rng rng(5);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p{rng.uniform(-20, 20), rng.uniform(-20, 20)};
        d.inputs.push_back(p);
        d.targets.push_back(field_vector(kRep, p) + Vec2{rng.normal(0, 0.1), rng.normal(0, 0.1)});
    }
    return d;
}

void BM_FieldSuperpose(benchmark::State& state) {
    const FieldSet fields{kA1, kRep};
    Rng rng(1);
    Vec2 p{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(superpose(fields, p));
    }
}
BENCHMARK(BM_FieldSuperpose);

void BM_MlpForward(benchmark::State& state) {
    const MlpModel m = seeded_model();
    Vec2 p{3.0, -7.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(m.forward(p));
    }
}
BENCHMARK(BM_MlpForward);

void BM_SimulateTrajectory(benchmark::State& state) {
    const SimLimits limits;
    const NoiseParams noise{0.1, 0.1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            simulate_trajectory(0, {5, -18}, kA1, {kRep}, 1.0, noise, limits, Rng(11)));
    }
}
BENCHMARK(BM_SimulateTrajectory);

void BM_RunFilter(benchmark::State& state) {
    const SimLimits limits;
    const NoiseParams noise{0.1, 0.1};
    const Trajectory traj =
        simulate_trajectory(0, {5, -18}, kA1, {kRep}, 1.0, noise, limits, Rng(11));
    const KalmanModel model = make_kalman_model(SystemMatrices::make(1.0), {}, noise, {});
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_filter(model, traj));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(traj.points.size() - 1));
}
BENCHMARK(BM_RunFilter);

void BM_ResidualJacobian(benchmark::State& state) {
    const MlpModel m = seeded_model();
    const Dataset d = seeded_dataset(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(residual_and_jacobian(m, d));
    }
}
BENCHMARK(BM_ResidualJacobian)->Arg(1000)->Arg(4000);

void BM_LmEpochSolve(benchmark::State& state) {
    const MlpModel m = seeded_model();
    const Dataset d = seeded_dataset(4000);
    const auto rj = residual_and_jacobian(m, d);
    const Eigen::Matrix<double, kParamCount, 1> g = rj.jacobian.transpose() * rj.residual;
    Eigen::Matrix<double, kParamCount, kParamCount> JtJ = rj.jacobian.transpose() * rj.jacobian;
    for (auto _ : state) {
        Eigen::Matrix<double, kParamCount, kParamCount> A = JtJ;
        A.diagonal().array() += 1e-3;
        benchmark::DoNotOptimize(A.ldlt().solve(-g).eval());
    }
}
BENCHMARK(BM_LmEpochSolve);

void BM_EvaluateOnGrid(benchmark::State& state) {
    const MlpModel m = seeded_model();
    const Grid g = make_grid(kEnv, 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_on_grid(m, g));
    }
}
BENCHMARK(BM_EvaluateOnGrid);

void BM_DivergenceAndLocate(benchmark::State& state) {
    const Grid g = make_grid(kEnv, 0.3);
    GridField f;
    f.grid = g;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.vectors.push_back(field_vector(kRep, g.point(i, j)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(locate(divergence(f)));
    }
}
BENCHMARK(BM_DivergenceAndLocate);

}  // namespace

BENCHMARK_MAIN();
