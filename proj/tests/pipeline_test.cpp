#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fieldscope/pipeline.hpp"

using namespace fieldscope;
using doctest::Approx;

TEST_SUITE_BEGIN("pipeline");

namespace {

// Reduced scenario: full structure, smaller budgets, so the suite stays fast.
ScenarioConfig small_config() {
    ScenarioConfig cfg = default_config();
    for (auto& stage : cfg.stages) stage.trajectories = 40;
    cfg.train.max_epochs = 250;
    cfg.train.restarts = 2;
    return cfg;
}

double rms(const std::vector<AgentInnovations>& agents) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& a : agents)
        for (const auto& rec : a.records) {
            sum += rec.v_residual.dot(rec.v_residual);
            ++n;
        }
    return std::sqrt(sum / double(n));
}

}  // namespace

TEST_CASE("run_experiment produces one estimate per stage") {
    const ScenarioConfig cfg = small_config();
    const ExperimentReport report = run_experiment(cfg, 42);
    REQUIRE(report.stages.size() == 3);
    CHECK(report.seed == 42);

    for (const auto& stage : report.stages) {
        CHECK(stage.trajectories.size() == 40);
        CHECK(stage.innovations.size() == 40);
        CHECK(stage.dataset.size() > 100);
        CHECK(!stage.loss_history.empty());
        CHECK(stage.field.vectors.size() == 17956);
        CHECK(stage.mask.any());
    }
    // The first two stages are attractors with dense local data; even the
    // reduced budget localizes them decently and classifies all natures.
    CHECK(report.stages[0].metrics.nature_ok);
    CHECK(report.stages[1].metrics.nature_ok);
    CHECK(report.stages[0].metrics.pos_error < 3.0);
    CHECK(report.stages[1].metrics.pos_error < 3.0);
}

TEST_CASE("same seed reproduces the report bit for bit") {
    const ScenarioConfig cfg = small_config();
    const ExperimentReport a = run_experiment(cfg, 7);
    const ExperimentReport b = run_experiment(cfg, 7);
    REQUIRE(a.stages.size() == b.stages.size());
    for (std::size_t s = 0; s < a.stages.size(); ++s) {
        CHECK((a.stages[s].model.pack() - b.stages[s].model.pack()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.stages[s].estimate.position.x == b.stages[s].estimate.position.x);
        CHECK(a.stages[s].estimate.position.y == b.stages[s].estimate.position.y);
        CHECK(a.stages[s].estimate.div_value == b.stages[s].estimate.div_value);
        CHECK(a.stages[s].loss_history == b.stages[s].loss_history);
    }
}

TEST_CASE("hierarchy: level-0 residuals strictly dominate level-1 on the repeller stage") {
    // Analytic stand-ins isolate the model hierarchy from regressor error.
    const ScenarioConfig cfg = small_config();
    const auto a1 = cfg.stages[0].object;
    const auto a2 = cfg.stages[1].object;
    const auto rep = cfg.stages[2].object;

    ScenarioStage stage;
    stage.stage_id = 3;
    stage.new_object = rep;
    stage.n_trajectories = 40;
    stage.destinations = {0, 1};
    const FieldSet objects{a1, a2, rep};
    const Rng stage_rng = Rng(99).child(2);
    const auto trajs = run_stage(stage, objects, cfg.environment, cfg.dk, cfg.noise, cfg.sim,
                                 stage_rng, 2);

    const SystemMatrices sys = SystemMatrices::make(cfg.dk);
    const KalmanModel level0 = make_kalman_model(sys, {}, cfg.noise, cfg.filter);

    std::vector<AgentInnovations> res0, res1;
    for (const auto& t : trajs) {
        const CentralFieldSpec dest = t.agent_id % 2 == 0 ? a1 : a2;
        const KalmanModel level1 = make_kalman_model(
            sys, {[dest](Vec2 p) { return field_vector(dest, p); }}, cfg.noise, cfg.filter);
        res0.push_back({t.agent_id, run_filter(level0, t)});
        res1.push_back({t.agent_id, run_filter(level1, t)});
    }
    CHECK(rms(res0) > rms(res1));
}

TEST_CASE("compare_to_truth recomputes the metrics table") {
    ScenarioConfig cfg = small_config();
    cfg.stages.resize(1);
    const ExperimentReport report = run_experiment(cfg, 5);
    std::vector<CentralFieldSpec> truth{cfg.stages[0].object};
    const auto metrics = compare_to_truth(report, truth, cfg);
    REQUIRE(metrics.size() == 1);
    CHECK(metrics[0].pos_error == Approx(report.stages[0].metrics.pos_error));
    CHECK(metrics[0].mag_rmse == Approx(report.stages[0].metrics.mag_rmse));

    // Perfect learned field as a stand-in: zero magnitude error and the
    // estimate's own position as truth gives zero position error.
    ExperimentReport ideal = report;
    std::vector<CentralFieldSpec> self{cfg.stages[0].object};
    const Grid g = make_grid(cfg.environment, cfg.grid_step);
    GridField analytic;
    analytic.grid = g;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            analytic.vectors.push_back(field_vector(cfg.stages[0].object, g.point(i, j)));
    ideal.stages[0].field = analytic;
    ideal.stages[0].estimate.position = cfg.stages[0].object.center;
    const auto ideal_metrics = compare_to_truth(ideal, self, cfg);
    CHECK(ideal_metrics[0].pos_error == Approx(0.0));
    CHECK(ideal_metrics[0].mag_rmse == Approx(0.0).epsilon(1e-9));
    CHECK(ideal_metrics[0].angle_mae_deg == Approx(0.0).epsilon(1e-9));

    CHECK_THROWS_AS(compare_to_truth(report, {}, cfg), std::invalid_argument);
}

TEST_CASE("noise-free paired run has a strictly smaller residual noise floor") {
    // Same seed with all noise removed and a tight R: the pooled residual
    // samples become near-exact field evaluations, so every stage's final
    // training RMSE drops well below the noisy run's. (The localization
    // error itself is not asserted here: it is grid-quantized and dominated
    // by sample geometry, not sensor noise.)
    ScenarioConfig noisy = small_config();
    ScenarioConfig clean = noisy;
    clean.noise = {0.0, 0.0};
    clean.filter.has_r_override = true;
    clean.filter.r_override = 1e-8;
    const ExperimentReport a = run_experiment(noisy, 11);
    const ExperimentReport b = run_experiment(clean, 11);
    REQUIRE(a.stages.size() == b.stages.size());
    for (std::size_t s = 0; s < a.stages.size(); ++s) {
        CHECK(b.stages[s].loss_history.back() < a.stages[s].loss_history.back());
        CHECK(b.stages[s].loss_history.back() < 0.1);
    }
}

TEST_CASE("stage failures carry the stage id") {
    ScenarioConfig cfg = small_config();
    cfg.stages[1].destinations = {5};  // out of range at runtime
    try {
        run_experiment(cfg, 1);
        FAIL_CHECK("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage_id() == 2);
        CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
    }
}

TEST_CASE("artifacts are written under the output directory") {
    namespace fs = std::filesystem;
    ScenarioConfig cfg = small_config();
    cfg.stages.resize(1);
    cfg.stages[0].trajectories = 10;
    cfg.train.max_epochs = 60;
    ExperimentReport report = run_experiment(cfg, 3);
    const fs::path dir = fs::temp_directory_path() / "fieldscope_pipeline_test";
    fs::remove_all(dir);
    const std::string report_path = write_experiment_artifacts(report, cfg, dir.string());
    CHECK(fs::exists(report_path));
    for (const char* name :
         {"stage1_trajectories.csv", "stage1_innovations.csv", "stage1_field.csv",
          "stage1_loss.csv", "stage1_model.txt", "objects.csv", "report.csv", "report.txt"})
        CHECK(fs::exists(dir / name));
    CHECK(report.stages[0].model_path == (dir / "stage1_model.txt").string());

    // objects.csv carries the truth columns in simulation mode
    std::ifstream in(dir / "objects.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "object_id,x_est,y_est,nature,div_value,x_true,y_true");
    fs::remove_all(dir);
}

TEST_SUITE_END();
