#include "fieldscope/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fieldscope/threads.hpp"

namespace fieldscope {

StageError::StageError(int stage_id, const std::string& why)
    : std::runtime_error("stage " + std::to_string(stage_id) + ": " + why), stage_id_(stage_id) {}

namespace {

FieldFn model_field(const MlpModel& m) {
    return [m](Vec2 p) { return m.forward(p); };
}

StageMetrics stage_metrics(const StageResult& stage, const Grid& grid, bool use_mask) {
    StageMetrics metrics;
    metrics.pos_error = distance(stage.estimate.position, stage.truth.center);
    const bool truth_attractive = stage.truth.is_attractor();
    metrics.nature_ok = (stage.estimate.nature == Nature::Attractive) == truth_attractive;

    double mag_sq_sum = 0.0, ang_abs_sum = 0.0, ang_sq_sum = 0.0;
    std::size_t cells = 0, ang_cells = 0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t idx = grid.index(i, j);
            if (use_mask && !stage.mask.covered[idx]) continue;
            const Vec2 p = grid.point(i, j);
            const Vec2 learned = stage.field.vectors[idx];
            const Vec2 truth_v = field_vector(stage.truth, p);
            const double dm = learned.norm() - truth_v.norm();
            mag_sq_sum += dm * dm;
            ++cells;
            if (truth_v.norm() > 1e-3 && learned.norm() > 1e-12) {
                const double a_l = std::atan2(learned.y, learned.x);
                const double a_t = std::atan2(truth_v.y, truth_v.x);
                double diff = a_l - a_t;
                while (diff > std::numbers::pi) diff -= 2.0 * std::numbers::pi;
                while (diff < -std::numbers::pi) diff += 2.0 * std::numbers::pi;
                ang_abs_sum += std::abs(diff);
                const double dabs = std::abs(a_l) - std::abs(a_t);
                ang_sq_sum += dabs * dabs;
                ++ang_cells;
            }
        }
    }
    const double rad2deg = 180.0 / std::numbers::pi;
    metrics.mag_rmse = cells ? std::sqrt(mag_sq_sum / cells) : 0.0;
    metrics.angle_mae_deg = ang_cells ? rad2deg * ang_abs_sum / ang_cells : 0.0;
    metrics.angle_abs_rmse_deg = ang_cells ? rad2deg * std::sqrt(ang_sq_sum / ang_cells) : 0.0;
    return metrics;
}

}  // namespace

ExperimentReport run_experiment(const ScenarioConfig& cfg, std::uint64_t seed) {
    ExperimentReport report;
    report.seed = seed;

    const Grid grid = make_grid(cfg.environment, cfg.grid_step);
    const SystemMatrices sys = SystemMatrices::make(cfg.dk);
    const Rng root(seed);
    const int threads = thread_count();

    FieldSet objects;                   // accumulated physical specs
    std::vector<MlpModel> learned;      // learned model per accumulated object

    for (std::size_t s = 0; s < cfg.stages.size(); ++s) {
        const int stage_id = static_cast<int>(s) + 1;
        const StageConfig& stage_cfg = cfg.stages[s];
        try {
            StageResult stage;
            stage.stage_id = stage_id;
            stage.truth = stage_cfg.object;
            objects.push_back(stage_cfg.object);

            ScenarioStage sim_stage;
            sim_stage.stage_id = stage_id;
            sim_stage.new_object = stage_cfg.object;
            sim_stage.n_trajectories = stage_cfg.trajectories;
            sim_stage.destinations = stage_cfg.destinations;

            const Rng stage_rng = root.child(s);
            stage.trajectories = run_stage(sim_stage, objects, cfg.environment, cfg.dk, cfg.noise,
                                           cfg.sim, stage_rng, threads);

            // Filter each trajectory with the model for what it already
            // knows: the learned fields of every object in the agent's
            // driving set except the stage's new object.
            stage.innovations.resize(stage.trajectories.size());
            parallel_for(stage.trajectories.size(), threads, [&](std::size_t t) {
                const Trajectory& traj = stage.trajectories[t];
                const int dest_idx =
                    sim_stage.destinations[t % sim_stage.destinations.size()];

                std::vector<FieldFn> known;
                for (std::size_t o = 0; o < learned.size(); ++o) {
                    const bool drives = static_cast<int>(o) == dest_idx ||
                                        !objects[o].is_attractor();
                    if (drives) known.push_back(model_field(learned[o]));
                }
                const KalmanModel model =
                    make_kalman_model(sys, std::move(known), cfg.noise, cfg.filter);
                stage.innovations[t] = {traj.agent_id, run_filter(model, traj)};
            });

            stage.dataset = dataset_from_innovations(stage.innovations);
            if (stage.dataset.size() == 0) throw std::runtime_error("no training samples");

            TrainConfig train_cfg = cfg.train;
            Rng train_rng = root.child(1000 + s);
            TrainResult trained =
                lm_train(stage.dataset, train_cfg, Normalizer::from_bounds(cfg.environment),
                         train_rng);
            stage.model = trained.model;
            stage.loss_history = std::move(trained.loss_history);
            stage.train_warning = std::move(trained.warning);

            stage.field = evaluate_on_grid(stage.model, grid);
            stage.mask = coverage_mask(grid, stage.dataset, cfg.localize.mask_radius);
            const ScalarField div = divergence(stage.field);
            stage.estimate = locate(div, cfg.localize.use_mask ? &stage.mask : nullptr);
            stage.metrics = stage_metrics(stage, grid, cfg.localize.use_mask);

            learned.push_back(stage.model);
            report.stages.push_back(std::move(stage));
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(stage_id, e.what());
        }
    }
    return report;
}

std::vector<StageMetrics> compare_to_truth(const ExperimentReport& report,
                                           const std::vector<CentralFieldSpec>& truth_specs,
                                           const ScenarioConfig& cfg) {
    if (truth_specs.size() != report.stages.size())
        throw std::invalid_argument("one truth spec per stage required");
    const Grid grid = make_grid(cfg.environment, cfg.grid_step);
    std::vector<StageMetrics> out;
    out.reserve(report.stages.size());
    for (std::size_t s = 0; s < report.stages.size(); ++s) {
        StageResult tmp = report.stages[s];
        tmp.truth = truth_specs[s];
        out.push_back(stage_metrics(tmp, grid, cfg.localize.use_mask));
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    fn(out);
}

std::string kind_str(FieldKind k) {
    switch (k) {
        case FieldKind::AttractorSqrt: return "attractor-sqrt";
        case FieldKind::AttractorGauss: return "attractor-gauss";
        case FieldKind::RepellerExp: return "repeller-exp";
    }
    return "?";
}

std::string table_label(const ExperimentReport& report, std::size_t s) {
    const auto& stage = report.stages[s];
    if (!stage.truth.is_attractor()) return "Repeller";
    int nth = 0;
    for (std::size_t i = 0; i <= s; ++i)
        if (report.stages[i].truth.is_attractor()) ++nth;
    return "Attractor" + std::to_string(nth);
}

}  // namespace

std::string write_experiment_artifacts(ExperimentReport& report, const ScenarioConfig& cfg,
                                       const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    std::vector<ObjectRow> object_rows;
    for (auto& stage : report.stages) {
        const std::string tag = "stage" + std::to_string(stage.stage_id);
        write_file(dir / (tag + "_trajectories.csv"),
                   [&](std::ostream& o) { write_trajectories_csv(o, stage.trajectories); });
        write_file(dir / (tag + "_innovations.csv"),
                   [&](std::ostream& o) { write_innovations_csv(o, stage.innovations, cfg.dk); });
        write_file(dir / (tag + "_field.csv"),
                   [&](std::ostream& o) { write_field_csv(o, stage.field); });
        write_file(dir / (tag + "_loss.csv"),
                   [&](std::ostream& o) { write_loss_csv(o, stage.loss_history); });
        const fs::path model_path = dir / (tag + "_model.txt");
        save_model(stage.model, model_path.string());
        stage.model_path = model_path.string();

        ObjectRow row;
        row.object_id = stage.stage_id;
        row.estimate = stage.estimate;
        row.has_truth = true;
        row.truth = stage.truth.center;
        object_rows.push_back(row);
    }
    write_file(dir / "objects.csv", [&](std::ostream& o) { write_objects_csv(o, object_rows); });

    const fs::path report_csv = dir / "report.csv";
    write_file(report_csv, [&](std::ostream& o) {
        o << "stage,object_kind,model_path,x_true,y_true,x_est,y_est,pos_error,"
             "nature_true,nature_est,nature_ok,div_value,mag_rmse,angle_mae_deg,"
             "size_est,n_samples,final_train_rmse\n";
        for (const auto& stage : report.stages) {
            const char* nature_true = stage.truth.is_attractor() ? "attractive" : "repulsive";
            // File name only: report.csv must be byte-identical across equal
            // runs regardless of where the output directory lives.
            const std::string model_file = fs::path(stage.model_path).filename().string();
            o << stage.stage_id << ',' << kind_str(stage.truth.kind) << ',' << model_file
              << ',' << fmt9(stage.truth.center.x) << ',' << fmt9(stage.truth.center.y) << ','
              << fmt9(stage.estimate.position.x) << ',' << fmt9(stage.estimate.position.y) << ','
              << fmt9(stage.metrics.pos_error) << ',' << nature_true << ','
              << nature_str(stage.estimate.nature) << ',' << (stage.metrics.nature_ok ? 1 : 0)
              << ',' << fmt9(stage.estimate.div_value) << ',' << fmt9(stage.metrics.mag_rmse)
              << ',' << fmt9(stage.metrics.angle_mae_deg) << ','
              << fmt9(stage.estimate.size_estimate) << ',' << stage.dataset.size() << ','
              << fmt9(stage.loss_history.empty() ? 0.0 : stage.loss_history.back()) << '\n';
        }
    });

    write_file(dir / "report.txt", [&](std::ostream& o) {
        o << "Object       Real Position     Estimated Position   Nature\n";
        for (std::size_t s = 0; s < report.stages.size(); ++s) {
            const auto& stage = report.stages[s];
            std::ostringstream real, est;
            real << '(' << fmt9(stage.truth.center.x) << ", " << fmt9(stage.truth.center.y) << ')';
            est << '(' << fmt9(stage.estimate.position.x) << ", "
                << fmt9(stage.estimate.position.y) << ')';
            o << table_label(report, s);
            for (std::size_t pad = table_label(report, s).size(); pad < 13; ++pad) o << ' ';
            o << real.str();
            for (std::size_t pad = real.str().size(); pad < 18; ++pad) o << ' ';
            o << est.str();
            for (std::size_t pad = est.str().size(); pad < 21; ++pad) o << ' ';
            o << (stage.estimate.nature == Nature::Attractive ? "Attractive" : "Repulsive")
              << '\n';
        }
    });

    return report_csv.string();
}

}  // namespace fieldscope
