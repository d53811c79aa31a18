#pragma once

#include <string>
#include <vector>

#include "fieldscope/config.hpp"
#include "fieldscope/csv.hpp"
#include "fieldscope/localize.hpp"

namespace fieldscope {

/// Field-approximation quality of one learned model against its analytic
/// counterpart, evaluated on the grid inside the coverage mask.
struct StageMetrics {
    double pos_error = 0.0;        // Euclidean distance estimate vs truth
    bool nature_ok = false;        // attractive/repulsive classification
    double mag_rmse = 0.0;         // RMSE of |field| over covered cells
    double angle_mae_deg = 0.0;    // mean |angle difference|, degrees
    double angle_abs_rmse_deg = 0.0;  // RMSE of |theta| difference, degrees
};

struct StageResult {
    int stage_id = 0;  // 1-based
    CentralFieldSpec truth;
    std::vector<Trajectory> trajectories;
    std::vector<AgentInnovations> innovations;
    Dataset dataset;
    MlpModel model;
    std::vector<double> loss_history;
    std::string train_warning;
    GridField field;
    GridMask mask;
    ObjectEstimate estimate;
    StageMetrics metrics;
    std::string model_path;  // filled when artifacts are written
};

struct ExperimentReport {
    std::uint64_t seed = 0;
    std::vector<StageResult> stages;
};

/// Raised when a stage fails; carries the 1-based stage id in the message.
class StageError : public std::runtime_error {
  public:
    StageError(int stage_id, const std::string& why);
    int stage_id() const { return stage_id_; }

  private:
    int stage_id_;
};

/// Runs the incremental experiment: per stage, simulate trajectories under
/// the physical fields, filter each trajectory with the model built from
/// the fields already learned for that agent's driving set, pool the
/// residual samples, fit the stage's regressor, and localize/classify the
/// new object by the divergence of its learned field.
ExperimentReport run_experiment(const ScenarioConfig& cfg, std::uint64_t seed);

/// Recomputes the truth-relative metrics table for a report (simulation
/// mode only: the analytic specs must be known).
std::vector<StageMetrics> compare_to_truth(const ExperimentReport& report,
                                           const std::vector<CentralFieldSpec>& truth_specs,
                                           const ScenarioConfig& cfg);

/// Writes every artifact of a finished experiment under out_dir: per-stage
/// trajectory/innovation/field/loss CSVs and model files, objects.csv,
/// report.csv and the human-readable report.txt. Returns the report.csv
/// path. Sets model_path on the report's stages.
std::string write_experiment_artifacts(ExperimentReport& report, const ScenarioConfig& cfg,
                                       const std::string& out_dir);

}  // namespace fieldscope
