#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fieldscope/filter.hpp"
#include "fieldscope/localize.hpp"
#include "fieldscope/sim.hpp"
#include "fieldscope/train.hpp"

namespace fieldscope {

/// 9-significant-digit decimal rendering used by every CSV: '.' separator,
/// fixed across platforms so equal runs produce byte-identical files.
std::string fmt9(double v);

// trajectory CSV: agent_id,k,x_true,y_true,x_meas,y_meas
void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories_csv(std::istream& in);

// innovation CSV: agent_id,k,x_meas,y_meas,vx_residual,vy_residual
void write_innovations_csv(std::ostream& out, const std::vector<AgentInnovations>& agents,
                           double dk);
std::vector<AgentInnovations> read_innovations_csv(std::istream& in, double dk);

// grid field CSV: x,y,vx,vy in row-major grid order
void write_field_csv(std::ostream& out, const GridField& field);
/// Rebuilds the grid from the row-major point pattern.
GridField read_field_csv(std::istream& in);

struct ObjectRow {
    int object_id = 0;
    ObjectEstimate estimate;
    bool has_truth = false;
    Vec2 truth;
};

// objects CSV: object_id,x_est,y_est,nature,div_value[,x_true,y_true]
void write_objects_csv(std::ostream& out, const std::vector<ObjectRow>& rows);

// loss CSV: epoch,rmse
void write_loss_csv(std::ostream& out, const std::vector<double>& loss_history);

}  // namespace fieldscope
