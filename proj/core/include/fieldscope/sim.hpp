#pragma once

#include <vector>

#include "fieldscope/fields.hpp"
#include "fieldscope/grid.hpp"
#include "fieldscope/rng.hpp"
#include "fieldscope/state.hpp"

namespace fieldscope {

/// Noise magnitudes for the two independent disturbance streams: process
/// jitter perturbing the true position every step, and sensor noise on the
/// reported position.
struct NoiseParams {
    double sigma_process = 0.1;
    double sigma_meas = 0.1;
};

/// Termination tuning for simulated trajectories.
///
/// An agent counts as arrived when it enters the arrival_radius ball around
/// its destination, or when it has effectively parked: superposed field
/// speed below stall_speed while within stall_radius of the destination.
/// The stall clause covers destinations whose pull is cancelled by a
/// repeller just outside the arrival ball, where the agent provably can
/// never close the remaining distance.
struct SimLimits {
    double arrival_radius = 0.5;
    int max_steps = 500;
    double stall_speed = 0.05;
    double stall_radius = 4.0;
};

enum class Termination { Arrived, MaxSteps };

struct TrajectoryPoint {
    StateVector state;  // true position + induced velocity at time k
    Measurement meas;   // sensor reading at time k
};

struct Trajectory {
    int agent_id = 0;
    std::vector<TrajectoryPoint> points;
    Termination reason = Termination::MaxSteps;
};

/// One step of the incremental scenario: a new object appears and
/// n_trajectories agents move under it. destinations holds indices into the
/// accumulated object list (attractor kinds only); agents cycle through it
/// in order, so two entries give a 50/50 split.
struct ScenarioStage {
    int stage_id = 0;
    CentralFieldSpec new_object;
    int n_trajectories = 100;
    std::vector<int> destinations;
};

/// Uniform spawn over the rectangle.
Vec2 spawn_position(Rng& rng, const Bounds& area);

struct StepResult {
    Vec2 position;  // next true position
    Vec2 velocity;  // field velocity at the pre-step position
};

/// One discrete step: next = p + dk * superpose(active, p) + process noise.
StepResult step_agent(Vec2 p, const FieldSet& active, double dk, const NoiseParams& noise,
                      Rng& rng);

/// Sensor reading of a true position at time index k.
Measurement measure(Vec2 p_true, int k, const NoiseParams& noise, Rng& rng);

/// Walks one agent from start until it arrives at the destination or
/// max_steps elapse. The agent is driven by its destination attractor plus
/// every repeller in the world. Child streams rng.child(1) and rng.child(2)
/// supply process and sensor noise respectively.
Trajectory simulate_trajectory(int agent_id, Vec2 start, const CentralFieldSpec& destination,
                               const FieldSet& repellers, double dk, const NoiseParams& noise,
                               const SimLimits& limits, const Rng& rng);

/// All trajectories of one stage. objects is the accumulated object list
/// including the stage's new object; each agent's driving set is its
/// assigned destination attractor plus every repeller present so far.
/// Agent i uses stage_rng.child(i) (spawn from child(0) of that), so the
/// result is independent of thread scheduling.
std::vector<Trajectory> run_stage(const ScenarioStage& stage, const FieldSet& objects,
                                  const Bounds& area, double dk, const NoiseParams& noise,
                                  const SimLimits& limits, const Rng& stage_rng, int threads = 1);

}  // namespace fieldscope
