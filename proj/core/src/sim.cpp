#include "fieldscope/sim.hpp"

#include <stdexcept>

#include "fieldscope/threads.hpp"

namespace fieldscope {

Vec2 spawn_position(Rng& rng, const Bounds& area) {
    return {rng.uniform(area.x_min, area.x_max), rng.uniform(area.y_min, area.y_max)};
}

StepResult step_agent(Vec2 p, const FieldSet& active, double dk, const NoiseParams& noise,
                      Rng& rng) {
    const Vec2 v = superpose(active, p);
    Vec2 next = p + dk * v;
    if (noise.sigma_process > 0.0) {
        next.x += rng.normal(0.0, noise.sigma_process);
        next.y += rng.normal(0.0, noise.sigma_process);
    }
    return {next, v};
}

Measurement measure(Vec2 p_true, int k, const NoiseParams& noise, Rng& rng) {
    Measurement z;
    z.k = k;
    z.x = p_true.x;
    z.y = p_true.y;
    if (noise.sigma_meas > 0.0) {
        z.x += rng.normal(0.0, noise.sigma_meas);
        z.y += rng.normal(0.0, noise.sigma_meas);
    }
    return z;
}

Trajectory simulate_trajectory(int agent_id, Vec2 start, const CentralFieldSpec& destination,
                               const FieldSet& repellers, double dk, const NoiseParams& noise,
                               const SimLimits& limits, const Rng& rng) {
    if (!destination.is_attractor())
        throw std::invalid_argument("trajectory destination must be an attractor kind");

    FieldSet active;
    active.reserve(repellers.size() + 1);
    active.push_back(destination);
    for (const auto& r : repellers) active.push_back(r);

    Rng process_rng = rng.child(1);
    Rng meas_rng = rng.child(2);

    Trajectory traj;
    traj.agent_id = agent_id;
    traj.reason = Termination::MaxSteps;

    Vec2 p = start;
    for (int k = 0;; ++k) {
        const Vec2 v = superpose(active, p);
        traj.points.push_back({StateVector{p.x, p.y, v.x, v.y}, measure(p, k, noise, meas_rng)});

        const double to_dest = distance(p, destination.center);
        if (to_dest <= limits.arrival_radius ||
            (to_dest <= limits.stall_radius && v.norm() < limits.stall_speed)) {
            traj.reason = Termination::Arrived;
            break;
        }
        if (k >= limits.max_steps) break;

        p = step_agent(p, active, dk, noise, process_rng).position;
    }
    return traj;
}

std::vector<Trajectory> run_stage(const ScenarioStage& stage, const FieldSet& objects,
                                  const Bounds& area, double dk, const NoiseParams& noise,
                                  const SimLimits& limits, const Rng& stage_rng, int threads) {
    if (stage.n_trajectories < 1)
        throw std::invalid_argument("stage needs at least one trajectory");
    if (stage.destinations.empty())
        throw std::invalid_argument("stage needs at least one destination");
    for (int d : stage.destinations) {
        if (d < 0 || d >= static_cast<int>(objects.size()))
            throw std::invalid_argument("destination index out of range");
        if (!objects[static_cast<std::size_t>(d)].is_attractor())
            throw std::invalid_argument("destination must refer to an attractor");
    }

    FieldSet repellers;
    for (const auto& o : objects)
        if (!o.is_attractor()) repellers.push_back(o);

    std::vector<Trajectory> out(static_cast<std::size_t>(stage.n_trajectories));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        const Rng agent_rng = stage_rng.child(i);
        Rng spawn_rng = agent_rng.child(0);
        const int dest_idx =
            stage.destinations[i % stage.destinations.size()];
        const Vec2 start = spawn_position(spawn_rng, area);
        out[i] = simulate_trajectory(static_cast<int>(i), start,
                                     objects[static_cast<std::size_t>(dest_idx)], repellers, dk,
                                     noise, limits, agent_rng);
    });
    return out;
}

}  // namespace fieldscope
