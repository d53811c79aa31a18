#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldscope/fields.hpp"
#include "fieldscope/filter.hpp"
#include "fieldscope/grid.hpp"
#include "fieldscope/localize.hpp"
#include "fieldscope/sim.hpp"
#include "fieldscope/train.hpp"

namespace fieldscope {

/// Raised on schema violations; the message names the offending JSON path.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct StageConfig {
    CentralFieldSpec object;
    int trajectories = 100;
    std::vector<int> destinations;
};

struct LocalizeConfig {
    double mask_radius = 2.5;
    bool use_mask = true;
};

/// Full scenario description. The default-constructed value is the
/// reference experiment: two attractors then a repeller on a [-20,20]^2
/// environment, dk = 1, grid step 0.3, 100 trajectories per stage.
struct ScenarioConfig {
    Bounds environment;
    double dk = 1.0;
    NoiseParams noise;
    double grid_step = 0.3;
    TrainConfig train;
    FilterConfig filter;
    SimLimits sim;
    LocalizeConfig localize;
    std::vector<StageConfig> stages;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
};

/// The reference three-stage scenario with its standard constants.
ScenarioConfig default_config();

/// Parses and validates a JSON scenario document. Missing keys fall back
/// to defaults; unknown keys, type mismatches, and invariant violations
/// raise ConfigError with a path-qualified message.
ScenarioConfig parse_config(const std::string& json_text);

ScenarioConfig load_config_file(const std::string& path);

}  // namespace fieldscope
