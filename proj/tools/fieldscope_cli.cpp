// Command-line front end: scenario configuration, stage-by-stage artifact
// generation, and the full incremental-learning pipeline.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fieldscope/config.hpp"
#include "fieldscope/csv.hpp"
#include "fieldscope/pipeline.hpp"
#include "fieldscope/threads.hpp"

namespace fs = std::filesystem;
using namespace fieldscope;

namespace {

struct CommonOpts {
    std::string config_path = "default";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

ScenarioConfig resolve_config(const CommonOpts& opts) {
    ScenarioConfig cfg = (opts.config_path.empty() || opts.config_path == "default")
                             ? default_config()
                             : load_config_file(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path,
                    "Scenario config JSON path, or \"default\" for the built-in scenario");
    cmd->add_option("--seed", opts.seed, "Root seed; overrides the config seed");
    cmd->add_option("--out", opts.out_dir, "Output directory; overrides the config out_dir");
}

void write_text_file(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    fn(out);
}

FieldSet accumulated_objects(const ScenarioConfig& cfg, std::size_t through_stage) {
    FieldSet objects;
    for (std::size_t s = 0; s <= through_stage; ++s) objects.push_back(cfg.stages[s].object);
    return objects;
}

std::vector<Trajectory> simulate_stage(const ScenarioConfig& cfg, std::size_t s) {
    const FieldSet objects = accumulated_objects(cfg, s);
    ScenarioStage stage;
    stage.stage_id = static_cast<int>(s) + 1;
    stage.new_object = cfg.stages[s].object;
    stage.n_trajectories = cfg.stages[s].trajectories;
    stage.destinations = cfg.stages[s].destinations;
    const Rng root(cfg.seed);
    return run_stage(stage, objects, cfg.environment, cfg.dk, cfg.noise, cfg.sim, root.child(s),
                     thread_count());
}

int cmd_simulate(const CommonOpts& opts) {
    const ScenarioConfig cfg = resolve_config(opts);
    for (std::size_t s = 0; s < cfg.stages.size(); ++s) {
        const auto trajs = simulate_stage(cfg, s);
        const fs::path path =
            fs::path(cfg.out_dir) / ("stage" + std::to_string(s + 1) + "_trajectories.csv");
        write_text_file(path, [&](std::ostream& o) { write_trajectories_csv(o, trajs); });
        std::cout << "wrote " << path.string() << " (" << trajs.size() << " trajectories)\n";
    }
    return 0;
}

MlpModel load_stage_model(const ScenarioConfig& cfg, int object_idx) {
    const fs::path path =
        fs::path(cfg.out_dir) / ("stage" + std::to_string(object_idx + 1) + "_model.txt");
    if (!fs::exists(path))
        throw std::runtime_error("missing learned model for object " +
                                 std::to_string(object_idx + 1) + ": " + path.string() +
                                 " (run `train --stage " + std::to_string(object_idx + 1) +
                                 "` first)");
    return load_model(path.string());
}

int cmd_filter(const CommonOpts& opts, int stage_1based) {
    const ScenarioConfig cfg = resolve_config(opts);
    const std::size_t s = static_cast<std::size_t>(stage_1based - 1);
    if (stage_1based < 1 || s >= cfg.stages.size())
        throw ConfigError("--stage: out of range for this scenario");

    const fs::path traj_path =
        fs::path(cfg.out_dir) / ("stage" + std::to_string(stage_1based) + "_trajectories.csv");
    std::ifstream traj_in(traj_path, std::ios::binary);
    if (!traj_in)
        throw std::runtime_error("missing " + traj_path.string() + " (run `simulate` first)");
    const auto trajs = read_trajectories_csv(traj_in);

    const FieldSet objects = accumulated_objects(cfg, s);
    const SystemMatrices sys = SystemMatrices::make(cfg.dk);
    const auto& destinations = cfg.stages[s].destinations;

    // Learned models for everything in the agent's driving set except the
    // stage's own new object.
    std::vector<std::optional<MlpModel>> models(objects.size());
    const auto model_for = [&](int idx) -> const MlpModel& {
        if (!models[static_cast<std::size_t>(idx)])
            models[static_cast<std::size_t>(idx)] = load_stage_model(cfg, idx);
        return *models[static_cast<std::size_t>(idx)];
    };

    std::vector<AgentInnovations> agents;
    agents.reserve(trajs.size());
    for (const auto& traj : trajs) {
        const int dest_idx =
            destinations[static_cast<std::size_t>(traj.agent_id) % destinations.size()];
        std::vector<FieldFn> known;
        for (std::size_t o = 0; o + 1 < objects.size(); ++o) {
            const bool drives = static_cast<int>(o) == dest_idx || !objects[o].is_attractor();
            if (!drives) continue;
            const MlpModel m = model_for(static_cast<int>(o));
            known.push_back([m](Vec2 p) { return m.forward(p); });
        }
        const KalmanModel model = make_kalman_model(sys, std::move(known), cfg.noise, cfg.filter);
        agents.push_back({traj.agent_id, run_filter(model, traj)});
    }

    const fs::path path =
        fs::path(cfg.out_dir) / ("stage" + std::to_string(stage_1based) + "_innovations.csv");
    write_text_file(path, [&](std::ostream& o) { write_innovations_csv(o, agents, cfg.dk); });
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_train(const CommonOpts& opts, int stage_1based) {
    const ScenarioConfig cfg = resolve_config(opts);
    const std::size_t s = static_cast<std::size_t>(stage_1based - 1);
    if (stage_1based < 1 || s >= cfg.stages.size())
        throw ConfigError("--stage: out of range for this scenario");

    const fs::path innov_path =
        fs::path(cfg.out_dir) / ("stage" + std::to_string(stage_1based) + "_innovations.csv");
    std::ifstream innov_in(innov_path, std::ios::binary);
    if (!innov_in)
        throw std::runtime_error("missing " + innov_path.string() + " (run `filter` first)");
    const auto agents = read_innovations_csv(innov_in, cfg.dk);
    const Dataset dataset = dataset_from_innovations(agents);
    if (dataset.size() == 0) throw std::runtime_error("no training samples in " + innov_path.string());

    Rng train_rng = Rng(cfg.seed).child(1000 + s);
    TrainResult trained =
        lm_train(dataset, cfg.train, Normalizer::from_bounds(cfg.environment), train_rng);
    if (!trained.warning.empty()) std::cerr << "warning: " << trained.warning << '\n';

    const fs::path model_path =
        fs::path(cfg.out_dir) / ("stage" + std::to_string(stage_1based) + "_model.txt");
    save_model(trained.model, model_path.string());
    const fs::path loss_path =
        fs::path(cfg.out_dir) / ("stage" + std::to_string(stage_1based) + "_loss.csv");
    write_text_file(loss_path, [&](std::ostream& o) { write_loss_csv(o, trained.loss_history); });

    std::cout << "wrote " << model_path.string() << " (final rmse "
              << fmt9(trained.loss_history.back()) << ", " << dataset.size() << " samples)\n";
    return 0;
}

int cmd_localize(const CommonOpts& opts, const std::string& field_path,
                 const std::string& model_path, const std::string& innovations_path,
                 bool no_mask, int object_id) {
    const ScenarioConfig cfg = resolve_config(opts);
    if (field_path.empty() == model_path.empty())
        throw ConfigError("localize: exactly one of --field or --model is required");

    GridField field;
    if (!field_path.empty()) {
        std::ifstream in(field_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open field CSV: " + field_path);
        field = read_field_csv(in);
    } else {
        const MlpModel model = load_model(model_path);
        field = evaluate_on_grid(model, make_grid(cfg.environment, cfg.grid_step));
    }

    std::optional<GridMask> mask;
    if (!innovations_path.empty() && !no_mask && cfg.localize.use_mask) {
        std::ifstream in(innovations_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open innovations CSV: " + innovations_path);
        const Dataset d = dataset_from_innovations(read_innovations_csv(in, cfg.dk), false);
        mask = coverage_mask(field.grid, d, cfg.localize.mask_radius);
    }

    const ObjectEstimate est = locate(divergence(field), mask ? &*mask : nullptr);

    const fs::path path = fs::path(cfg.out_dir) / "objects.csv";
    write_text_file(path, [&](std::ostream& o) {
        write_objects_csv(o, {ObjectRow{object_id, est, false, {}}});
    });
    std::cout << "object " << object_id << ": (" << fmt9(est.position.x) << ", "
              << fmt9(est.position.y) << ") " << nature_str(est.nature) << ", div "
              << fmt9(est.div_value) << "; wrote " << path.string() << '\n';
    return 0;
}

int cmd_pipeline(const CommonOpts& opts) {
    const ScenarioConfig cfg = resolve_config(opts);
    ExperimentReport report = run_experiment(cfg, cfg.seed);
    const std::string report_path = write_experiment_artifacts(report, cfg, cfg.out_dir);
    for (const auto& stage : report.stages) {
        std::cout << "stage " << stage.stage_id << ": estimate ("
                  << fmt9(stage.estimate.position.x) << ", " << fmt9(stage.estimate.position.y)
                  << ") " << nature_str(stage.estimate.nature) << ", position error "
                  << fmt9(stage.metrics.pos_error) << '\n';
        if (!stage.train_warning.empty())
            std::cerr << "stage " << stage.stage_id << " warning: " << stage.train_warning << '\n';
    }
    std::cout << "wrote " << report_path << '\n';
    return 0;
}

int cmd_dump_field(const CommonOpts& opts, const std::string& model_path, int object_1based,
                   const std::string& name) {
    const ScenarioConfig cfg = resolve_config(opts);
    if (model_path.empty() == (object_1based == 0))
        throw ConfigError("dump-field: exactly one of --model or --object is required");

    const Grid grid = make_grid(cfg.environment, cfg.grid_step);
    GridField field;
    std::string default_name;
    if (!model_path.empty()) {
        field = evaluate_on_grid(load_model(model_path), grid);
        default_name = fs::path(model_path).stem().string() + "_field.csv";
    } else {
        const std::size_t o = static_cast<std::size_t>(object_1based - 1);
        if (object_1based < 1 || o >= cfg.stages.size())
            throw ConfigError("--object: out of range for this scenario");
        const CentralFieldSpec& spec = cfg.stages[o].object;
        field.grid = grid;
        field.vectors.reserve(grid.size());
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                field.vectors.push_back(field_vector(spec, grid.point(i, j)));
        default_name = "object" + std::to_string(object_1based) + "_analytic_field.csv";
    }

    const fs::path path = fs::path(cfg.out_dir) / (name.empty() ? default_name : name);
    write_text_file(path, [&](std::ostream& o) { write_field_csv(o, field); });
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fieldscope: learns static objects' velocity fields from agent trajectories"};
    app.require_subcommand(1);

    CommonOpts opts;
    int stage = 1;
    int object_id = 1;
    std::string field_path, model_path, innovations_path, dump_name;
    bool no_mask = false;

    CLI::App* simulate = app.add_subcommand("simulate", "Emit per-stage trajectory CSVs");
    add_common(simulate, opts);

    CLI::App* filter = app.add_subcommand("filter", "Emit one stage's innovation CSV");
    add_common(filter, opts);
    filter->add_option("--stage", stage, "1-based stage number")->required();

    CLI::App* train = app.add_subcommand("train", "Fit one stage's field regressor");
    add_common(train, opts);
    train->add_option("--stage", stage, "1-based stage number")->required();

    CLI::App* localize = app.add_subcommand("localize", "Extract object location and nature");
    add_common(localize, opts);
    localize->add_option("--field", field_path, "Grid field CSV to analyze");
    localize->add_option("--model", model_path, "Learned model file to analyze");
    localize->add_option("--innovations", innovations_path,
                         "Innovation CSV used to build the coverage mask");
    localize->add_flag("--no-mask", no_mask, "Search every grid cell (no coverage mask)");
    localize->add_option("--object-id", object_id, "Object id written to objects.csv");

    CLI::App* pipeline = app.add_subcommand("pipeline", "Run the full incremental experiment");
    add_common(pipeline, opts);

    CLI::App* dump = app.add_subcommand("dump-field", "Grid CSV of an analytic or learned field");
    add_common(dump, opts);
    dump->add_option("--model", model_path, "Learned model file to evaluate");
    dump->add_option("--object", object_id, "1-based scenario object for the analytic field")
        ->default_val(0);
    dump->add_option("--name", dump_name, "Output file name (under --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(opts);
        if (filter->parsed()) return cmd_filter(opts, stage);
        if (train->parsed()) return cmd_train(opts, stage);
        if (localize->parsed())
            return cmd_localize(opts, field_path, model_path, innovations_path, no_mask,
                                object_id);
        if (pipeline->parsed()) return cmd_pipeline(opts);
        if (dump->parsed()) return cmd_dump_field(opts, model_path, object_id, dump_name);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
