#include "fieldscope/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fieldscope {

using nlohmann::json;

ScenarioConfig default_config() {
    ScenarioConfig cfg;
    cfg.stages = {
        {CentralFieldSpec::attractor_sqrt({0.0, 15.0}, 2.0, 4.0, 80.0), 100, {0}},
        {CentralFieldSpec::attractor_gauss({-10.0, 10.0}, 1.1, 8.0, 80.0, 50.0), 100, {1}},
        {CentralFieldSpec::repeller_exp({0.0, -5.0}, 0.8, 1000.0), 100, {0, 1}},
    };
    return cfg;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw ConfigError(path + ": " + why);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
}

const json* get(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Vec2 as_vec2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
    return {as_double(v[0], path + "[0]"), as_double(v[1], path + "[1]")};
}

void parse_environment(const json& j, const std::string& path, Bounds& b) {
    check_keys(j, path, {"x_min", "x_max", "y_min", "y_max"});
    if (const json* v = get(j, "x_min")) b.x_min = as_double(*v, path + ".x_min");
    if (const json* v = get(j, "x_max")) b.x_max = as_double(*v, path + ".x_max");
    if (const json* v = get(j, "y_min")) b.y_min = as_double(*v, path + ".y_min");
    if (const json* v = get(j, "y_max")) b.y_max = as_double(*v, path + ".y_max");
    if (!(b.x_min < b.x_max)) fail(path + ".x_min", "must be < x_max");
    if (!(b.y_min < b.y_max)) fail(path + ".y_min", "must be < y_max");
}

void parse_noise(const json& j, const std::string& path, NoiseParams& n) {
    check_keys(j, path, {"sigma_process", "sigma_meas"});
    if (const json* v = get(j, "sigma_process")) n.sigma_process = as_double(*v, path + ".sigma_process");
    if (const json* v = get(j, "sigma_meas")) n.sigma_meas = as_double(*v, path + ".sigma_meas");
    if (n.sigma_process < 0.0) fail(path + ".sigma_process", "must be >= 0");
    if (n.sigma_meas < 0.0) fail(path + ".sigma_meas", "must be >= 0");
}

void parse_train(const json& j, const std::string& path, TrainConfig& t) {
    check_keys(j, path,
               {"lambda0", "lambda_up", "lambda_down", "max_epochs", "grad_tol", "lambda_max",
                "restarts", "val_fraction", "val_patience", "seed", "init"});
    if (const json* v = get(j, "lambda0")) t.lambda0 = as_double(*v, path + ".lambda0");
    if (const json* v = get(j, "lambda_up")) t.lambda_up = as_double(*v, path + ".lambda_up");
    if (const json* v = get(j, "lambda_down")) t.lambda_down = as_double(*v, path + ".lambda_down");
    if (const json* v = get(j, "max_epochs")) t.max_epochs = as_int(*v, path + ".max_epochs");
    if (const json* v = get(j, "grad_tol")) t.grad_tol = as_double(*v, path + ".grad_tol");
    if (const json* v = get(j, "lambda_max")) t.lambda_max = as_double(*v, path + ".lambda_max");
    if (const json* v = get(j, "restarts")) t.restarts = as_int(*v, path + ".restarts");
    if (const json* v = get(j, "val_fraction"))
        t.val_fraction = as_double(*v, path + ".val_fraction");
    if (const json* v = get(j, "val_patience")) t.val_patience = as_int(*v, path + ".val_patience");
    if (const json* v = get(j, "seed")) t.seed = as_u64(*v, path + ".seed");
    if (const json* v = get(j, "init")) {
        const std::string s = as_string(*v, path + ".init");
        if (s == "uniform")
            t.init = WeightInit::Uniform;
        else if (s == "nguyen-widrow")
            t.init = WeightInit::NguyenWidrow;
        else
            fail(path + ".init", "expected \"uniform\" or \"nguyen-widrow\"");
    }
    if (!(t.lambda0 > 0.0)) fail(path + ".lambda0", "must be > 0");
    if (!(t.lambda_up > 1.0)) fail(path + ".lambda_up", "must be > 1");
    if (!(t.lambda_down > 0.0 && t.lambda_down < 1.0)) fail(path + ".lambda_down", "must be in (0, 1)");
    if (t.max_epochs < 1) fail(path + ".max_epochs", "must be >= 1");
    if (t.restarts < 1) fail(path + ".restarts", "must be >= 1");
    if (!(t.val_fraction >= 0.0 && t.val_fraction < 1.0)) fail(path + ".val_fraction", "must be in [0, 1)");
    if (t.val_patience < 1) fail(path + ".val_patience", "must be >= 1");
    if (!(t.grad_tol > 0.0)) fail(path + ".grad_tol", "must be > 0");
    if (!(t.lambda_max >= t.lambda0)) fail(path + ".lambda_max", "must be >= lambda0");
}

void parse_filter(const json& j, const std::string& path, FilterConfig& f) {
    check_keys(j, path,
               {"q_velocity", "q_mismatch_std", "r_override", "innovation_source",
                "control_point"});
    if (const json* v = get(j, "q_velocity")) f.q_velocity = as_double(*v, path + ".q_velocity");
    if (const json* v = get(j, "q_mismatch_std"))
        f.q_mismatch_std = as_double(*v, path + ".q_mismatch_std");
    if (const json* v = get(j, "r_override")) {
        f.has_r_override = true;
        f.r_override = as_double(*v, path + ".r_override");
        if (f.r_override < 0.0) fail(path + ".r_override", "must be >= 0");
    }
    if (const json* v = get(j, "innovation_source")) {
        const std::string s = as_string(*v, path + ".innovation_source");
        if (s == "filtered")
            f.source = InnovationSource::Filtered;
        else if (s == "open-loop")
            f.source = InnovationSource::OpenLoop;
        else
            fail(path + ".innovation_source", "expected \"filtered\" or \"open-loop\"");
    }
    if (const json* v = get(j, "control_point")) {
        const std::string s = as_string(*v, path + ".control_point");
        if (s == "measurement")
            f.control_point = ControlPoint::Measurement;
        else if (s == "posterior")
            f.control_point = ControlPoint::Posterior;
        else
            fail(path + ".control_point", "expected \"measurement\" or \"posterior\"");
    }
    if (f.q_velocity < 0.0) fail(path + ".q_velocity", "must be >= 0");
    if (f.q_mismatch_std < 0.0) fail(path + ".q_mismatch_std", "must be >= 0");
}

void parse_sim(const json& j, const std::string& path, SimLimits& s) {
    check_keys(j, path, {"arrival_radius", "max_steps", "stall_speed", "stall_radius"});
    if (const json* v = get(j, "arrival_radius"))
        s.arrival_radius = as_double(*v, path + ".arrival_radius");
    if (const json* v = get(j, "max_steps")) s.max_steps = as_int(*v, path + ".max_steps");
    if (const json* v = get(j, "stall_speed")) s.stall_speed = as_double(*v, path + ".stall_speed");
    if (const json* v = get(j, "stall_radius"))
        s.stall_radius = as_double(*v, path + ".stall_radius");
    if (!(s.arrival_radius > 0.0)) fail(path + ".arrival_radius", "must be > 0");
    if (s.max_steps < 1) fail(path + ".max_steps", "must be >= 1");
    if (s.stall_speed < 0.0) fail(path + ".stall_speed", "must be >= 0");
    if (s.stall_radius < 0.0) fail(path + ".stall_radius", "must be >= 0");
}

void parse_localize(const json& j, const std::string& path, LocalizeConfig& l) {
    check_keys(j, path, {"mask_radius", "use_mask"});
    if (const json* v = get(j, "mask_radius")) l.mask_radius = as_double(*v, path + ".mask_radius");
    if (const json* v = get(j, "use_mask")) l.use_mask = as_bool(*v, path + ".use_mask");
    if (!(l.mask_radius > 0.0)) fail(path + ".mask_radius", "must be > 0");
}

CentralFieldSpec parse_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object spec");
    const json* kind_v = get(j, "kind");
    if (!kind_v) fail(path + ".kind", "required");
    const std::string kind = as_string(*kind_v, path + ".kind");

    const auto num = [&](const char* key, double fallback, bool required = false) {
        if (const json* v = get(j, key)) return as_double(*v, path + "." + key);
        if (required) fail(path + "." + key, "required");
        return fallback;
    };

    try {
        if (kind == "attractor-sqrt") {
            check_keys(j, path, {"kind", "center", "b", "c", "f"});
            const json* center = get(j, "center");
            if (!center) fail(path + ".center", "required");
            return CentralFieldSpec::attractor_sqrt(as_vec2(*center, path + ".center"),
                                                    num("b", 2.0), num("c", 4.0), num("f", 80.0));
        }
        if (kind == "attractor-gauss") {
            check_keys(j, path, {"kind", "center", "b", "c", "f", "alpha"});
            const json* center = get(j, "center");
            if (!center) fail(path + ".center", "required");
            return CentralFieldSpec::attractor_gauss(as_vec2(*center, path + ".center"),
                                                     num("b", 1.1), num("c", 8.0), num("f", 80.0),
                                                     num("alpha", 50.0));
        }
        if (kind == "repeller-exp") {
            check_keys(j, path, {"kind", "center", "b", "alpha", "decay"});
            const json* center = get(j, "center");
            if (!center) fail(path + ".center", "required");
            bool decay = true;
            if (const json* v = get(j, "decay")) decay = as_bool(*v, path + ".decay");
            return CentralFieldSpec::repeller_exp(as_vec2(*center, path + ".center"),
                                                  num("b", 0.8), num("alpha", 1000.0), decay);
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "expected one of attractor-sqrt, attractor-gauss, repeller-exp");
}

void parse_stages(const json& j, const std::string& path, std::vector<StageConfig>& stages) {
    if (!j.is_array()) fail(path, "expected an array of stages");
    stages.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string sp = path + "[" + std::to_string(i) + "]";
        const json& sj = j[i];
        if (!sj.is_object()) fail(sp, "expected a stage object");
        check_keys(sj, sp, {"object", "trajectories", "destinations"});
        StageConfig stage;
        const json* obj = get(sj, "object");
        if (!obj) fail(sp + ".object", "required");
        stage.object = parse_object(*obj, sp + ".object");
        if (const json* v = get(sj, "trajectories"))
            stage.trajectories = as_int(*v, sp + ".trajectories");
        if (stage.trajectories < 1) fail(sp + ".trajectories", "must be >= 1");
        if (const json* v = get(sj, "destinations")) {
            if (!v->is_array() || v->empty()) fail(sp + ".destinations", "expected a non-empty array");
            for (std::size_t k = 0; k < v->size(); ++k)
                stage.destinations.push_back(
                    as_int((*v)[k], sp + ".destinations[" + std::to_string(k) + "]"));
        }
        stages.push_back(std::move(stage));
    }
    if (stages.empty()) fail(path, "needs at least one stage");
}

/// Destination defaults and cross-stage validation once all stages exist.
void finalize_stages(std::vector<StageConfig>& stages) {
    std::vector<int> attractor_indices;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        auto& stage = stages[i];
        const std::string sp = "stages[" + std::to_string(i) + "]";
        if (stage.destinations.empty()) {
            if (stage.object.is_attractor()) {
                stage.destinations = {static_cast<int>(i)};
            } else if (!attractor_indices.empty()) {
                stage.destinations = attractor_indices;
            } else {
                fail(sp + ".destinations", "required: no attractor introduced yet");
            }
        }
        for (int d : stage.destinations) {
            if (d < 0 || d > static_cast<int>(i))
                fail(sp + ".destinations", "index must refer to an already-introduced object");
            if (!stages[static_cast<std::size_t>(d)].object.is_attractor())
                fail(sp + ".destinations", "index must refer to an attractor");
        }
        if (stage.object.is_attractor()) attractor_indices.push_back(static_cast<int>(i));
    }
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("top level: expected a JSON object");

    check_keys(doc, "",
               {"environment", "dk", "noise", "grid", "train", "filter", "sim", "localize",
                "stages", "seed", "out_dir"});

    ScenarioConfig cfg = default_config();
    if (const json* v = get(doc, "environment")) parse_environment(*v, "environment", cfg.environment);
    if (const json* v = get(doc, "dk")) {
        cfg.dk = as_double(*v, "dk");
        if (!(cfg.dk > 0.0)) fail("dk", "must be > 0");
    }
    if (const json* v = get(doc, "noise")) parse_noise(*v, "noise", cfg.noise);
    if (const json* v = get(doc, "grid")) {
        check_keys(*v, "grid", {"step"});
        if (const json* s = get(*v, "step")) {
            cfg.grid_step = as_double(*s, "grid.step");
            if (!(cfg.grid_step > 0.0)) fail("grid.step", "must be > 0");
        }
    }
    if (const json* v = get(doc, "train")) parse_train(*v, "train", cfg.train);
    if (const json* v = get(doc, "filter")) parse_filter(*v, "filter", cfg.filter);
    if (const json* v = get(doc, "sim")) parse_sim(*v, "sim", cfg.sim);
    if (const json* v = get(doc, "localize")) parse_localize(*v, "localize", cfg.localize);
    if (const json* v = get(doc, "stages")) parse_stages(*v, "stages", cfg.stages);
    if (const json* v = get(doc, "seed")) cfg.seed = as_u64(*v, "seed");
    if (const json* v = get(doc, "out_dir")) cfg.out_dir = as_string(*v, "out_dir");

    finalize_stages(cfg.stages);
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

}  // namespace fieldscope
