#include "tdcsync/config.hpp"

#include <initializer_list>
#include <string>

#include "json.hpp"
#include "tdcsync/report_io.hpp"

namespace tdcsync {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config: unknown key \"" + it.key() + "\" in " +
                              where);
    }
}

const json* section(const json& root, const char* name) {
    if (!root.contains(name)) return nullptr;
    const json& s = root.at(name);
    if (!s.is_object())
        throw ConfigError(std::string("config: ") + name +
                          " must be an object");
    return &s;
}

template <typename T>
void read_field(const json& obj, const char* key, T& out,
                const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for " + where + "." + key);
    }
}

}  // namespace

const char* align_policy_name(AlignPolicy policy) {
    return policy == AlignPolicy::kSingleStep ? "single_step" : "proportional";
}

AlignPolicy align_policy_from_name(const std::string& name) {
    if (name == "proportional") return AlignPolicy::kProportional;
    if (name == "single_step") return AlignPolicy::kSingleStep;
    throw ConfigError("config: unknown alignment policy \"" + name + "\"");
}

RunConfig default_run_config() { return RunConfig{}; }

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!root.is_object())
        throw ConfigError("config: top level must be an object");
    check_keys(root, "the top level",
               {"master_seed", "tdl", "acquisition", "pi", "alignment",
                "montecarlo", "calibration", "table_path", "threads",
                "histogram_bin_width_ps"});

    RunConfig cfg;
    read_field(root, "master_seed", cfg.master_seed, "config");
    read_field(root, "table_path", cfg.table_path, "config");
    read_field(root, "threads", cfg.threads, "config");
    read_field(root, "histogram_bin_width_ps", cfg.histogram_bin_width_ps,
               "config");

    if (const json* tdl = section(root, "tdl")) {
        check_keys(*tdl, "tdl",
                   {"num_taps", "mean_tap_delay", "tap_delay_jitter",
                    "bank_period", "bank_extra_delay", "clock_period",
                    "rng_seed"});
        read_field(*tdl, "num_taps", cfg.tdl.num_taps, "tdl");
        read_field(*tdl, "mean_tap_delay", cfg.tdl.mean_tap_delay, "tdl");
        read_field(*tdl, "tap_delay_jitter", cfg.tdl.tap_delay_jitter, "tdl");
        read_field(*tdl, "bank_period", cfg.tdl.bank_period, "tdl");
        read_field(*tdl, "bank_extra_delay", cfg.tdl.bank_extra_delay, "tdl");
        read_field(*tdl, "clock_period", cfg.tdl.clock_period, "tdl");
        read_field(*tdl, "rng_seed", cfg.tdl.rng_seed, "tdl");
    }

    if (const json* acq = section(root, "acquisition")) {
        check_keys(*acq, "acquisition",
                   {"hit_jitter_sigma", "bubble_probability", "bubble_depth"});
        read_field(*acq, "hit_jitter_sigma", cfg.acquisition.hit_jitter_sigma,
                   "acquisition");
        read_field(*acq, "bubble_probability",
                   cfg.acquisition.bubble_probability, "acquisition");
        read_field(*acq, "bubble_depth", cfg.acquisition.bubble_depth,
                   "acquisition");
    }

    if (const json* pi = section(root, "pi")) {
        check_keys(*pi, "pi", {"step_ps", "codes_per_ui"});
        read_field(*pi, "step_ps", cfg.pi.step_ps, "pi");
        read_field(*pi, "codes_per_ui", cfg.pi.codes_per_ui, "pi");
    }

    if (const json* al = section(root, "alignment")) {
        check_keys(*al, "alignment",
                   {"target_skew_ps", "tolerance_ps", "max_iters",
                    "num_samples", "policy"});
        read_field(*al, "target_skew_ps", cfg.alignment.target_skew_ps,
                   "alignment");
        read_field(*al, "tolerance_ps", cfg.alignment.tolerance_ps,
                   "alignment");
        read_field(*al, "max_iters", cfg.alignment.max_iters, "alignment");
        read_field(*al, "num_samples", cfg.alignment.num_samples, "alignment");
        if (al->contains("policy")) {
            std::string name;
            read_field(*al, "policy", name, "alignment");
            try {
                cfg.alignment.policy = align_policy_from_name(name);
            } catch (const ConfigError&) {
                throw ConfigError(
                    "config: alignment.policy must be \"proportional\" or "
                    "\"single_step\", got \"" + name + "\"");
            }
        }
    }

    if (const json* mc = section(root, "montecarlo")) {
        check_keys(*mc, "montecarlo",
                   {"num_trials", "num_channels", "initial_skew_distribution"});
        read_field(*mc, "num_trials", cfg.montecarlo.num_trials, "montecarlo");
        read_field(*mc, "num_channels", cfg.montecarlo.num_channels,
                   "montecarlo");
        if (mc->contains("initial_skew_distribution")) {
            std::string dist;
            read_field(*mc, "initial_skew_distribution", dist, "montecarlo");
            if (dist != "uniform")
                throw ConfigError(
                    "config: montecarlo.initial_skew_distribution only "
                    "supports \"uniform\", got \"" + dist + "\"");
        }
    }

    if (const json* cal = section(root, "calibration")) {
        check_keys(*cal, "calibration", {"num_events"});
        read_field(*cal, "num_events", cfg.calibration_events, "calibration");
    }

    validate_run_config(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_file(path));
}

std::string run_config_to_json(const RunConfig& config) {
    json root;
    root["master_seed"] = config.master_seed;
    root["tdl"] = {
        {"num_taps", config.tdl.num_taps},
        {"mean_tap_delay", config.tdl.mean_tap_delay},
        {"tap_delay_jitter", config.tdl.tap_delay_jitter},
        {"bank_period", config.tdl.bank_period},
        {"bank_extra_delay", config.tdl.bank_extra_delay},
        {"clock_period", config.tdl.clock_period},
        {"rng_seed", config.tdl.rng_seed},
    };
    root["acquisition"] = {
        {"hit_jitter_sigma", config.acquisition.hit_jitter_sigma},
        {"bubble_probability", config.acquisition.bubble_probability},
        {"bubble_depth", config.acquisition.bubble_depth},
    };
    root["pi"] = {
        {"step_ps", config.pi.step_ps},
        {"codes_per_ui", config.pi.codes_per_ui},
    };
    root["alignment"] = {
        {"target_skew_ps", config.alignment.target_skew_ps},
        {"tolerance_ps", config.alignment.tolerance_ps},
        {"max_iters", config.alignment.max_iters},
        {"num_samples", config.alignment.num_samples},
        {"policy", align_policy_name(config.alignment.policy)},
    };
    root["montecarlo"] = {
        {"num_trials", config.montecarlo.num_trials},
        {"num_channels", config.montecarlo.num_channels},
        {"initial_skew_distribution", "uniform"},
    };
    root["calibration"] = {{"num_events", config.calibration_events}};
    root["table_path"] = config.table_path;
    root["threads"] = config.threads;
    root["histogram_bin_width_ps"] = config.histogram_bin_width_ps;
    return root.dump(2) + "\n";
}

void validate_run_config(const RunConfig& config) {
    auto fail = [](const char* message) { throw ConfigError(message); };
    if (config.tdl.num_taps < 1) fail("config: tdl.num_taps must be >= 1");
    if (!(config.tdl.mean_tap_delay > 0.0))
        fail("config: tdl.mean_tap_delay must be > 0");
    if (config.tdl.tap_delay_jitter < 0.0)
        fail("config: tdl.tap_delay_jitter must be >= 0");
    if (config.tdl.bank_period < 0)
        fail("config: tdl.bank_period must be >= 0");
    if (config.tdl.bank_extra_delay < 0.0)
        fail("config: tdl.bank_extra_delay must be >= 0");
    if (!(config.tdl.clock_period > 0.0))
        fail("config: tdl.clock_period must be > 0");
    if (config.acquisition.hit_jitter_sigma < 0.0)
        fail("config: acquisition.hit_jitter_sigma must be >= 0");
    if (config.acquisition.bubble_probability < 0.0 ||
        config.acquisition.bubble_probability > 1.0)
        fail("config: acquisition.bubble_probability must be in [0, 1]");
    if (config.acquisition.bubble_depth < 0)
        fail("config: acquisition.bubble_depth must be >= 0");
    if (!(config.pi.step_ps > 0.0)) fail("config: pi.step_ps must be > 0");
    if (config.pi.codes_per_ui < 2)
        fail("config: pi.codes_per_ui must be >= 2");
    if (config.alignment.tolerance_ps < 0.0)
        fail("config: alignment.tolerance_ps must be >= 0");
    if (config.alignment.max_iters < 1)
        fail("config: alignment.max_iters must be >= 1");
    if (config.alignment.num_samples < 1)
        fail("config: alignment.num_samples must be >= 1");
    if (config.montecarlo.num_trials < 1)
        fail("config: montecarlo.num_trials must be >= 1");
    if (config.montecarlo.num_channels < 2)
        fail("config: montecarlo.num_channels must be >= 2");
    if (config.calibration_events < 1)
        fail("config: calibration.num_events must be >= 1");
    if (config.threads < 1) fail("config: threads must be >= 1");
    if (!(config.histogram_bin_width_ps > 0.0))
        fail("config: histogram_bin_width_ps must be > 0");
}

}  // namespace tdcsync
