#pragma once

#include <cstdint>
#include <string>

#include "tdcsync/calibration.hpp"
#include "tdcsync/errors.hpp"
#include "tdcsync/montecarlo.hpp"
#include "tdcsync/phase_control.hpp"
#include "tdcsync/tdl.hpp"

namespace tdcsync {

// Everything a run needs, in one place. Loaded from JSON; any key a file
// omits keeps its default, and keys that are not part of the schema are
// rejected by name so typos cannot silently fall back to defaults.
struct RunConfig {
    std::uint64_t master_seed = 0x6a09e667f3bcc909ull;
    TdlConfig tdl;
    AcquisitionConfig acquisition;
    PhaseInterpolatorState pi;  // step_ps / codes_per_ui; code is runtime state
    AlignParams alignment;
    McConfig montecarlo;
    std::uint64_t calibration_events = 1000000;
    std::string table_path;  // optional pre-built calibration table
    int threads = 1;
    double histogram_bin_width_ps = 1.0;
};

RunConfig default_run_config();

// Parses a config from JSON text. Missing keys keep defaults; unknown keys,
// malformed JSON and out-of-range values raise ConfigError (parse errors keep
// the line/column from the JSON parser).
RunConfig parse_run_config(const std::string& json_text);

// parse_run_config on the contents of a file; unreadable path -> ConfigError.
RunConfig load_run_config(const std::string& path);

// Canonical JSON form (sorted keys, full schema). Feeds the config digest in
// the run manifest, and round-trips through parse_run_config.
std::string run_config_to_json(const RunConfig& config);

const char* align_policy_name(AlignPolicy policy);
AlignPolicy align_policy_from_name(const std::string& name);

// Range-checks every field; throws ConfigError naming the offending key.
void validate_run_config(const RunConfig& config);

}  // namespace tdcsync
