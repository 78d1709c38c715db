#pragma once

#include <stdexcept>

namespace tdcsync {

// Bad user input that never reached the engine: unreadable files, malformed
// JSON, unknown keys, out-of-range parameter values. CLI exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid input whose contents violate an invariant the pipeline
// relies on (e.g. a calibration table whose widths do not match its counts).
// CLI exit code 2.
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tdcsync
