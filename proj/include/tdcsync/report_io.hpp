#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdcsync/calibration.hpp"
#include "tdcsync/errors.hpp"
#include "tdcsync/montecarlo.hpp"

namespace tdcsync {

// FNV-1a 64-bit over raw bytes; cheap, stable content digest for manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// Shortest round-trip decimal form of a double ("1.5", "40.7", "6400").
std::string format_double(double v);

// Writes via a temp file + rename so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

// Whole-file read; throws ConfigError when the path cannot be opened.
std::string read_file(const std::string& path);

// Calibration table <-> JSON. load validates structure (matching array
// lengths, known version) and throws ConfigError on malformed input.
std::string table_to_json(const CalibrationTable& table);
void save_table_json(const CalibrationTable& table, const std::string& path);
CalibrationTable load_table_json(const std::string& path);

// Cross-checks a structurally valid table against its own counts: widths
// must re-derive from counts, centers/dnl/inl/lsb must match, widths must
// tile the clock period. Returns one message per inconsistency (empty = ok).
std::vector<std::string> validate_table(const CalibrationTable& table);

// CSV renderings of run outputs (header line + rows, '\n' line endings).
std::string histogram_csv(const CodeHistogram& histogram);
std::string residuals_csv(const std::vector<TrialRecord>& records);
std::string align_results_csv(const std::vector<TrialRecord>& records);
std::string residual_histogram_csv(
    const std::vector<std::pair<double, std::uint64_t>>& bins);

struct ManifestEntry {
    std::string path;    // relative to the output directory
    std::string digest;  // fnv1a64_hex of the file bytes
};

// Writes <dir>/manifest.json: config digest, tool version, master seed,
// creation timestamp, and the digest inventory of every produced file. The
// manifest is written last so its inventory covers a complete run.
void write_manifest(const std::string& dir, const std::string& config_digest,
                    std::uint64_t master_seed,
                    const std::vector<ManifestEntry>& outputs);

}  // namespace tdcsync
