#pragma once

#include <cstdint>
#include <vector>

#include "tdcsync/tdl.hpp"

namespace tdcsync {

// Stream-path tags used to derive independent child RNGs. Fixed values keep
// every random draw addressable, which is what makes results independent of
// thread count.
inline constexpr std::uint64_t kStreamDensity = 1;
inline constexpr std::uint64_t kStreamTrial = 2;
inline constexpr std::uint64_t kStreamBaseline = 3;

// Code-density work is split into this many fixed shards regardless of how
// many threads run them; each shard has its own RNG stream, and the integer
// histograms merge associatively, so any schedule gives identical counts.
inline constexpr int kDensityShards = 64;

struct CodeHistogram {
    std::vector<std::uint64_t> counts;  // one bin per code, 0..num_taps
    std::uint64_t total_events = 0;
};

// Per-code lookup derived from a code-density run. Unpopulated codes carry
// zero width and zero dnl; their center degrades to the left bin edge.
struct CalibrationTable {
    int version = 0;
    double clock_period_ps = 0.0;
    std::vector<std::uint64_t> counts;
    std::vector<double> bin_widths_ps;
    std::vector<double> bin_centers_ps;
    double lsb_ps = 0.0;
    std::vector<double> dnl;
    std::vector<double> inl;
};

struct TableStats {
    int populated_bins = 0;
    double mean_bin_width_ps = 0.0;  // over populated bins only
    double max_abs_dnl = 0.0;
    double max_abs_inl = 0.0;
    int dominant_period = 0;  // 0 when no periodic structure is detectable
};

// Fires num_events hits uniformly distributed over the clock period and
// histograms the encoded codes.
CodeHistogram run_code_density(const TapDelayLine& tdl,
                               const AcquisitionConfig& acq,
                               std::uint64_t num_events, Rng& rng);

// Same result as running kDensityShards sequential sub-runs with stream-
// derived RNGs, but executed on `threads` workers. Output is byte-identical
// for any threads >= 1.
CodeHistogram run_code_density_sharded(const TapDelayLine& tdl,
                                       const AcquisitionConfig& acq,
                                       std::uint64_t num_events,
                                       std::uint64_t seed, int threads);

// Converts a code histogram into bin widths, centers, LSB, DNL and INL.
// Throws std::invalid_argument on an empty histogram.
CalibrationTable derive_table(const CodeHistogram& histogram,
                              double clock_period_ps);

// Center timestamp for a code. Throws std::out_of_range when the code is
// outside the table or its bin is unpopulated.
double code_to_time(const CalibrationTable& table, int code);

TableStats table_stats(const CalibrationTable& table);

}  // namespace tdcsync
