#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tdcsync/phase_control.hpp"

namespace tdcsync {

struct McConfig {
    int num_trials = 1000;
    int num_channels = 8;  // channel 0 is the master; the rest get aligned
};

// Outcome of aligning one slave channel in one power-up trial.
struct TrialRecord {
    int trial = 0;
    int channel = 0;
    bool converged = false;
    double residual_ps = 0.0;  // true skew minus target, wrapped to +-T/2
    int iterations = 0;
    int pi_code = 0;
};

struct SyncReport {
    std::vector<TrialRecord> records;
    double rms_residual_ps = 0.0;   // about the mean residual
    double max_abs_dev_ps = 0.0;    // worst |residual - mean|
    double mean_iterations = 0.0;   // over converged records
    double convergence_rate = 0.0;  // fraction of records that converged
};

struct BaselineComparison {
    double baseline_rms_ps = 0.0;
    double tdc_rms_ps = 0.0;
    double improvement_factor = 0.0;  // baseline_rms / tdc_rms
};

// Runs one power-up trial: every slave channel gets a fresh uniform random
// skew and is aligned closed-loop. Each (trial, channel) pair draws from its
// own RNG stream, so trials can execute in any order on any thread. `pi`
// supplies the interpolator geometry each channel starts from.
std::vector<TrialRecord> run_single_trial(int trial, const TapDelayLine& tdl,
                                          const CalibrationTable& table,
                                          const AcquisitionConfig& acq,
                                          const AlignParams& params,
                                          const PhaseInterpolatorState& pi,
                                          int num_channels,
                                          std::uint64_t master_seed);

// Aggregates records (already in trial/channel order) into summary stats.
SyncReport finalize_report(std::vector<TrialRecord> records);

// Full Monte-Carlo run across mc.num_trials power-ups, parallelized over
// `threads` workers. Results are identical for any threads >= 1.
SyncReport run_trials(const TapDelayLine& tdl, const CalibrationTable& table,
                      const AcquisitionConfig& acq, const AlignParams& params,
                      const PhaseInterpolatorState& pi, const McConfig& mc,
                      std::uint64_t master_seed, int threads);

// Side-by-side RMS of the uncalibrated power-up aligner (num_draws residual
// draws) against the TDC-driven result in `tdc_report`.
BaselineComparison compare_methods(const SyncReport& tdc_report, int num_draws,
                                   std::uint64_t master_seed);

// Histograms residuals into bins of the given width, centered on the mean
// residual. Returns (bin_center_ps, count) sorted by center; empty bins are
// omitted.
std::vector<std::pair<double, std::uint64_t>> residual_histogram(
    const std::vector<double>& residuals, double bin_width_ps);

}  // namespace tdcsync
