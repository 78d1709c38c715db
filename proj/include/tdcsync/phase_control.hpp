#pragma once

#include <cstdint>
#include <vector>

#include "tdcsync/calibration.hpp"
#include "tdcsync/numeric_util.hpp"
#include "tdcsync/tdl.hpp"

namespace tdcsync {

// Residuals of the uncalibrated fallback aligner are modeled as a zero-mean
// gaussian, truncated to the deadband edge. The pre-truncation sigma is set
// so the truncated distribution's RMS comes out at the observed ~22 ps.
inline constexpr double kBaselineSigmaPs = 25.0;
inline constexpr double kBaselineLimitPs = 50.0;

struct PhaseInterpolatorState {
    int code = 0;
    double step_ps = 3.125;  // one code = UI / codes_per_ui at 2.5 Gb/s
    int codes_per_ui = 128;
};

// Advances the interpolator by delta codes, wrapping the code word modulo
// codes_per_ui.
void pi_apply(PhaseInterpolatorState& pi, int delta);

// One receive channel: a fixed true skew plus whatever phase the interpolator
// has accumulated. total_steps tracks every code ever applied (not wrapped),
// because each full code wrap slips the divided parallel clock by one UI --
// the phase keeps rotating, it does not snap back.
struct ChannelModel {
    double true_skew_ps = 0.0;
    PhaseInterpolatorState pi;
    std::int64_t total_steps = 0;
    double clock_period_ps = 6400.0;

    double effective_skew() const {
        return wrap_unit(true_skew_ps +
                             static_cast<double>(total_steps) * pi.step_ps,
                         clock_period_ps);
    }

    void apply_pi(int delta) {
        total_steps += delta;
        pi_apply(pi, delta);
    }
};

struct SkewMeasurement {
    double mean_ps = 0.0;
    double std_ps = 0.0;  // sample standard deviation (n-1)
    int num_samples = 0;
};

enum class AlignPolicy {
    kProportional,  // jump by round(error / step) codes, clamped
    kSingleStep,    // move one code per iteration toward the target
};

struct AlignParams {
    double target_skew_ps = 306.5;
    double tolerance_ps = 2.0;
    int max_iters = 100;
    int num_samples = 1024;  // hits averaged per skew measurement
    AlignPolicy policy = AlignPolicy::kProportional;
};

struct AlignResult {
    bool converged = false;
    int iterations = 0;
    double final_residual_ps = 0.0;  // controller's final error estimate
    int final_pi_code = 0;
    std::vector<double> error_trace_ps;  // one measured error per iteration
};

// Averages num_samples TDC readings of the channel's current skew. The jitter
// applied per hit dithers the quantizer, so the averaged mean resolves far
// below one bin.
SkewMeasurement measure_skew(const ChannelModel& channel,
                             const TapDelayLine& tdl,
                             const CalibrationTable& table,
                             const AcquisitionConfig& acq, int num_samples,
                             Rng& rng);

// Closed-loop alignment: measure skew through the TDC, step the interpolator
// by the measured error, repeat until within tolerance or out of iterations.
//
// With a noiseless acquisition the measurement is quantized to bin centers
// and the plain loop can stall a fraction of a bin away from the target; in
// that regime (zero jitter, no bubbles, error under a few LSB) the loop
// switches to a boundary search: creep one code at a time until the observed
// code changes, which pins the phase to a bin edge within one step, then jump
// straight to the target.
AlignResult align_channel(ChannelModel& channel, const TapDelayLine& tdl,
                          const CalibrationTable& table,
                          const AcquisitionConfig& acq,
                          const AlignParams& params, Rng& rng);

// One residual draw of the uncalibrated aligner (power-up alignment with no
// TDC feedback): truncated-gaussian leftover skew in ps.
double self_align_baseline(Rng& rng);

}  // namespace tdcsync
