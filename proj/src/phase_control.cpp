#include "tdcsync/phase_control.hpp"

#include <algorithm>
#include <cmath>

#include "tdcsync/encoder.hpp"

namespace tdcsync {

void pi_apply(PhaseInterpolatorState& pi, int delta) {
    const int m = pi.codes_per_ui;
    pi.code = ((pi.code + delta) % m + m) % m;
}

namespace {

// Nearest populated code: readings that land on a code the calibration run
// never saw (possible in the jittered tails near the period edge) degrade to
// the closest calibrated neighbour instead of aborting the measurement.
int clamp_to_populated(const CalibrationTable& table, int code) {
    const int n = static_cast<int>(table.counts.size());
    code = std::clamp(code, 0, n - 1);
    if (table.counts[static_cast<std::size_t>(code)] > 0) return code;
    for (int d = 1; d < n; ++d) {
        const int lo = code - d, hi = code + d;
        if (lo >= 0 && table.counts[static_cast<std::size_t>(lo)] > 0) return lo;
        if (hi < n && table.counts[static_cast<std::size_t>(hi)] > 0) return hi;
    }
    return code;
}

int observe_code(const ChannelModel& channel, const TapDelayLine& tdl,
                 const AcquisitionConfig& acq, Rng& rng) {
    const ThermometerSample sample =
        acquire(tdl, channel.effective_skew(), acq, rng);
    return encode_ones_count(sample).code;
}

// Noiseless endgame. A zero-jitter measurement is pinned to bin centers, so
// once the remaining error is within the quantization floor the main loop
// cannot improve it (and can oscillate around a bin edge forever). Instead,
// creep the interpolator one code at a time until the observed TDC code
// changes: at that instant the phase sits within one step past a bin edge
// whose position the table knows. One computed jump then lands on the target.
void quantization_endgame(ChannelModel& channel, const TapDelayLine& tdl,
                          const CalibrationTable& table,
                          const AcquisitionConfig& acq,
                          const AlignParams& params, Rng& rng,
                          AlignResult& result) {
    const double step = channel.pi.step_ps;
    const double period = channel.clock_period_ps;

    double max_width = 0.0;
    for (double w : table.bin_widths_ps) max_width = std::max(max_width, w);
    const int max_creep =
        static_cast<int>((2.5 * table.lsb_ps + max_width) / step) + 8;

    const int start_code = observe_code(channel, tdl, acq, rng);
    int crossed_code = start_code;
    bool crossed = false;
    for (int i = 0; i < max_creep; ++i) {
        channel.apply_pi(1);
        const int code = observe_code(channel, tdl, acq, rng);
        if (code != start_code) {
            crossed_code = code;
            crossed = true;
            break;
        }
    }
    if (!crossed) {
        // One giant bin (e.g. a single tap spanning the period): there is no
        // edge to find, so the quantization floor is the honest answer.
        result.converged = false;
        return;
    }

    // The phase now lies within one step past the left edge of crossed_code.
    const std::size_t k = static_cast<std::size_t>(crossed_code);
    const double left_edge = table.bin_centers_ps[k] - table.bin_widths_ps[k] / 2.0;
    const double estimated = left_edge + step / 2.0;
    const int jump = static_cast<int>(
        std::lround(wrap_half(params.target_skew_ps - estimated, period) / step));
    channel.apply_pi(jump);
    result.converged = true;
    result.final_residual_ps = wrap_half(
        estimated + static_cast<double>(jump) * step - params.target_skew_ps,
        period);
}

}  // namespace

SkewMeasurement measure_skew(const ChannelModel& channel,
                             const TapDelayLine& tdl,
                             const CalibrationTable& table,
                             const AcquisitionConfig& acq, int num_samples,
                             Rng& rng) {
    SkewMeasurement m;
    double mean = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < num_samples; ++i) {
        const int code =
            clamp_to_populated(table, observe_code(channel, tdl, acq, rng));
        const double t = code_to_time(table, code);
        ++m.num_samples;
        const double delta = t - mean;
        mean += delta / m.num_samples;
        m2 += delta * (t - mean);
    }
    m.mean_ps = mean;
    m.std_ps = m.num_samples >= 2
                   ? std::sqrt(m2 / static_cast<double>(m.num_samples - 1))
                   : 0.0;
    return m;
}

AlignResult align_channel(ChannelModel& channel, const TapDelayLine& tdl,
                          const CalibrationTable& table,
                          const AcquisitionConfig& acq,
                          const AlignParams& params, Rng& rng) {
    AlignResult result;
    const double period = channel.clock_period_ps;
    const int max_jump = channel.pi.codes_per_ui / 2;
    const bool noiseless =
        acq.hit_jitter_sigma == 0.0 &&
        (acq.bubble_probability == 0.0 || acq.bubble_depth == 0);

    for (int iter = 1; iter <= params.max_iters; ++iter) {
        const SkewMeasurement m =
            measure_skew(channel, tdl, table, acq, params.num_samples, rng);
        const double error =
            wrap_half(m.mean_ps - params.target_skew_ps, period);
        result.iterations = iter;
        result.final_residual_ps = error;
        result.error_trace_ps.push_back(error);

        if (std::abs(error) <= params.tolerance_ps) {
            result.converged = true;
            break;
        }
        if (noiseless && std::abs(error) <= 2.5 * table.lsb_ps) {
            // Within the quantization floor of a noiseless measurement: the
            // loop above cannot resolve further. Switch to the edge search.
            quantization_endgame(channel, tdl, table, acq, params, rng, result);
            break;
        }

        int delta = 0;
        if (params.policy == AlignPolicy::kProportional) {
            delta = -static_cast<int>(std::lround(error / channel.pi.step_ps));
            delta = std::clamp(delta, -max_jump, max_jump);
        } else {
            delta = error > 0.0 ? -1 : 1;
        }
        channel.apply_pi(delta);
    }
    result.final_pi_code = channel.pi.code;
    return result;
}

double self_align_baseline(Rng& rng) {
    // Rejection-sampled truncated gaussian: sigma chosen so the truncated
    // RMS lands at the ~22 ps the uncalibrated aligner leaves behind.
    for (;;) {
        const double r = rng.gaussian(0.0, kBaselineSigmaPs);
        if (std::abs(r) <= kBaselineLimitPs) return r;
    }
}

}  // namespace tdcsync
