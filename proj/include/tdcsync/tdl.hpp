#pragma once

#include <cstdint>
#include <vector>

#include "tdcsync/rng.hpp"

namespace tdcsync {

// Tap delays are clamped to this floor when the jitter draw would produce a
// nonphysical (zero or negative) element delay.
inline constexpr double kMinTapDelayPs = 1.0;

// How many times build_tdl() redraws a line whose random delays came up short
// of the clock period before giving up.
inline constexpr int kMaxBuildAttempts = 64;

struct TdlConfig {
    int num_taps = 160;
    double mean_tap_delay = 40.7;   // ps, nominal per-tap delay
    double tap_delay_jitter = 6.0;  // ps, 1-sigma mismatch between taps
    int bank_period = 24;           // taps per bank segment; 0 disables banking
    double bank_extra_delay = 25.0; // ps added where the line crosses banks
    double clock_period = 6400.0;   // ps, measurement window = one ref period
    std::uint64_t rng_seed = 0xefdf3d6c5430721cull;
};

// A concrete delay line: per-tap delays and their running sums. boundaries[i]
// is the total delay up to and including tap i, so a hit at time t fires
// exactly the taps whose boundary is <= t.
struct TapDelayLine {
    std::vector<double> tap_delays;
    std::vector<double> boundaries;
    double clock_period = 0.0;
};

// Raw sampled output of the line: one bit per tap, packed 64 per word.
class ThermometerSample {
public:
    ThermometerSample() = default;
    explicit ThermometerSample(int length);

    // Constructs the clean pattern for a given code: bits [0, code) set.
    static ThermometerSample clean(int length, int code);

    int length() const { return length_; }
    bool get(int pos) const;
    void set(int pos, bool value);
    void flip(int pos);
    int popcount() const;

    const std::vector<std::uint64_t>& words() const { return words_; }

private:
    std::vector<std::uint64_t> words_;
    int length_ = 0;
};

struct AcquisitionConfig {
    double hit_jitter_sigma = 15.0; // ps, per-hit timing noise
    double bubble_probability = 0.1;
    int bubble_depth = 2;           // max distance of a flipped bit from the edge
};

// Draws a delay line from the config. Throws std::invalid_argument when the
// config is malformed or the nominal line cannot span the clock period, and
// std::runtime_error when kMaxBuildAttempts random draws all come up short.
TapDelayLine build_tdl(const TdlConfig& config);

// Number of taps a hit at time t fires (boundaries <= t), i.e. the code an
// ideal, noiseless readout would produce.
int ideal_code(const TapDelayLine& tdl, double t);

// Simulates one hit: applies timing jitter, latches the thermometer pattern,
// and injects at most one bubble flip near the 1/0 edge. hit_phase must lie
// in [0, clock_period); throws std::invalid_argument otherwise.
ThermometerSample acquire(const TapDelayLine& tdl, double hit_phase,
                          const AcquisitionConfig& acq, Rng& rng);

}  // namespace tdcsync
