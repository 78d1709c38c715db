#include "tdcsync/tdl.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <stdexcept>

namespace tdcsync {

ThermometerSample::ThermometerSample(int length)
    : words_(static_cast<std::size_t>((length + 63) / 64), 0), length_(length) {
    assert(length >= 0);
}

ThermometerSample ThermometerSample::clean(int length, int code) {
    assert(code >= 0 && code <= length);
    ThermometerSample s(length);
    int full = code / 64;
    for (int w = 0; w < full; ++w) s.words_[w] = ~0ull;
    const int rest = code % 64;
    if (rest > 0) s.words_[full] = (1ull << rest) - 1;
    return s;
}

bool ThermometerSample::get(int pos) const {
    assert(pos >= 0 && pos < length_);
    return (words_[static_cast<std::size_t>(pos) >> 6] >> (pos & 63)) & 1u;
}

void ThermometerSample::set(int pos, bool value) {
    assert(pos >= 0 && pos < length_);
    const std::uint64_t mask = 1ull << (pos & 63);
    if (value)
        words_[static_cast<std::size_t>(pos) >> 6] |= mask;
    else
        words_[static_cast<std::size_t>(pos) >> 6] &= ~mask;
}

void ThermometerSample::flip(int pos) {
    assert(pos >= 0 && pos < length_);
    words_[static_cast<std::size_t>(pos) >> 6] ^= 1ull << (pos & 63);
}

int ThermometerSample::popcount() const {
    int total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
}

TapDelayLine build_tdl(const TdlConfig& config) {
    if (config.num_taps < 1)
        throw std::invalid_argument("tdl: num_taps must be >= 1");
    if (!(config.mean_tap_delay > 0.0))
        throw std::invalid_argument("tdl: mean_tap_delay must be > 0");
    if (config.tap_delay_jitter < 0.0)
        throw std::invalid_argument("tdl: tap_delay_jitter must be >= 0");
    if (config.bank_period < 0)
        throw std::invalid_argument("tdl: bank_period must be >= 0");
    if (config.bank_extra_delay < 0.0)
        throw std::invalid_argument("tdl: bank_extra_delay must be >= 0");
    if (!(config.clock_period > 0.0))
        throw std::invalid_argument("tdl: clock_period must be > 0");
    // The line must plausibly span one clock period, otherwise hits near the
    // end of the period have no tap left to land in. Checked on the nominal
    // per-tap delay so a config that only covers thanks to lucky jitter draws
    // is rejected up front.
    if (static_cast<double>(config.num_taps) * config.mean_tap_delay <
        config.clock_period)
        throw std::invalid_argument(
            "tdl: num_taps * mean_tap_delay must cover clock_period");

    Rng rng(config.rng_seed);
    TapDelayLine tdl;
    tdl.clock_period = config.clock_period;
    for (int attempt = 0; attempt < kMaxBuildAttempts; ++attempt) {
        tdl.tap_delays.clear();
        tdl.boundaries.clear();
        tdl.tap_delays.reserve(static_cast<std::size_t>(config.num_taps));
        tdl.boundaries.reserve(static_cast<std::size_t>(config.num_taps));
        double total = 0.0;
        for (int i = 0; i < config.num_taps; ++i) {
            double d = rng.gaussian(config.mean_tap_delay, config.tap_delay_jitter);
            d = std::max(d, kMinTapDelayPs);
            if (config.bank_period > 0 && i > 0 && i % config.bank_period == 0)
                d += config.bank_extra_delay;
            tdl.tap_delays.push_back(d);
            total += d;
            tdl.boundaries.push_back(total);
        }
        if (tdl.boundaries.back() >= config.clock_period) return tdl;
        // Jitter shortened the line below one period: redraw everything so
        // the returned line never truncates the measurement range.
    }
    throw std::runtime_error(
        "tdl: failed to draw a line spanning clock_period");
}

int ideal_code(const TapDelayLine& tdl, double t) {
    // Count of boundaries <= t: first element strictly greater marks the end.
    auto it = std::upper_bound(tdl.boundaries.begin(), tdl.boundaries.end(), t);
    return static_cast<int>(it - tdl.boundaries.begin());
}

ThermometerSample acquire(const TapDelayLine& tdl, double hit_phase,
                          const AcquisitionConfig& acq, Rng& rng) {
    if (!(hit_phase >= 0.0 && hit_phase < tdl.clock_period))
        throw std::invalid_argument("acquire: hit_phase outside [0, clock_period)");

    // Jitter is always drawn (sigma 0 yields exactly 0) so the per-hit RNG
    // consumption does not depend on the noise setting.
    double effective = hit_phase + rng.gaussian(0.0, acq.hit_jitter_sigma);
    effective = std::clamp(effective, 0.0, tdl.boundaries.back());

    const int n = static_cast<int>(tdl.boundaries.size());
    const int code = ideal_code(tdl, effective);
    ThermometerSample sample = ThermometerSample::clean(n, code);

    if (rng.bernoulli(acq.bubble_probability) && acq.bubble_depth > 0) {
        // A metastable latch near the 1/0 edge: flip one bit within
        // bubble_depth of the edge position.
        const int lo = std::max(0, code - acq.bubble_depth);
        const int hi = std::min(n - 1, code + acq.bubble_depth - 1);
        if (hi >= lo) {
            const int pos =
                lo + static_cast<int>(rng.below(static_cast<std::uint32_t>(hi - lo + 1)));
            sample.flip(pos);
        }
    }
    return sample;
}

}  // namespace tdcsync
