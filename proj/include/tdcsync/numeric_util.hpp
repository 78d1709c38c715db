#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace tdcsync {

// Wraps x into [0, period).
inline double wrap_unit(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    return r;
}

// Wraps x into (-period/2, period/2]: the signed distance interpretation of a
// phase difference, choosing the shorter way around the circle.
inline double wrap_half(double x, double period) {
    double r = wrap_unit(x, period);
    if (r > period / 2.0) r -= period;
    return r;
}

inline double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// Sample standard deviation (n-1 denominator).
inline double sample_std(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

// RMS deviation about the mean (population form, n denominator).
inline double rms_about_mean(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(n));
}

inline double max_abs_dev(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const double m = mean(values);
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, std::abs(v - m));
    return worst;
}

}  // namespace tdcsync
