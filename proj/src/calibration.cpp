#include "tdcsync/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tdcsync/encoder.hpp"
#include "tdcsync/version.hpp"

namespace tdcsync {

CodeHistogram run_code_density(const TapDelayLine& tdl,
                               const AcquisitionConfig& acq,
                               std::uint64_t num_events, Rng& rng) {
    CodeHistogram h;
    h.counts.assign(tdl.boundaries.size() + 1, 0);
    for (std::uint64_t i = 0; i < num_events; ++i) {
        const double phase = rng.uniform(0.0, tdl.clock_period);
        const ThermometerSample sample = acquire(tdl, phase, acq, rng);
        ++h.counts[static_cast<std::size_t>(encode_ones_count(sample).code)];
    }
    h.total_events = num_events;
    return h;
}

CodeHistogram run_code_density_sharded(const TapDelayLine& tdl,
                                       const AcquisitionConfig& acq,
                                       std::uint64_t num_events,
                                       std::uint64_t seed, int threads) {
    if (threads < 1) threads = 1;
    // Fixed shard layout: shard s always simulates the same events with the
    // same stream regardless of which worker picks it up, and the merge below
    // runs in shard order, so the result is schedule-independent.
    const std::uint64_t base = num_events / kDensityShards;
    const std::uint64_t rem = num_events % kDensityShards;

    std::vector<CodeHistogram> parts(kDensityShards);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int s = next.fetch_add(1);
            if (s >= kDensityShards) return;
            Rng rng = Rng::stream(seed, {kStreamDensity,
                                         static_cast<std::uint64_t>(s)});
            const std::uint64_t events =
                base + (static_cast<std::uint64_t>(s) < rem ? 1 : 0);
            parts[static_cast<std::size_t>(s)] =
                run_code_density(tdl, acq, events, rng);
        }
    };

    std::vector<std::thread> pool;
    const int workers = std::min(threads, kDensityShards);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    CodeHistogram merged;
    merged.counts.assign(tdl.boundaries.size() + 1, 0);
    for (const CodeHistogram& part : parts) {
        for (std::size_t k = 0; k < part.counts.size(); ++k)
            merged.counts[k] += part.counts[k];
        merged.total_events += part.total_events;
    }
    return merged;
}

CalibrationTable derive_table(const CodeHistogram& histogram,
                              double clock_period_ps) {
    if (histogram.counts.empty())
        throw std::invalid_argument("derive_table: empty histogram");
    if (!(clock_period_ps > 0.0))
        throw std::invalid_argument("derive_table: clock_period must be > 0");
    const std::uint64_t total =
        std::accumulate(histogram.counts.begin(), histogram.counts.end(), 0ull);
    if (total == 0)
        throw std::invalid_argument("derive_table: histogram has no events");

    const std::size_t n = histogram.counts.size();
    int populated = 0;
    for (std::uint64_t c : histogram.counts)
        if (c > 0) ++populated;

    CalibrationTable t;
    t.version = kTableVersion;
    t.clock_period_ps = clock_period_ps;
    t.counts = histogram.counts;
    t.lsb_ps = clock_period_ps / populated;
    t.bin_widths_ps.resize(n);
    t.bin_centers_ps.resize(n);
    t.dnl.resize(n);
    t.inl.resize(n);

    double left_edge = 0.0;
    double running_dnl = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double width = clock_period_ps *
                             static_cast<double>(histogram.counts[k]) /
                             static_cast<double>(total);
        t.bin_widths_ps[k] = width;
        if (histogram.counts[k] > 0) {
            t.bin_centers_ps[k] = left_edge + width / 2.0;
            t.dnl[k] = width / t.lsb_ps - 1.0;
        } else {
            // Dead code: nothing to measure, report the edge and a flat DNL
            // so the identities over populated codes are undisturbed.
            t.bin_centers_ps[k] = left_edge;
            t.dnl[k] = 0.0;
        }
        running_dnl += t.dnl[k];
        t.inl[k] = running_dnl;
        left_edge += width;
    }
    return t;
}

double code_to_time(const CalibrationTable& table, int code) {
    if (code < 0 || static_cast<std::size_t>(code) >= table.counts.size())
        throw std::out_of_range("code_to_time: code outside table");
    if (table.counts[static_cast<std::size_t>(code)] == 0)
        throw std::out_of_range("code_to_time: unpopulated code");
    return table.bin_centers_ps[static_cast<std::size_t>(code)];
}

namespace {

// Finds the strongest periodicity in the populated-code DNL sequence by
// epoch folding: for each candidate period p, fold the mean-removed sequence
// into p phase classes and score the best class by |class mean| * sqrt(class
// size) (a z-like statistic under white noise). A real period concentrates
// its full deviation in one class at exactly p, while at multiples of p the
// same deviation is split over fewer samples; white noise scores O(1)
// everywhere. Returns 0 when the sequence is too short or has no variance.
int dominant_dnl_period(const std::vector<double>& dnl) {
    const int n = static_cast<int>(dnl.size());
    if (n < 6) return 0;

    double mean = 0.0;
    for (double v : dnl) mean += v;
    mean /= n;
    std::vector<double> x(dnl.size());
    double spread = 0.0;
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = dnl[static_cast<std::size_t>(i)] - mean;
        spread = std::max(spread, std::abs(x[static_cast<std::size_t>(i)]));
    }
    if (spread < 1e-12) return 0;

    int best_period = 0;
    double best_score = 0.0;
    std::vector<double> class_sum;
    std::vector<int> class_count;
    for (int p = 2; p <= n / 3; ++p) {
        class_sum.assign(static_cast<std::size_t>(p), 0.0);
        class_count.assign(static_cast<std::size_t>(p), 0);
        for (int i = 0; i < n; ++i) {
            class_sum[static_cast<std::size_t>(i % p)] += x[static_cast<std::size_t>(i)];
            ++class_count[static_cast<std::size_t>(i % p)];
        }
        double score = 0.0;
        for (int phi = 0; phi < p; ++phi) {
            const double m = class_sum[static_cast<std::size_t>(phi)] /
                             class_count[static_cast<std::size_t>(phi)];
            score = std::max(score, std::abs(m) * std::sqrt(double(
                                        class_count[static_cast<std::size_t>(phi)])));
        }
        if (score > best_score * (1.0 + 1e-9)) {
            best_score = score;
            best_period = p;
        }
    }
    return best_period;
}

}  // namespace

TableStats table_stats(const CalibrationTable& table) {
    TableStats s;
    double width_sum = 0.0;
    std::vector<double> populated_dnl;
    populated_dnl.reserve(table.dnl.size());
    for (std::size_t k = 0; k < table.counts.size(); ++k) {
        if (table.counts[k] > 0) {
            ++s.populated_bins;
            width_sum += table.bin_widths_ps[k];
            populated_dnl.push_back(table.dnl[k]);
        }
        s.max_abs_dnl = std::max(s.max_abs_dnl, std::abs(table.dnl[k]));
        s.max_abs_inl = std::max(s.max_abs_inl, std::abs(table.inl[k]));
    }
    if (s.populated_bins > 0)
        s.mean_bin_width_ps = width_sum / s.populated_bins;
    s.dominant_period = dominant_dnl_period(populated_dnl);
    return s;
}

}  // namespace tdcsync
