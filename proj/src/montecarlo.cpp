#include "tdcsync/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "tdcsync/calibration.hpp"
#include "tdcsync/numeric_util.hpp"

namespace tdcsync {

std::vector<TrialRecord> run_single_trial(int trial, const TapDelayLine& tdl,
                                          const CalibrationTable& table,
                                          const AcquisitionConfig& acq,
                                          const AlignParams& params,
                                          const PhaseInterpolatorState& pi,
                                          int num_channels,
                                          std::uint64_t master_seed) {
    std::vector<TrialRecord> records;
    records.reserve(static_cast<std::size_t>(num_channels - 1));
    for (int channel = 1; channel < num_channels; ++channel) {
        Rng rng = Rng::stream(master_seed,
                              {kStreamTrial, static_cast<std::uint64_t>(trial),
                               static_cast<std::uint64_t>(channel)});
        ChannelModel ch;
        ch.clock_period_ps = tdl.clock_period;
        ch.pi = pi;
        ch.true_skew_ps = rng.uniform(0.0, tdl.clock_period);

        const AlignResult result =
            align_channel(ch, tdl, table, acq, params, rng);

        TrialRecord rec;
        rec.trial = trial;
        rec.channel = channel;
        rec.converged = result.converged;
        // Residual is model truth (actual phase vs target), not the
        // controller's estimate: this is what the scope would show.
        rec.residual_ps = wrap_half(
            ch.effective_skew() - params.target_skew_ps, tdl.clock_period);
        rec.iterations = result.iterations;
        rec.pi_code = result.final_pi_code;
        records.push_back(rec);
    }
    return records;
}

SyncReport finalize_report(std::vector<TrialRecord> records) {
    SyncReport report;
    report.records = std::move(records);
    if (report.records.empty()) return report;

    std::vector<double> residuals;
    residuals.reserve(report.records.size());
    std::uint64_t converged = 0;
    std::uint64_t converged_iters = 0;
    for (const TrialRecord& r : report.records) {
        residuals.push_back(r.residual_ps);
        if (r.converged) {
            ++converged;
            converged_iters += static_cast<std::uint64_t>(r.iterations);
        }
    }
    report.rms_residual_ps = rms_about_mean(residuals);
    report.max_abs_dev_ps = max_abs_dev(residuals);
    report.convergence_rate = static_cast<double>(converged) /
                              static_cast<double>(report.records.size());
    if (converged > 0)
        report.mean_iterations = static_cast<double>(converged_iters) /
                                 static_cast<double>(converged);
    return report;
}

SyncReport run_trials(const TapDelayLine& tdl, const CalibrationTable& table,
                      const AcquisitionConfig& acq, const AlignParams& params,
                      const PhaseInterpolatorState& pi, const McConfig& mc,
                      std::uint64_t master_seed, int threads) {
    if (threads < 1) threads = 1;
    const int slaves = mc.num_channels - 1;
    std::vector<TrialRecord> records(
        static_cast<std::size_t>(mc.num_trials) *
        static_cast<std::size_t>(slaves));

    // Each trial writes its preassigned slots; the output order is fixed by
    // construction, so the schedule cannot leak into the results.
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int trial = next.fetch_add(1);
            if (trial >= mc.num_trials) return;
            std::vector<TrialRecord> part = run_single_trial(
                trial, tdl, table, acq, params, pi, mc.num_channels,
                master_seed);
            std::copy(part.begin(), part.end(),
                      records.begin() +
                          static_cast<std::ptrdiff_t>(trial) * slaves);
        }
    };

    std::vector<std::thread> pool;
    const int workers = std::min(threads, mc.num_trials);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    return finalize_report(std::move(records));
}

BaselineComparison compare_methods(const SyncReport& tdc_report, int num_draws,
                                   std::uint64_t master_seed) {
    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(num_draws));
    for (int i = 0; i < num_draws; ++i) {
        Rng rng = Rng::stream(master_seed,
                              {kStreamBaseline, static_cast<std::uint64_t>(i)});
        draws.push_back(self_align_baseline(rng));
    }
    BaselineComparison cmp;
    cmp.baseline_rms_ps = rms_about_mean(draws);
    cmp.tdc_rms_ps = tdc_report.rms_residual_ps;
    if (cmp.tdc_rms_ps > 0.0)
        cmp.improvement_factor = cmp.baseline_rms_ps / cmp.tdc_rms_ps;
    return cmp;
}

std::vector<std::pair<double, std::uint64_t>> residual_histogram(
    const std::vector<double>& residuals, double bin_width_ps) {
    std::vector<std::pair<double, std::uint64_t>> out;
    if (residuals.empty() || !(bin_width_ps > 0.0)) return out;
    const double center = mean(residuals);
    std::map<long long, std::uint64_t> bins;
    for (double r : residuals)
        ++bins[std::llround((r - center) / bin_width_ps)];
    out.reserve(bins.size());
    for (const auto& [index, count] : bins)
        out.emplace_back(center + static_cast<double>(index) * bin_width_ps,
                         count);
    return out;
}

}  // namespace tdcsync
