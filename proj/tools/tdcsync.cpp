#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdcsync/calibration.hpp"
#include "tdcsync/config.hpp"
#include "tdcsync/errors.hpp"
#include "tdcsync/montecarlo.hpp"
#include "tdcsync/phase_control.hpp"
#include "tdcsync/report_io.hpp"
#include "tdcsync/tdl.hpp"
#include "tdcsync/version.hpp"

namespace {

using namespace tdcsync;

// Writes one output file and remembers its digest for the manifest.
struct OutputSet {
    std::string dir;
    std::vector<ManifestEntry> entries;

    void emit(const std::string& name, const std::string& content) {
        write_file_atomic(dir + "/" + name, content);
        entries.push_back({name, fnv1a64_hex(content)});
    }
};

void finish(const OutputSet& outputs, const RunConfig& cfg) {
    write_manifest(outputs.dir, fnv1a64_hex(run_config_to_json(cfg)),
                   cfg.master_seed, outputs.entries);
}

int cmd_calibrate(const RunConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const TapDelayLine tdl = build_tdl(cfg.tdl);
    const CodeHistogram hist = run_code_density_sharded(
        tdl, cfg.acquisition, cfg.calibration_events, cfg.master_seed,
        cfg.threads);
    const CalibrationTable table = derive_table(hist, cfg.tdl.clock_period);
    const TableStats stats = table_stats(table);

    OutputSet outputs{out_dir, {}};
    outputs.emit("config.json", run_config_to_json(cfg));
    outputs.emit("table.json", table_to_json(table));
    outputs.emit("histogram.csv", histogram_csv(hist));
    nlohmann::json s;
    s["num_events"] = hist.total_events;
    s["populated_bins"] = stats.populated_bins;
    s["mean_bin_width_ps"] = stats.mean_bin_width_ps;
    s["lsb_ps"] = table.lsb_ps;
    s["max_abs_dnl"] = stats.max_abs_dnl;
    s["max_abs_inl"] = stats.max_abs_inl;
    s["dominant_period"] = stats.dominant_period;
    outputs.emit("stats.json", s.dump(2) + "\n");
    finish(outputs, cfg);

    std::printf("calibrated %d populated bins from %llu events\n",
                stats.populated_bins,
                static_cast<unsigned long long>(hist.total_events));
    std::printf("mean bin width %s ps (lsb %s ps)\n",
                format_double(stats.mean_bin_width_ps).c_str(),
                format_double(table.lsb_ps).c_str());
    std::printf("max |dnl| %s lsb, max |inl| %s lsb\n",
                format_double(stats.max_abs_dnl).c_str(),
                format_double(stats.max_abs_inl).c_str());
    std::printf("dominant dnl period %d codes\n", stats.dominant_period);
    std::printf("wrote %s\n", out_dir.c_str());
    return 0;
}

int cmd_sync(const RunConfig& cfg, const std::string& out_dir,
             bool auto_calibrate, bool with_baseline) {
    std::filesystem::create_directories(out_dir);
    const TapDelayLine tdl = build_tdl(cfg.tdl);

    OutputSet outputs{out_dir, {}};
    outputs.emit("config.json", run_config_to_json(cfg));

    CalibrationTable table;
    if (auto_calibrate) {
        const CodeHistogram hist = run_code_density_sharded(
            tdl, cfg.acquisition, cfg.calibration_events, cfg.master_seed,
            cfg.threads);
        table = derive_table(hist, cfg.tdl.clock_period);
        outputs.emit("table.json", table_to_json(table));
        outputs.emit("histogram.csv", histogram_csv(hist));
    } else if (!cfg.table_path.empty()) {
        table = load_table_json(cfg.table_path);
        const std::vector<std::string> problems = validate_table(table);
        if (!problems.empty()) {
            for (const std::string& p : problems)
                std::fprintf(stderr, "table check failed: %s\n", p.c_str());
            throw InvariantError("calibration table failed consistency checks");
        }
        if (table.clock_period_ps != cfg.tdl.clock_period)
            throw InvariantError(
                "calibration table clock period does not match the config");
    } else {
        throw ConfigError(
            "sync needs a calibration table: set table_path in the config or "
            "pass --auto-calibrate");
    }

    const SyncReport report =
        run_trials(tdl, table, cfg.acquisition, cfg.alignment, cfg.pi,
                   cfg.montecarlo, cfg.master_seed, cfg.threads);

    std::vector<double> residuals;
    residuals.reserve(report.records.size());
    for (const TrialRecord& r : report.records)
        residuals.push_back(r.residual_ps);

    outputs.emit("residuals.csv", residuals_csv(report.records));
    outputs.emit("align_results.csv", align_results_csv(report.records));
    outputs.emit("residual_histogram.csv",
                 residual_histogram_csv(residual_histogram(
                     residuals, cfg.histogram_bin_width_ps)));

    nlohmann::json s;
    s["num_trials"] = cfg.montecarlo.num_trials;
    s["num_channels"] = cfg.montecarlo.num_channels;
    s["target_skew_ps"] = cfg.alignment.target_skew_ps;
    s["tolerance_ps"] = cfg.alignment.tolerance_ps;
    s["convergence_rate"] = report.convergence_rate;
    s["rms_residual_ps"] = report.rms_residual_ps;
    s["max_abs_dev_ps"] = report.max_abs_dev_ps;
    s["mean_iterations"] = report.mean_iterations;
    if (with_baseline) {
        const BaselineComparison cmp = compare_methods(
            report, cfg.montecarlo.num_trials, cfg.master_seed);
        s["baseline"] = {
            {"baseline_rms_ps", cmp.baseline_rms_ps},
            {"tdc_rms_ps", cmp.tdc_rms_ps},
            {"improvement_factor", cmp.improvement_factor},
        };
        std::printf("baseline rms %s ps vs tdc rms %s ps (%sx better)\n",
                    format_double(cmp.baseline_rms_ps).c_str(),
                    format_double(cmp.tdc_rms_ps).c_str(),
                    format_double(cmp.improvement_factor).c_str());
    }
    outputs.emit("stats.json", s.dump(2) + "\n");
    finish(outputs, cfg);

    std::printf("%d trials x %d channels: %s%% converged\n",
                cfg.montecarlo.num_trials, cfg.montecarlo.num_channels - 1,
                format_double(report.convergence_rate * 100.0).c_str());
    std::printf("residual rms %s ps, max deviation %s ps\n",
                format_double(report.rms_residual_ps).c_str(),
                format_double(report.max_abs_dev_ps).c_str());
    std::printf("wrote %s\n", out_dir.c_str());
    return 0;
}

int cmd_inspect(const std::string& table_path) {
    const CalibrationTable table = load_table_json(table_path);
    const TableStats stats = table_stats(table);
    std::printf("codes %zu, populated %d\n", table.counts.size(),
                stats.populated_bins);
    std::printf("clock period %s ps, lsb %s ps\n",
                format_double(table.clock_period_ps).c_str(),
                format_double(table.lsb_ps).c_str());
    std::printf("max |dnl| %s lsb, max |inl| %s lsb\n",
                format_double(stats.max_abs_dnl).c_str(),
                format_double(stats.max_abs_inl).c_str());
    std::printf("dominant dnl period %d codes\n", stats.dominant_period);

    const std::vector<std::string> problems = validate_table(table);
    if (!problems.empty()) {
        for (const std::string& p : problems)
            std::fprintf(stderr, "table check failed: %s\n", p.c_str());
        return 2;
    }
    std::printf("table is consistent\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-line TDC simulator: code-density calibration and "
                 "closed-loop channel alignment"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string table_file;
    std::uint64_t seed = 0;
    int trials = 0;
    bool with_baseline = false;
    bool auto_calibrate = false;

    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "Run a code-density test and write the lookup table");
    calibrate->add_option("--config", config_path,
                          "Run config JSON (defaults apply when omitted)");
    calibrate->add_option("--out", out_dir, "Output directory")->required();
    CLI::Option* cal_seed =
        calibrate->add_option("--seed", seed, "Override master_seed");

    CLI::App* sync = app.add_subcommand(
        "sync", "Monte-Carlo power-up trials of closed-loop alignment");
    sync->add_option("--config", config_path,
                     "Run config JSON (defaults apply when omitted)");
    sync->add_option("--out", out_dir, "Output directory")->required();
    CLI::Option* sync_seed =
        sync->add_option("--seed", seed, "Override master_seed");
    CLI::Option* sync_trials =
        sync->add_option("--trials", trials, "Override montecarlo.num_trials");
    sync->add_flag("--baseline", with_baseline,
                   "Also report the uncalibrated fallback aligner");
    sync->add_flag("--auto-calibrate", auto_calibrate,
                   "Build the table in-process instead of loading table_path");

    CLI::App* inspect = app.add_subcommand(
        "inspect", "Validate a calibration table and print its stats");
    inspect->add_option("table", table_file, "Path to table.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (inspect->parsed()) return cmd_inspect(table_file);

        RunConfig cfg = config_path.empty() ? default_run_config()
                                            : load_run_config(config_path);
        if (cal_seed->count() > 0 || sync_seed->count() > 0)
            cfg.master_seed = seed;
        if (sync_trials->count() > 0) {
            cfg.montecarlo.num_trials = trials;
            validate_run_config(cfg);
        }
        if (calibrate->parsed()) return cmd_calibrate(cfg, out_dir);
        return cmd_sync(cfg, out_dir, auto_calibrate, with_baseline);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const InvariantError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
