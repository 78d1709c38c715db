#include <sys/wait.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "tdcsync/report_io.hpp"

// End-to-end tests that drive the installed binary the way a user would:
// through its command line, checking exit codes and the files it writes.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.is_open());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

RunResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path out_file = scratch / "stdout.txt";
    const fs::path err_file = scratch / "stderr.txt";
    const std::string cmd = std::string(TDCSYNC_CLI) + " " + args + " > " +
                            out_file.string() + " 2> " + err_file.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(raw);
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

// Fresh scratch directory per test case so runs cannot see each other.
fs::path make_scratch(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("tdcsync_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small, fast run config used by most cases.
json small_config() {
    json cfg;
    cfg["calibration"]["num_events"] = 200000;
    cfg["montecarlo"]["num_trials"] = 12;
    cfg["montecarlo"]["num_channels"] = 3;
    cfg["threads"] = 2;
    return cfg;
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.is_open());
    out << j.dump(2) << "\n";
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("cli rejects a missing subcommand and honours --version") {
    const fs::path scratch = make_scratch("usage");
    CHECK(run_cli("", scratch).exit_code == 1);
    const RunResult version = run_cli("--version", scratch);
    CHECK(version.exit_code == 0);
    CHECK(version.out.find("1.0.0") != std::string::npos);
}

TEST_CASE("calibrate writes a self-consistent output set") {
    const fs::path scratch = make_scratch("calibrate");
    const fs::path cfg_path = scratch / "cfg.json";
    write_json(cfg_path, small_config());
    const fs::path out = scratch / "out";

    const RunResult r = run_cli(
        "calibrate --config " + cfg_path.string() + " --out " + out.string(),
        scratch);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("populated bins") != std::string::npos);

    // The table on disk must load and pass its own consistency checks.
    const tdcsync::CalibrationTable table =
        tdcsync::load_table_json((out / "table.json").string());
    CHECK(tdcsync::validate_table(table).empty());

    const std::string hist = slurp(out / "histogram.csv");
    CHECK(hist.rfind("code,count\n", 0) == 0);
    CHECK(count_lines(hist) == table.counts.size() + 1);

    const json stats = json::parse(slurp(out / "stats.json"));
    CHECK(stats.at("num_events").get<std::uint64_t>() == 200000);
    CHECK(stats.at("populated_bins").get<int>() > 100);
    CHECK(stats.at("mean_bin_width_ps").get<double>() ==
          doctest::Approx(40.7).epsilon(0.05));

    // Every file the manifest lists must hash to the digest it records.
    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("tool_version").get<std::string>() == "1.0.0");
    std::vector<std::string> listed;
    for (const json& entry : manifest.at("outputs")) {
        const std::string name = entry.at("path").get<std::string>();
        listed.push_back(name);
        CHECK(entry.at("digest").get<std::string>() ==
              tdcsync::fnv1a64_hex(slurp(out / name)));
    }
    for (const char* required :
         {"config.json", "table.json", "histogram.csv", "stats.json"}) {
        CAPTURE(required);
        CHECK(std::find(listed.begin(), listed.end(), required) !=
              listed.end());
    }
}

TEST_CASE("calibrate surfaces config problems as exit code 1") {
    const fs::path scratch = make_scratch("badcfg");
    const fs::path out = scratch / "out";

    json unknown = small_config();
    unknown["calibraton"] = json::object();  // misspelled section
    write_json(scratch / "unknown.json", unknown);
    const RunResult r1 =
        run_cli("calibrate --config " + (scratch / "unknown.json").string() +
                    " --out " + out.string(),
                scratch);
    CHECK(r1.exit_code == 1);
    CHECK(r1.err.find("calibraton") != std::string::npos);

    json short_line = small_config();
    short_line["tdl"]["num_taps"] = 157;  // nominal span < clock period
    write_json(scratch / "short.json", short_line);
    const RunResult r2 =
        run_cli("calibrate --config " + (scratch / "short.json").string() +
                    " --out " + out.string(),
                scratch);
    CHECK(r2.exit_code == 1);

    CHECK(run_cli("calibrate --config " + (scratch / "absent.json").string() +
                      " --out " + out.string(),
                  scratch)
              .exit_code == 1);
}

TEST_CASE("sync without any table source fails with exit code 1") {
    const fs::path scratch = make_scratch("notable");
    write_json(scratch / "cfg.json", small_config());
    const RunResult r =
        run_cli("sync --config " + (scratch / "cfg.json").string() +
                    " --out " + (scratch / "out").string(),
                scratch);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("--auto-calibrate") != std::string::npos);
}

TEST_CASE("sync runs end to end with --auto-calibrate") {
    const fs::path scratch = make_scratch("sync");
    write_json(scratch / "cfg.json", small_config());
    const fs::path out = scratch / "out";

    const RunResult r =
        run_cli("sync --config " + (scratch / "cfg.json").string() +
                    " --out " + out.string() + " --auto-calibrate --baseline",
                scratch);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("converged") != std::string::npos);
    CHECK(r.out.find("baseline rms") != std::string::npos);

    // 12 trials x 2 aligned channels plus the header line.
    const std::string residuals = slurp(out / "residuals.csv");
    CHECK(residuals.rfind("trial,channel,converged,residual_ps,iterations",
                          0) == 0);
    CHECK(count_lines(residuals) == 12 * 2 + 1);

    const std::string align = slurp(out / "align_results.csv");
    CHECK(align.rfind("trial,converged,iterations,residual_ps,pi_code", 0) ==
          0);

    const json stats = json::parse(slurp(out / "stats.json"));
    CHECK(stats.at("num_trials").get<int>() == 12);
    CHECK(stats.at("convergence_rate").get<double>() == 1.0);
    CHECK(stats.at("rms_residual_ps").get<double>() < 10.0);
    const json& baseline = stats.at("baseline");
    CHECK(baseline.at("improvement_factor").get<double>() > 1.0);

    // The histogram of residuals must cover every aligned channel once.
    const std::string hist = slurp(out / "residual_histogram.csv");
    CHECK(hist.rfind("bin_center_ps,count\n", 0) == 0);
    std::uint64_t total = 0;
    std::size_t pos = hist.find('\n') + 1;
    while (pos < hist.size()) {
        const std::size_t comma = hist.find(',', pos);
        const std::size_t eol = hist.find('\n', comma);
        total += std::stoull(hist.substr(comma + 1, eol - comma - 1));
        pos = eol + 1;
    }
    CHECK(total == 12 * 2);
}

TEST_CASE("sync loads a saved table and rejects a tampered one") {
    const fs::path scratch = make_scratch("tamper");
    write_json(scratch / "cfg.json", small_config());
    const fs::path cal_out = scratch / "cal";
    REQUIRE(run_cli("calibrate --config " + (scratch / "cfg.json").string() +
                        " --out " + cal_out.string(),
                    scratch)
                .exit_code == 0);

    json cfg = small_config();
    cfg["table_path"] = (cal_out / "table.json").string();
    write_json(scratch / "cfg_table.json", cfg);
    const RunResult ok =
        run_cli("sync --config " + (scratch / "cfg_table.json").string() +
                    " --out " + (scratch / "out_ok").string(),
                scratch);
    INFO(ok.err);
    CHECK(ok.exit_code == 0);

    // Flip one histogram count; the derived columns no longer match.
    tdcsync::CalibrationTable broken =
        tdcsync::load_table_json((cal_out / "table.json").string());
    broken.counts[broken.counts.size() / 2] += 1000;
    tdcsync::save_table_json(broken, (scratch / "broken.json").string());

    cfg["table_path"] = (scratch / "broken.json").string();
    write_json(scratch / "cfg_broken.json", cfg);
    const RunResult bad =
        run_cli("sync --config " + (scratch / "cfg_broken.json").string() +
                    " --out " + (scratch / "out_bad").string(),
                scratch);
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("table check failed") != std::string::npos);

    // A table built for a different clock must be refused too.
    json other_clock = small_config();
    other_clock["tdl"]["clock_period"] = 3200.0;
    other_clock["tdl"]["num_taps"] = 80;
    other_clock["table_path"] = (cal_out / "table.json").string();
    write_json(scratch / "cfg_clock.json", other_clock);
    const RunResult clock =
        run_cli("sync --config " + (scratch / "cfg_clock.json").string() +
                    " --out " + (scratch / "out_clock").string(),
                scratch);
    CHECK(clock.exit_code == 2);
}

TEST_CASE("inspect reports consistency through its exit code") {
    const fs::path scratch = make_scratch("inspect");
    write_json(scratch / "cfg.json", small_config());
    const fs::path cal_out = scratch / "cal";
    REQUIRE(run_cli("calibrate --config " + (scratch / "cfg.json").string() +
                        " --out " + cal_out.string(),
                    scratch)
                .exit_code == 0);

    const RunResult good =
        run_cli("inspect " + (cal_out / "table.json").string(), scratch);
    CHECK(good.exit_code == 0);
    CHECK(good.out.find("table is consistent") != std::string::npos);

    tdcsync::CalibrationTable broken =
        tdcsync::load_table_json((cal_out / "table.json").string());
    broken.lsb_ps *= 1.5;
    tdcsync::save_table_json(broken, (scratch / "broken.json").string());
    const RunResult bad =
        run_cli("inspect " + (scratch / "broken.json").string(), scratch);
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("table check failed") != std::string::npos);

    CHECK(run_cli("inspect " + (scratch / "missing.json").string(), scratch)
              .exit_code == 1);
}

TEST_CASE("seed overrides steer the run and repeat runs are byte-identical") {
    const fs::path scratch = make_scratch("seeds");
    write_json(scratch / "cfg.json", small_config());
    const std::string base =
        "calibrate --config " + (scratch / "cfg.json").string();

    for (const char* run : {"a", "b", "c"}) {
        const std::string seed = (std::string(run) == "c") ? "99" : "7";
        REQUIRE(run_cli(base + " --out " + (scratch / run).string() +
                            " --seed " + seed,
                        scratch)
                    .exit_code == 0);
    }
    CHECK(slurp(scratch / "a" / "histogram.csv") ==
          slurp(scratch / "b" / "histogram.csv"));
    CHECK(slurp(scratch / "a" / "table.json") ==
          slurp(scratch / "b" / "table.json"));
    CHECK(slurp(scratch / "a" / "stats.json") ==
          slurp(scratch / "b" / "stats.json"));
    CHECK(slurp(scratch / "a" / "histogram.csv") !=
          slurp(scratch / "c" / "histogram.csv"));
}

TEST_CASE("thread count never changes the results, only the wall time") {
    const fs::path scratch = make_scratch("threads");
    json cfg = small_config();
    cfg["threads"] = 1;
    write_json(scratch / "t1.json", cfg);
    cfg["threads"] = 4;
    write_json(scratch / "t4.json", cfg);

    for (const char* t : {"t1", "t4"}) {
        const std::string cfg_path = (scratch / (std::string(t) + ".json")).string();
        REQUIRE(run_cli("sync --config " + cfg_path + " --out " +
                            (scratch / t).string() + " --auto-calibrate",
                        scratch)
                    .exit_code == 0);
    }
    for (const char* name : {"table.json", "histogram.csv", "residuals.csv",
                             "align_results.csv", "residual_histogram.csv",
                             "stats.json"}) {
        CAPTURE(name);
        CHECK(slurp(scratch / "t1" / name) == slurp(scratch / "t4" / name));
    }
}

TEST_CASE("--trials overrides the config and is validated") {
    const fs::path scratch = make_scratch("trials");
    write_json(scratch / "cfg.json", small_config());
    const std::string base =
        "sync --config " + (scratch / "cfg.json").string() +
        " --auto-calibrate --out ";

    const RunResult r =
        run_cli(base + (scratch / "out5").string() + " --trials 5", scratch);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    const json stats = json::parse(slurp(scratch / "out5" / "stats.json"));
    CHECK(stats.at("num_trials").get<int>() == 5);
    CHECK(count_lines(slurp(scratch / "out5" / "residuals.csv")) == 5 * 2 + 1);

    CHECK(run_cli(base + (scratch / "out0").string() + " --trials 0", scratch)
              .exit_code == 1);
}
