#include "tdcsync/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tdcsync/version.hpp"

namespace tdcsync {

namespace {

using nlohmann::json;

std::string iso_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x00000100000001b3ull;
    }
    return hash;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, result.ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write file: " + tmp);
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string table_to_json(const CalibrationTable& table) {
    json j;
    j["version"] = table.version;
    j["clock_period_ps"] = table.clock_period_ps;
    j["counts"] = table.counts;
    j["bin_widths_ps"] = table.bin_widths_ps;
    j["bin_centers_ps"] = table.bin_centers_ps;
    j["lsb_ps"] = table.lsb_ps;
    j["dnl"] = table.dnl;
    j["inl"] = table.inl;
    return j.dump(2) + "\n";
}

void save_table_json(const CalibrationTable& table, const std::string& path) {
    write_file_atomic(path, table_to_json(table));
}

CalibrationTable load_table_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("table: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError("table: top level must be an object");

    static const char* kKeys[] = {"version",        "clock_period_ps",
                                  "counts",         "bin_widths_ps",
                                  "bin_centers_ps", "lsb_ps",
                                  "dnl",            "inl"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : kKeys)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("table: unknown key \"" + it.key() + "\"");
    }
    for (const char* key : kKeys)
        if (!j.contains(key))
            throw ConfigError(std::string("table: missing key \"") + key +
                              "\"");

    CalibrationTable t;
    try {
        t.version = j.at("version").get<int>();
        t.clock_period_ps = j.at("clock_period_ps").get<double>();
        t.counts = j.at("counts").get<std::vector<std::uint64_t>>();
        t.bin_widths_ps = j.at("bin_widths_ps").get<std::vector<double>>();
        t.bin_centers_ps = j.at("bin_centers_ps").get<std::vector<double>>();
        t.lsb_ps = j.at("lsb_ps").get<double>();
        t.dnl = j.at("dnl").get<std::vector<double>>();
        t.inl = j.at("inl").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError("table: " + std::string(e.what()));
    }

    if (t.version != kTableVersion)
        throw ConfigError("table: unsupported version " +
                          std::to_string(t.version));
    const std::size_t n = t.counts.size();
    if (n == 0) throw ConfigError("table: counts is empty");
    if (t.bin_widths_ps.size() != n || t.bin_centers_ps.size() != n ||
        t.dnl.size() != n || t.inl.size() != n)
        throw ConfigError("table: array lengths do not match counts");
    if (!(t.clock_period_ps > 0.0))
        throw ConfigError("table: clock_period_ps must be > 0");
    return t;
}

std::vector<std::string> validate_table(const CalibrationTable& table) {
    std::vector<std::string> problems;
    const std::size_t n = table.counts.size();
    if (n == 0) {
        problems.push_back("table has no codes");
        return problems;
    }
    std::uint64_t total = 0;
    int populated = 0;
    for (std::uint64_t c : table.counts) {
        total += c;
        if (c > 0) ++populated;
    }
    if (total == 0) {
        problems.push_back("histogram counts are all zero");
        return problems;
    }

    const double tol = 1e-9 * std::max(1.0, table.clock_period_ps);
    const double expected_lsb = table.clock_period_ps / populated;
    if (std::abs(table.lsb_ps - expected_lsb) > tol)
        problems.push_back("lsb_ps does not equal clock_period / populated bins");

    double widths_sum = 0.0;
    double left_edge = 0.0;
    double running_dnl = 0.0;
    bool width_bad = false, center_bad = false, dnl_bad = false,
         inl_bad = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double width = table.clock_period_ps *
                             static_cast<double>(table.counts[k]) /
                             static_cast<double>(total);
        if (!width_bad && std::abs(table.bin_widths_ps[k] - width) > tol) {
            problems.push_back("bin_widths_ps[" + std::to_string(k) +
                               "] does not re-derive from counts");
            width_bad = true;
        }
        const double center =
            table.counts[k] > 0 ? left_edge + width / 2.0 : left_edge;
        if (!center_bad && std::abs(table.bin_centers_ps[k] - center) > tol) {
            problems.push_back("bin_centers_ps[" + std::to_string(k) +
                               "] does not re-derive from counts");
            center_bad = true;
        }
        const double dnl =
            table.counts[k] > 0 ? width / expected_lsb - 1.0 : 0.0;
        if (!dnl_bad && std::abs(table.dnl[k] - dnl) > 1e-9) {
            problems.push_back("dnl[" + std::to_string(k) +
                               "] does not re-derive from counts");
            dnl_bad = true;
        }
        running_dnl += table.dnl[k];
        if (!inl_bad && std::abs(table.inl[k] - running_dnl) > 1e-9) {
            problems.push_back("inl[" + std::to_string(k) +
                               "] is not the running sum of dnl");
            inl_bad = true;
        }
        widths_sum += table.bin_widths_ps[k];
        left_edge += width;
    }
    if (std::abs(widths_sum - table.clock_period_ps) >
        1e-6 * table.clock_period_ps)
        problems.push_back("bin widths do not tile the clock period");
    return problems;
}

std::string histogram_csv(const CodeHistogram& histogram) {
    std::string out = "code,count\n";
    for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += std::to_string(histogram.counts[k]);
        out += '\n';
    }
    return out;
}

std::string residuals_csv(const std::vector<TrialRecord>& records) {
    std::string out = "trial,channel,converged,residual_ps,iterations\n";
    for (const TrialRecord& r : records) {
        out += std::to_string(r.trial);
        out += ',';
        out += std::to_string(r.channel);
        out += ',';
        out += r.converged ? '1' : '0';
        out += ',';
        out += format_double(r.residual_ps);
        out += ',';
        out += std::to_string(r.iterations);
        out += '\n';
    }
    return out;
}

std::string align_results_csv(const std::vector<TrialRecord>& records) {
    std::string out = "trial,converged,iterations,residual_ps,pi_code\n";
    for (const TrialRecord& r : records) {
        out += std::to_string(r.trial);
        out += ',';
        out += r.converged ? '1' : '0';
        out += ',';
        out += std::to_string(r.iterations);
        out += ',';
        out += format_double(r.residual_ps);
        out += ',';
        out += std::to_string(r.pi_code);
        out += '\n';
    }
    return out;
}

std::string residual_histogram_csv(
    const std::vector<std::pair<double, std::uint64_t>>& bins) {
    std::string out = "bin_center_ps,count\n";
    for (const auto& [center, count] : bins) {
        out += format_double(center);
        out += ',';
        out += std::to_string(count);
        out += '\n';
    }
    return out;
}

void write_manifest(const std::string& dir, const std::string& config_digest,
                    std::uint64_t master_seed,
                    const std::vector<ManifestEntry>& outputs) {
    json m;
    m["config_digest"] = config_digest;
    m["created_utc"] = iso_utc_now();
    m["master_seed"] = master_seed;
    m["tool_version"] = kToolVersion;
    json inventory = json::array();
    for (const ManifestEntry& entry : outputs)
        inventory.push_back({{"path", entry.path}, {"digest", entry.digest}});
    m["outputs"] = inventory;
    write_file_atomic(dir + "/manifest.json", m.dump(2) + "\n");
}

}  // namespace tdcsync
