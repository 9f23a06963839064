#pragma once

// Delimited-table output and the run log. All numbers are rendered with
// std::to_chars (shortest round-trip form), so a log is a pure function of
// the numbers in it and replays byte-identically for a given config + seed.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcm {

inline std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != columns.size())
            throw std::invalid_argument("table `" + name + "`: row width mismatch");
        rows.push_back(std::move(row));
    }

    std::string to_tsv() const {
        std::string out;
        for (std::size_t i = 0; i < columns.size(); ++i)
            out += (i ? "\t" : "") + columns[i];
        out += "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "\t" : "") + row[i];
            out += "\n";
        }
        return out;
    }
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string details;
    bool gating = true; // gating checks drive the --check exit code
};

struct RunLog {
    std::string scenario;
    std::uint64_t seed = 0;
    long trials = 0;
    int failed_trials = 0;
    std::vector<std::string> trial_errors;
    std::vector<Table> tables;
    std::vector<CheckResult> checks;
    std::vector<std::pair<std::string, std::string>> summary; // key, rendered value

    Table& table(const std::string& name) {
        for (auto& t : tables)
            if (t.name == name) return t;
        throw std::invalid_argument("no table named " + name);
    }

    void add_summary(const std::string& key, double value) { summary.push_back({key, fmt(value)}); }
    void add_summary(const std::string& key, const std::string& value) { summary.push_back({key, value}); }

    bool all_checks_pass() const {
        for (const auto& c : checks)
            if (c.gating && !c.pass) return false;
        return true;
    }

    // Full deterministic dump; the replay contract is byte identity of this.
    std::string to_text() const {
        std::string out = "scenario\t" + scenario + "\nseed\t" + std::to_string(seed) +
                          "\ntrials\t" + std::to_string(trials) +
                          "\nfailed_trials\t" + std::to_string(failed_trials) + "\n";
        for (const auto& e : trial_errors) out += "trial_error\t" + e + "\n";
        for (const auto& [k, v] : summary) out += "summary\t" + k + "\t" + v + "\n";
        for (const auto& t : tables) {
            out += "\n# table " + t.name + "\n";
            out += t.to_tsv();
        }
        for (const auto& c : checks)
            out += std::string("check\t") + (c.pass ? "PASS" : "FAIL") + "\t" + c.name + "\t" +
                   c.details + "\n";
        return out;
    }

    void write_dir(const std::string& dir) const {
        namespace fs = std::filesystem;
        fs::create_directories(dir);
        for (const auto& t : tables) {
            std::ofstream out(fs::path(dir) / (t.name + ".tsv"), std::ios::binary);
            out << t.to_tsv();
        }
        std::ofstream summary_out(fs::path(dir) / "summary.txt", std::ios::binary);
        summary_out << to_text();
    }
};

} // namespace mcm
