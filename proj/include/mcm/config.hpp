#pragma once

// Minimal human-readable key-value configuration.
//
// Format: one `key = value` per line, `#` starts a comment, blank lines
// ignored. Keys are dotted paths (`noise.vacuum_lifetime_s`); an optional
// `[section]` line prefixes following keys with `section.`. Values are
// numbers, booleans, strings, or comma-separated numeric lists. Every
// physical quantity carries its unit in the key name.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcm {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
} // namespace detail

class Config {
  public:
    Config() = default;

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = detail::trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`, got `" + line + "`");
            std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        touched_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_number(const std::string& key, double fallback) const {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_number(key, it->second);
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        const double v = get_number(key, static_cast<double>(fallback));
        return static_cast<std::int64_t>(v);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "off" || v == "no" || v == "0") return false;
        throw ConfigError(diag(key, "expected a boolean, got `" + v + "`"));
    }

    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (item.empty()) continue;
            out.push_back(parse_number(key, item));
        }
        return out;
    }

    // Keys present in the file but never read by any consumer are reported
    // as structured diagnostics, one per offending key.
    void reject_unknown_keys() const {
        std::vector<std::string> unknown;
        for (const auto& [k, v] : values_)
            if (touched_.count(k) == 0) unknown.push_back(k);
        if (unknown.empty()) return;
        std::string msg = origin_ + ": unrecognized configuration key(s):";
        for (const auto& k : unknown) msg += "\n  - " + k;
        throw ConfigError(msg);
    }

  private:
    double parse_number(const std::string& key, const std::string& text) const {
        const char* begin = text.data();
        const char* end = begin + text.size();
        double out = 0.0;
        const auto res = std::from_chars(begin, end, out);
        if (res.ec != std::errc() || res.ptr != end)
            throw ConfigError(diag(key, "expected a number, got `" + text + "`"));
        return out;
    }

    std::string diag(const std::string& key, const std::string& msg) const {
        return origin_ + ": key `" + key + "`: " + msg;
    }

    std::string origin_ = "<defaults>";
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> touched_;
};

} // namespace mcm
