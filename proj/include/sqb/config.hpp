#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sqb/common.hpp"

namespace sqb {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Flat key-value run configuration: `key = value` lines, '#' comments.
// Insertion order is preserved so a parse/serialize round trip is lossless.
class Config {
public:
    Config() = default;

    static Config parse(std::istream& is) {
        Config cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            std::string trimmed = trim(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected key = value");
            cfg.set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("config: cannot open " + path);
        return parse(is);
    }

    void set(const std::string& key, const std::string& value) {
        auto it = index_.find(key);
        if (it == index_.end()) {
            index_[key] = entries_.size();
            entries_.emplace_back(key, value);
        } else {
            entries_[it->second].second = value;
        }
    }

    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set(const std::string& key, long value) { set(key, std::to_string(value)); }

    bool has(const std::string& key) const { return index_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = index_.find(key);
        return it == index_.end() ? fallback : entries_[it->second].second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = index_.find(key);
        if (it == index_.end()) return fallback;
        const std::string& raw = entries_[it->second].second;
        std::size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size())
            throw std::runtime_error("config: bad number for " + key + ": " + raw);
        return v;
    }

    long get_long(const std::string& key, long fallback) const {
        auto it = index_.find(key);
        if (it == index_.end()) return fallback;
        const std::string& raw = entries_[it->second].second;
        std::size_t pos = 0;
        long v = std::stol(raw, &pos);
        if (pos != raw.size())
            throw std::runtime_error("config: bad integer for " + key + ": " + raw);
        return v;
    }

    std::string serialize() const {
        std::ostringstream os;
        for (const auto& [key, value] : entries_) os << key << " = " << value << "\n";
        return os.str();
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        std::size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }

    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace sqb
