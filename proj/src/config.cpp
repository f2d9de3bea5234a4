#include "monarch/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "monarch/types.hpp"

namespace monarch {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Config Config::parse(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    cfg.sections_[""];
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto fail = [&](const std::string& why) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + why);
        };
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                fail("malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail("expected key = value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            fail("empty key");
        }
        if (cfg.sections_[section].count(key)) {
            fail("duplicate key '" + key + "'");
        }
        cfg.sections_[section][key] = value;
        cfg.lines_[section + "." + key] = lineno;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

int Config::line_of(const std::string& section, const std::string& key) const {
    auto it = lines_.find(section + "." + key);
    return it == lines_.end() ? 0 : it->second;
}

void Config::bad_value(const std::string& section, const std::string& key,
                       const std::string& why) const {
    throw ConfigError(origin_ + ":" + std::to_string(line_of(section, key)) + ": [" + section +
                      "] " + key + ": " + why);
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) {
        return fallback;
    }
    auto kv = it->second.find(key);
    return kv == it->second.end() ? fallback : kv->second;
}

std::string Config::require(const std::string& section, const std::string& key) const {
    if (!has(section, key)) {
        throw ConfigError(origin_ + ": missing required key [" + section + "] " + key);
    }
    return get(section, key, "");
}

int64_t Config::get_int(const std::string& section, const std::string& key,
                        int64_t fallback) const {
    if (!has(section, key)) {
        return fallback;
    }
    const std::string v = get(section, key, "");
    int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        // Accept scientific notation for large integers, e.g. 1e8.
        try {
            size_t used = 0;
            const double d = std::stod(v, &used);
            if (used == v.size() && d == static_cast<double>(static_cast<int64_t>(d))) {
                return static_cast<int64_t>(d);
            }
        } catch (const std::exception&) {
        }
        bad_value(section, key, "expected an integer, got '" + v + "'");
    }
    return out;
}

uint64_t Config::get_uint(const std::string& section, const std::string& key,
                          uint64_t fallback) const {
    if (!has(section, key)) {
        return fallback;
    }
    const int64_t v = get_int(section, key, 0);
    if (v < 0) {
        bad_value(section, key, "expected a non-negative integer");
    }
    return static_cast<uint64_t>(v);
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    if (!has(section, key)) {
        return fallback;
    }
    const std::string v = get(section, key, "");
    try {
        size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) {
            bad_value(section, key, "trailing characters in '" + v + "'");
        }
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(section, key, "expected a number, got '" + v + "'");
    }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) {
        return fallback;
    }
    const std::string v = get(section, key, "");
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    bad_value(section, key, "expected a boolean, got '" + v + "'");
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

const std::map<std::string, std::string>& Config::section(const std::string& name) const {
    static const std::map<std::string, std::string> empty;
    auto it = sections_.find(name);
    return it == sections_.end() ? empty : it->second;
}

std::vector<std::string> Config::section_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : sections_) {
        out.push_back(name);
    }
    return out;
}

std::string Config::canonical() const {
    std::ostringstream os;
    for (const auto& [name, kv] : sections_) {
        if (kv.empty()) {
            continue;
        }
        os << '[' << name << "]\n";
        for (const auto& [k, v] : kv) {
            os << k << " = " << v << '\n';
        }
    }
    return os.str();
}

}  // namespace monarch
