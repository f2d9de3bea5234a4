#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace monarch {

/// Sectioned key=value configuration:
///
///   # comment
///   [section]
///   key = value
///
/// Keys before the first section header live in section "". Parse errors
/// report the 1-based line number.
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<config>");
    static Config load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string require(const std::string& section, const std::string& key) const;
    int64_t get_int(const std::string& section, const std::string& key, int64_t fallback) const;
    uint64_t get_uint(const std::string& section, const std::string& key, uint64_t fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& section(const std::string& name) const;
    std::vector<std::string> section_names() const;

    /// Canonical text: sections and keys in sorted order.
    std::string canonical() const;

    const std::string& origin() const { return origin_; }

private:
    int line_of(const std::string& section, const std::string& key) const;
    [[noreturn]] void bad_value(const std::string& section, const std::string& key,
                                const std::string& why) const;

    std::string origin_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::map<std::string, int> lines_;  // "section.key" -> line
};

/// Comma-separated list helper for sweep axes.
std::vector<std::string> split_list(const std::string& s);

std::string trim(const std::string& s);

/// FNV-1a over the bytes of `s`.
uint64_t fnv1a64(const std::string& s);

}  // namespace monarch
