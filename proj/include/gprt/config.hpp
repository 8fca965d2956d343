#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>

namespace gprt {

// Flat TOML reader: [section] headers, key = value pairs, # comments.
// Values are booleans, integers, floats, or quoted strings. Keys are
// addressed as "section.key" ("key" alone before any section header).
class Config {
public:
    using Value = std::variant<bool, std::int64_t, double, std::string>;

    static Config parse_file(const std::filesystem::path& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    bool get_bool(const std::string& key, bool fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    const std::map<std::string, Value>& entries() const { return values_; }

private:
    std::map<std::string, Value> values_;
};

}  // namespace gprt
