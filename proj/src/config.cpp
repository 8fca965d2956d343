#include "gprt/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "gprt/errors.hpp"

namespace gprt {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

Config::Value parse_value(const std::string& raw, int line_no) {
    if (raw.empty()) throw InvalidInput("config: empty value at line " + std::to_string(line_no));
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"')
            throw InvalidInput("config: unterminated string at line " + std::to_string(line_no));
        return raw.substr(1, raw.size() - 2);
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    bool looks_float = raw.find_first_of(".eE") != std::string::npos &&
                       raw.find_first_not_of("+-0123456789.eE") == std::string::npos;
    try {
        size_t used = 0;
        if (!looks_float) {
            std::int64_t v = std::stoll(raw, &used);
            if (used == raw.size()) return v;
        }
        double d = std::stod(raw, &used);
        if (used == raw.size()) return d;
    } catch (const std::exception&) {
        // handled below
    }
    throw InvalidInput("config: cannot parse value '" + raw + "' at line " +
                       std::to_string(line_no));
}

}  // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InvalidInput("config: bad section at line " + std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw InvalidInput("config: empty section at line " + std::to_string(line_no));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config: expected key = value at line " + std::to_string(line_no));
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw InvalidInput("config: empty key at line " + std::to_string(line_no));
        std::string full = section.empty() ? key : section + "." + key;
        cfg.values_[full] = parse_value(trim(line.substr(eq + 1)), line_no);
    }
    return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("config: cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_string(ss.str());
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const bool* v = std::get_if<bool>(&it->second)) return *v;
    throw InvalidInput("config: '" + key + "' is not a boolean");
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const std::int64_t* v = std::get_if<std::int64_t>(&it->second)) return *v;
    throw InvalidInput("config: '" + key + "' is not an integer");
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const double* v = std::get_if<double>(&it->second)) return *v;
    if (const std::int64_t* v = std::get_if<std::int64_t>(&it->second)) return double(*v);
    throw InvalidInput("config: '" + key + "' is not a number");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
    throw InvalidInput("config: '" + key + "' is not a string");
}

}  // namespace gprt
