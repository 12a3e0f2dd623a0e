#include "q2b/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "q2b/errors.hpp"

namespace q2b {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strips a trailing # comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        else if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

double parse_number(const std::string& s, int lineno) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(lineno) + ": not a number: '" + s + "'");
    }
    if (pos != s.size())
        throw ConfigError("line " + std::to_string(lineno) + ": trailing junk in number: '" +
                          s + "'");
    return v;
}

ConfigValue parse_value(const std::string& rhs, int lineno) {
    ConfigValue v;
    v.raw = rhs;
    if (rhs.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value");
    if (rhs.front() == '"') {
        if (rhs.size() < 2 || rhs.back() != '"')
            throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
        v.kind = ConfigValue::Kind::String;
        v.str = rhs.substr(1, rhs.size() - 2);
    } else if (rhs == "true" || rhs == "false") {
        v.kind = ConfigValue::Kind::Bool;
        v.flag = (rhs == "true");
    } else if (rhs.front() == '[') {
        if (rhs.back() != ']')
            throw ConfigError("line " + std::to_string(lineno) + ": unterminated array");
        v.kind = ConfigValue::Kind::List;
        std::string body = rhs.substr(1, rhs.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            v.list.push_back(parse_number(item, lineno));
        }
    } else {
        v.kind = ConfigValue::Kind::Number;
        v.num = parse_number(rhs, lineno);
    }
    return v;
}

} // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[')
            throw ConfigError("line " + std::to_string(lineno) +
                              ": sections are not supported; use flat keys");
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string rhs = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (cfg.values_.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "'");
        cfg.values_[key] = parse_value(rhs, lineno);
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

double Config::number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    if (it->second.kind != ConfigValue::Kind::Number)
        throw ConfigError("key '" + key + "' must be a number");
    return it->second.num;
}

double Config::number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::string Config::str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    if (it->second.kind != ConfigValue::Kind::String)
        throw ConfigError("key '" + key + "' must be a quoted string");
    return it->second.str;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
}

bool Config::boolean(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.kind != ConfigValue::Kind::Bool)
        throw ConfigError("key '" + key + "' must be true or false");
    return it->second.flag;
}

std::vector<double> Config::list(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    if (it->second.kind != ConfigValue::Kind::List)
        throw ConfigError("key '" + key + "' must be an array of numbers");
    return it->second.list;
}

std::vector<double> Config::list(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? list(key) : fallback;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace q2b
