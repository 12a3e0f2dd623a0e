#pragma once

#include <map>
#include <string>
#include <vector>

namespace q2b {

// Flat key = value run configuration (TOML-compatible subset: numbers, quoted
// strings, booleans, arrays of numbers, # comments). Section headers are
// rejected: every key lives at top level so the manifest echo is one map.
struct ConfigValue {
    enum class Kind { Number, String, Bool, List } kind = Kind::Number;
    double num = 0.0;
    std::string str;
    bool flag = false;
    std::vector<double> list;
    std::string raw;  // original right-hand side, echoed into the manifest
};

class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Typed access; the non-defaulted forms throw ConfigError when the key is
    // missing or has the wrong type.
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::string str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::vector<double> list(const std::string& key) const;
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const;

    const std::map<std::string, ConfigValue>& entries() const { return values_; }

  private:
    std::map<std::string, ConfigValue> values_;
};

// 17-significant-digit serialization used by every CSV artifact, so reruns
// diff bitwise.
std::string csv_num(double v);

} // namespace q2b
