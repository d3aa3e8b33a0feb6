#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace drq {

// Line-oriented `key = value` configuration with `#` comments and dotted
// keys. Values are parsed on demand; missing keys fall back to defaults or
// throw when no default is given.
class Config {
public:
    Config() = default;
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // comma-separated
    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace drq
