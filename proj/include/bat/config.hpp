#pragma once

#include <map>
#include <string>

namespace bat {

// Flat key=value configuration. '#' starts a comment, blank lines are
// skipped, later assignments win. Typed getters throw ConfigError on a
// malformed value or on a missing key when no default is supplied.
class Config {
public:
    static Config load(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    // Applies a "key=value" override as passed on a command line.
    void set_entry(const std::string& entry);

    bool has(const std::string& key) const;

    std::string get_str(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    std::string to_string() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace bat
