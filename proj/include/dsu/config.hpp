#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dsu/error.hpp"

namespace dsu {

// Line-oriented `key = value` configuration with `#` comments. Keys keep
// insertion order so parse -> emit is idempotent.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);
    std::string emit() const;

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    std::int64_t get_int(const std::string& key, std::int64_t def) const;
    bool get_bool(const std::string& key, bool def) const;

    // Rejects keys outside the known set; the error names the offender.
    void validate_keys(const std::vector<std::string>& known) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Every key the pipeline understands, with its desk-scale default.
std::vector<std::pair<std::string, std::string>> default_config_keys();

} // namespace dsu
