#include "dsu/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dsu {

namespace {
std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

Config Config::parse_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        cfg.set(key, value);
    }
    return cfg;
}

std::string Config::emit() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

bool Config::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == key; });
}

void Config::set(const std::string& key, const std::string& value) {
    for (auto& e : entries_)
        if (e.first == key) {
            e.second = value;
            return;
        }
    entries_.emplace_back(key, value);
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
    for (const auto& e : entries_)
        if (e.first == key) return e.second;
    return def;
}

double Config::get_double(const std::string& key, double def) const {
    const std::string s = get_string(key, "");
    if (s.empty()) return def;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("config key " + key + ": not a number: " + s);
    }
}

std::int64_t Config::get_int(const std::string& key, std::int64_t def) const {
    const std::string s = get_string(key, "");
    if (s.empty()) return def;
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("config key " + key + ": not an integer: " + s);
    }
}

bool Config::get_bool(const std::string& key, bool def) const {
    const std::string s = get_string(key, "");
    if (s.empty()) return def;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw UsageError("config key " + key + ": not a boolean: " + s);
}

void Config::validate_keys(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : entries_) {
        (void)v;
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw UsageError("unknown config key: " + k);
    }
}

std::vector<std::pair<std::string, std::string>> default_config_keys() {
    return {
        {"size", "64"},            // training/DLU resolution (square, multiple of 4)
        {"channels", "16"},        // trunk feature width
        {"tau", "3"},              // epochs per step; a round is 2*tau epochs
        {"rounds", "4"},
        {"batch", "4"},            // full-scale default is 10; desk preset overrides to 4
        {"lr", "4e-3"},            // desk preset; 1e-4 is the full-scale value, far too
                                   // small for 72 optimizer steps per round

        {"seed", "42"},
        {"ats", "true"},           // attentive re-weighting in step two
        {"dlu", "true"},           // label update at round end
        {"flip", "true"},          // horizontal-flip augmentation
        {"ha.size", "6"},          // nominal full-scale values are 32 and 4
        {"ha.sigma", "0.75"},
        {"lambda", "0.02"},
        {"consistency", "l1"},     // or l2
        {"crf.w_app", "4"},
        {"crf.theta_alpha", "8"},
        {"crf.theta_beta", "0.1"},
        {"crf.w_smooth", "3"},
        {"crf.theta_gamma", "3"},
        {"crf.iterations", "5"},
        {"crf.binarize", "false"},
        {"crf.window", "0"},
        {"depth.invert", "false"},
        {"init.crf", "false"},     // CRF-filter supplied labels before round 1
        {"synth.count", "60"},
        {"synth.train_frac", "0.8"},
        {"synth.objects_min", "1"},
        {"synth.objects_max", "3"},
        {"synth.depth_sep", "0.6"},
        {"synth.corruption_mae", "0.15"},
    };
}

} // namespace dsu
