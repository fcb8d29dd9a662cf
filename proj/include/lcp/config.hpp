#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lcp/critical_values.hpp"
#include "lcp/distributions.hpp"
#include "lcp/errors.hpp"
#include "lcp/scheme.hpp"

namespace lcp {

/// Every tunable knob of the command line tool in one flat value type.
/// Fields are registered once in config_detail::fields(); parsing,
/// overrides, serialization and fingerprinting all run off that registry,
/// so a knob cannot be readable but not writable or vice versa.
struct RunConfig {
    std::uint64_t seed = 12345;
    std::string scheme = "reference";  // "reference", "geometric", or explicit lengths
    std::int64_t scheme_n0 = 5;
    double scheme_growth = 1.25;
    int scheme_kmax = 12;
    double r = 0.5;
    double alpha = 0.2;
    std::int64_t replicates = 20000;
    double z_grid_step = 0.05;
    double cap_a0 = 1.0;
    double theta_floor = 1e-12;
    int threads = 1;
    std::string horizons = "1,5,10";
    std::string levels = "0.01,0.05";
    std::string law = "gaussian";
    std::int64_t window = 250;
    std::int64_t presample = 500;
    std::int64_t garch_window = 1000;
    std::int64_t garch_refit = 10;
    std::int64_t min_pool = 100;

    [[nodiscard]] IntervalScheme make_scheme() const {
        if (scheme == "reference") {
            return IntervalScheme::reference();
        }
        if (scheme == "geometric") {
            return IntervalScheme::geometric(scheme_n0, scheme_growth, scheme_kmax);
        }
        std::vector<std::int64_t> lengths;
        std::stringstream ss(scheme);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            lengths.push_back(detail::parse_int_strict(tok, "scheme"));
        }
        return IntervalScheme::from_lengths(lengths);
    }

    [[nodiscard]] std::vector<std::int64_t> horizon_list() const {
        std::vector<std::int64_t> out;
        std::stringstream ss(horizons);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const std::int64_t h = detail::parse_int_strict(tok, "horizons");
            if (h < 1) {
                throw ConfigError("horizon must be at least 1, got " + tok);
            }
            out.push_back(h);
        }
        if (out.empty()) {
            throw ConfigError("horizons list is empty");
        }
        return out;
    }

    [[nodiscard]] std::vector<InnovationLaw> law_list() const {
        std::vector<InnovationLaw> out;
        std::stringstream ss(law);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                out.push_back(law_from_string(tok));
            } catch (const Error& e) {
                throw ConfigError(e.what());
            }
        }
        if (out.empty()) {
            throw ConfigError("law list is empty");
        }
        return out;
    }

    [[nodiscard]] std::vector<double> level_list() const {
        std::vector<double> out;
        std::stringstream ss(levels);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const double p = detail::parse_double_strict(tok, "levels");
            if (!(p > 0.0) || !(p < 1.0)) {
                throw ConfigError("level must lie in (0, 1), got " + tok);
            }
            out.push_back(p);
        }
        if (out.empty()) {
            throw ConfigError("levels list is empty");
        }
        return out;
    }

    void validate() const {
        if (!(r > 0.0)) {
            throw ConfigError("r must be positive");
        }
        if (!(alpha > 0.0) || !(alpha < 1.0)) {
            throw ConfigError("alpha must lie in (0, 1)");
        }
        if (replicates < 1) {
            throw ConfigError("replicates must be positive");
        }
        if (!(z_grid_step > 0.0)) {
            throw ConfigError("z_grid_step must be positive");
        }
        if (!(cap_a0 > 0.0)) {
            throw ConfigError("cap_a0 must be positive");
        }
        if (!(theta_floor > 0.0)) {
            throw ConfigError("theta_floor must be positive");
        }
        if (threads < 1) {
            throw ConfigError("threads must be at least 1");
        }
        if (window < 1) {
            throw ConfigError("window must be at least 1");
        }
        if (presample < 0) {
            throw ConfigError("presample must be nonnegative");
        }
        if (garch_window < 2) {
            throw ConfigError("garch_window must be at least 2");
        }
        if (garch_refit < 1) {
            throw ConfigError("garch_refit must be at least 1");
        }
        if (min_pool < 2) {
            throw ConfigError("min_pool must be at least 2");
        }
        static_cast<void>(law_list());
        static_cast<void>(make_scheme());
        static_cast<void>(horizon_list());
        static_cast<void>(level_list());
    }
};

namespace config_detail {

struct Field {
    const char* name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<Field>& fields() {
    using detail::format_full;
    using detail::parse_double_strict;
    using detail::parse_int_strict;
    using detail::parse_uint_strict;
    static const std::vector<Field> f = {
        {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
         [](RunConfig& c, const std::string& v) { c.seed = parse_uint_strict(v, "seed"); }},
        {"scheme", [](const RunConfig& c) { return c.scheme; },
         [](RunConfig& c, const std::string& v) { c.scheme = v; }},
        {"scheme_n0", [](const RunConfig& c) { return std::to_string(c.scheme_n0); },
         [](RunConfig& c, const std::string& v) {
             c.scheme_n0 = parse_int_strict(v, "scheme_n0");
         }},
        {"scheme_growth", [](const RunConfig& c) { return format_full(c.scheme_growth); },
         [](RunConfig& c, const std::string& v) {
             c.scheme_growth = parse_double_strict(v, "scheme_growth");
         }},
        {"scheme_kmax", [](const RunConfig& c) { return std::to_string(c.scheme_kmax); },
         [](RunConfig& c, const std::string& v) {
             c.scheme_kmax = static_cast<int>(parse_int_strict(v, "scheme_kmax"));
         }},
        {"r", [](const RunConfig& c) { return format_full(c.r); },
         [](RunConfig& c, const std::string& v) { c.r = parse_double_strict(v, "r"); }},
        {"alpha", [](const RunConfig& c) { return format_full(c.alpha); },
         [](RunConfig& c, const std::string& v) { c.alpha = parse_double_strict(v, "alpha"); }},
        {"replicates", [](const RunConfig& c) { return std::to_string(c.replicates); },
         [](RunConfig& c, const std::string& v) {
             c.replicates = parse_int_strict(v, "replicates");
         }},
        {"z_grid_step", [](const RunConfig& c) { return format_full(c.z_grid_step); },
         [](RunConfig& c, const std::string& v) {
             c.z_grid_step = parse_double_strict(v, "z_grid_step");
         }},
        {"cap_a0", [](const RunConfig& c) { return format_full(c.cap_a0); },
         [](RunConfig& c, const std::string& v) { c.cap_a0 = parse_double_strict(v, "cap_a0"); }},
        {"theta_floor", [](const RunConfig& c) { return format_full(c.theta_floor); },
         [](RunConfig& c, const std::string& v) {
             c.theta_floor = parse_double_strict(v, "theta_floor");
         }},
        {"threads", [](const RunConfig& c) { return std::to_string(c.threads); },
         [](RunConfig& c, const std::string& v) {
             c.threads = static_cast<int>(parse_int_strict(v, "threads"));
         }},
        {"horizons", [](const RunConfig& c) { return c.horizons; },
         [](RunConfig& c, const std::string& v) { c.horizons = v; }},
        {"levels", [](const RunConfig& c) { return c.levels; },
         [](RunConfig& c, const std::string& v) { c.levels = v; }},
        {"law", [](const RunConfig& c) { return c.law; },
         [](RunConfig& c, const std::string& v) { c.law = v; }},
        {"window", [](const RunConfig& c) { return std::to_string(c.window); },
         [](RunConfig& c, const std::string& v) { c.window = parse_int_strict(v, "window"); }},
        {"presample", [](const RunConfig& c) { return std::to_string(c.presample); },
         [](RunConfig& c, const std::string& v) {
             c.presample = parse_int_strict(v, "presample");
         }},
        {"garch_window", [](const RunConfig& c) { return std::to_string(c.garch_window); },
         [](RunConfig& c, const std::string& v) {
             c.garch_window = parse_int_strict(v, "garch_window");
         }},
        {"garch_refit", [](const RunConfig& c) { return std::to_string(c.garch_refit); },
         [](RunConfig& c, const std::string& v) {
             c.garch_refit = parse_int_strict(v, "garch_refit");
         }},
        {"min_pool", [](const RunConfig& c) { return std::to_string(c.min_pool); },
         [](RunConfig& c, const std::string& v) {
             c.min_pool = parse_int_strict(v, "min_pool");
         }},
    };
    return f;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return s.substr(a, b - a);
}

}  // namespace config_detail

/// Applies one "key=value" override. Unknown keys are rejected rather than
/// ignored so a typo cannot silently run with defaults.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = config_detail::trim(assignment.substr(0, eq));
    const std::string value = config_detail::trim(assignment.substr(eq + 1));
    for (const auto& field : config_detail::fields()) {
        if (key == field.name) {
            try {
                field.set(cfg, value);
            } catch (const Error& e) {
                throw ConfigError("key '" + key + "': " + e.what());
            }
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + key + "'");
}

/// Parses a key=value file. '#' starts a comment, blank lines are skipped,
/// later assignments win over earlier ones.
inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = config_detail::trim(line);
        if (line.empty()) {
            continue;
        }
        try {
            apply_override(cfg, line);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path.string() + "'");
    }
    return parse_config(in);
}

/// Canonical form: every key in registry order, one per line. Two configs
/// are equal exactly when their serializations match.
[[nodiscard]] inline std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& field : config_detail::fields()) {
        out += field.name;
        out += '=';
        out += field.get(cfg);
        out += '\n';
    }
    return out;
}

/// FNV-1a over the canonical serialization, printed as 16 hex digits.
/// Stable across runs and platforms; used to stamp output files so results
/// can be traced back to the exact configuration that produced them.
[[nodiscard]] inline std::string config_fingerprint(const RunConfig& cfg) {
    const std::string canon = serialize_config(cfg);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace lcp
