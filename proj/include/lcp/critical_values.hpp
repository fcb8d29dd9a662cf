#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lcp/errors.hpp"
#include "lcp/scheme.hpp"

namespace lcp {

/// Critical values z_1..z_K for the multiscale change-point sweep, together
/// with the calibration settings that produced them. Values are tied to one
/// specific scheme; the estimator refuses mismatched combinations.
struct CriticalValues {
    std::vector<double> z;                      // z[k-1] is the threshold of scale k
    double r = 0.5;                             // risk power
    double alpha = 0.2;                         // risk level
    std::int64_t replicates = 0;                // Monte Carlo sample size used
    std::uint64_t seed = 0;                     // Monte Carlo seed used
    std::vector<std::int64_t> scheme_lengths;   // full length grid including the testing-only tail

    /// Threshold of scale k, 1-based.
    [[nodiscard]] double z_at(int k) const {
        if (k < 1 || k > static_cast<int>(z.size())) {
            throw ValueError("no critical value for scale " + std::to_string(k));
        }
        return z[static_cast<std::size_t>(k - 1)];
    }

    /// Running tail maximum max_{l >= k} z_l, 1-based.
    [[nodiscard]] double z_bar(int k) const {
        double m = z_at(k);
        for (int l = k + 1; l <= static_cast<int>(z.size()); ++l) {
            const double v = z_at(l);
            m = v > m ? v : m;
        }
        return m;
    }

    void validate() const {
        if (scheme_lengths.size() < 3) {
            throw ValueError("critical values carry no usable scheme");
        }
        if (z.size() != scheme_lengths.size() - 2) {
            throw ValueError("expected " + std::to_string(scheme_lengths.size() - 2) +
                             " critical values, got " + std::to_string(z.size()));
        }
        for (double v : z) {
            if (!(v > 0.0)) {
                throw ValueError("critical values must be positive");
            }
        }
    }

    [[nodiscard]] IntervalScheme scheme() const {
        return IntervalScheme::from_lengths(scheme_lengths);
    }
};

namespace detail {

/// Shortest decimal form that round-trips the exact double, at no fewer than
/// 12 significant digits.
inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline double parse_double_strict(const std::string& text, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw DataError("cannot parse " + what + " from '" + text + "'");
    }
    if (pos != text.size()) {
        throw DataError("trailing characters after " + what + " in '" + text + "'");
    }
    return v;
}

inline std::int64_t parse_int_strict(const std::string& text, const std::string& what) {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw DataError("cannot parse " + what + " from '" + text + "'");
    }
    if (pos != text.size()) {
        throw DataError("trailing characters after " + what + " in '" + text + "'");
    }
    return v;
}

inline std::uint64_t parse_uint_strict(const std::string& text, const std::string& what) {
    // std::stoull accepts "-1" and wraps it around; reject signs outright.
    if (text.find('-') != std::string::npos) {
        throw DataError(what + " must be nonnegative, got '" + text + "'");
    }
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception&) {
        throw DataError("cannot parse " + what + " from '" + text + "'");
    }
    if (pos != text.size()) {
        throw DataError("trailing characters after " + what + " in '" + text + "'");
    }
    return v;
}

}  // namespace detail

/// Plain-text persistence, one key=value pair per line:
/// r, alpha, replicates, seed, scheme (comma-separated lengths), then one
/// z_k line per scale. Numeric fields are written with enough digits to
/// reload bit-exactly.
inline void save_critical_values(std::ostream& out, const CriticalValues& cv) {
    cv.validate();
    out << "r=" << detail::format_full(cv.r) << "\n";
    out << "alpha=" << detail::format_full(cv.alpha) << "\n";
    out << "replicates=" << cv.replicates << "\n";
    out << "seed=" << cv.seed << "\n";
    out << "scheme=";
    for (std::size_t i = 0; i < cv.scheme_lengths.size(); ++i) {
        out << (i == 0 ? "" : ",") << cv.scheme_lengths[i];
    }
    out << "\n";
    for (std::size_t k = 0; k < cv.z.size(); ++k) {
        out << "z_" << (k + 1) << "=" << detail::format_full(cv.z[k]) << "\n";
    }
    if (!out) {
        throw IoError("failed writing critical values");
    }
}

inline void save_critical_values(const std::string& path, const CriticalValues& cv) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    save_critical_values(out, cv);
}

inline CriticalValues load_critical_values(std::istream& in) {
    CriticalValues cv;
    cv.z.clear();
    bool saw_r = false, saw_alpha = false, saw_reps = false, saw_seed = false, saw_scheme = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;  // blank or comment (tool outputs carry a '#' header)
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError("line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "r") {
            cv.r = detail::parse_double_strict(value, "r");
            saw_r = true;
        } else if (key == "alpha") {
            cv.alpha = detail::parse_double_strict(value, "alpha");
            saw_alpha = true;
        } else if (key == "replicates") {
            cv.replicates = detail::parse_int_strict(value, "replicates");
            saw_reps = true;
        } else if (key == "seed") {
            cv.seed = detail::parse_uint_strict(value, "seed");
            saw_seed = true;
        } else if (key == "scheme") {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                cv.scheme_lengths.push_back(detail::parse_int_strict(item, "scheme length"));
            }
            saw_scheme = true;
        } else if (key.rfind("z_", 0) == 0) {
            const std::int64_t idx = detail::parse_int_strict(key.substr(2), "scale index");
            if (idx != static_cast<std::int64_t>(cv.z.size()) + 1) {
                throw DataError("line " + std::to_string(line_no) + ": critical values must appear as z_1, z_2, ... in order");
            }
            cv.z.push_back(detail::parse_double_strict(value, key));
        } else {
            throw DataError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (!saw_r || !saw_alpha || !saw_reps || !saw_seed || !saw_scheme) {
        throw DataError("critical values file is missing mandatory keys");
    }
    cv.validate();
    return cv;
}

inline CriticalValues load_critical_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return load_critical_values(in);
}

}  // namespace lcp
