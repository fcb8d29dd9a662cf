#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "lcp/errors.hpp"

namespace lcp {

/// Distribution of the standardized innovations used for quantile forecasts.
/// The Student variant is t with 5 degrees of freedom rescaled to unit
/// variance; the empirical variant interpolates order statistics of a pool
/// of standardized residuals.
enum class InnovationLaw { gaussian, student5, empirical };

[[nodiscard]] inline const char* to_string(InnovationLaw law) noexcept {
    switch (law) {
        case InnovationLaw::gaussian: return "gaussian";
        case InnovationLaw::student5: return "student5";
        case InnovationLaw::empirical: return "empirical";
    }
    return "?";
}

[[nodiscard]] inline InnovationLaw law_from_string(const std::string& name) {
    if (name == "gaussian") {
        return InnovationLaw::gaussian;
    }
    if (name == "student5") {
        return InnovationLaw::student5;
    }
    if (name == "empirical") {
        return InnovationLaw::empirical;
    }
    throw ValueError("unknown innovation law '" + name + "'");
}

namespace detail {

inline void check_level(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw ValueError("probability level must lie in (0, 1)");
    }
}

}  // namespace detail

[[nodiscard]] inline double gaussian_quantile(double p) {
    detail::check_level(p);
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Quantile of t_5 rescaled to unit variance (raw variance is 5/3).
[[nodiscard]] inline double student5_unit_quantile(double p) {
    detail::check_level(p);
    return boost::math::quantile(boost::math::students_t_distribution<double>(5.0), p) /
           std::sqrt(5.0 / 3.0);
}

/// Quantile of an already sorted sample by linear interpolation between
/// order statistics: position (n - 1) p between x_(i) and x_(i+1).
[[nodiscard]] inline double empirical_quantile_sorted(const std::vector<double>& sorted, double p) {
    detail::check_level(p);
    if (sorted.empty()) {
        throw ValueError("empirical quantile of an empty sample");
    }
    const double pos = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

[[nodiscard]] inline double empirical_quantile(std::vector<double> sample, double p) {
    std::sort(sample.begin(), sample.end());
    return empirical_quantile_sorted(sample, p);
}

}  // namespace lcp
