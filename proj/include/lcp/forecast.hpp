#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lcp/core.hpp"
#include "lcp/errors.hpp"
#include "lcp/series.hpp"

namespace lcp {

/// Aggregated variance forecast of the locally constant model: the h-step
/// variance is simply h times the current local level.
[[nodiscard]] inline double lcp_variance_forecast(Theta theta, std::int64_t h) {
    if (h < 1) {
        throw ValueError("horizon must be at least 1");
    }
    return static_cast<double>(h) * theta.value;
}

/// Realized aggregated variance proxy over (stamp, stamp + h]: the sum of
/// the next h squared returns. Forecasts stamped at t use data strictly
/// before t, so the proxy window starts at index t.
[[nodiscard]] inline double realized_aggregate(const ReturnSeries& series, std::int64_t stamp,
                                               std::int64_t h) {
    if (h < 1) {
        throw ValueError("horizon must be at least 1");
    }
    return series.sum_sq({stamp, stamp + h});
}

/// Root-absolute-error score of the adaptive forecasts relative to the
/// benchmark forecasts on the same evaluation points:
///   sum_t |V_t - realized_t|^{1/2} (adaptive) / same sum (benchmark).
/// Values below one favor the adaptive forecaster.
[[nodiscard]] inline double msqe_ratio(const std::vector<double>& adaptive,
                                       const std::vector<double>& benchmark,
                                       const std::vector<double>& realized) {
    if (adaptive.size() != realized.size() || benchmark.size() != realized.size()) {
        throw ValueError("forecast and realized vectors must have equal length");
    }
    if (realized.empty()) {
        throw ValueError("cannot score an empty evaluation window");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < realized.size(); ++i) {
        num += std::sqrt(std::fabs(adaptive[i] - realized[i]));
        den += std::sqrt(std::fabs(benchmark[i] - realized[i]));
    }
    if (den == 0.0) {
        throw ValueError("benchmark errors are identically zero, ratio undefined");
    }
    return num / den;
}

}  // namespace lcp
