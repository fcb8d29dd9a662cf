#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "lcp/errors.hpp"
#include "lcp/series.hpp"

namespace lcp {

/// Floor applied to variance estimates so that downstream likelihood ratios
/// stay finite on degenerate (all-zero) intervals. Estimates hitting the
/// floor are flagged at the call site.
inline constexpr double THETA_FLOOR_DEFAULT = 1e-12;

/// Variance parameter of the local constant-volatility model R_t = sqrt(theta) * eps_t.
/// Strictly positive by construction.
struct Theta {
    explicit Theta(double v) : value(v) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValueError("theta must be positive and finite, got " + std::to_string(v));
        }
    }

    double value;

    friend bool operator==(const Theta&, const Theta&) = default;
};

/// Admissible parameter box: theta in [theta_min, theta_max] and pairwise
/// ratios bounded below by a_const^2.
struct ParamBounds {
    double theta_min;
    double theta_max;
    double a_const;

    ParamBounds(double tmin, double tmax, double a) : theta_min(tmin), theta_max(tmax), a_const(a) {
        if (!(tmin > 0.0) || !(tmax > tmin) || !std::isfinite(tmax)) {
            throw ValueError("parameter bounds require 0 < theta_min < theta_max < inf");
        }
        if (!(a > 0.0) || !(a <= 1.0)) {
            throw ValueError("a_const must lie in (0, 1]");
        }
    }
};

namespace detail {

/// Unchecked Kullback-Leibler divergence between the variance-theta Gaussian
/// models, as a function of the ratio q = theta' / theta:
///   K(theta', theta) = (q - 1 - log q) / 2.
/// Rounding can produce a tiny negative value when q is within a few ulps of
/// one; that is clamped to zero so the divergence stays a true pre-metric.
inline double kl_ratio(double q) noexcept {
    const double raw = 0.5 * (q - 1.0 - std::log(q));
    return raw > 0.0 ? raw : 0.0;
}

inline double kl_raw(double theta_p, double theta_q) noexcept {
    return kl_ratio(theta_p / theta_q);
}

}  // namespace detail

/// K(theta', theta) for the Gaussian volatility model. Non-negative, zero
/// exactly when the arguments coincide, and invariant under a common scaling
/// of both arguments.
[[nodiscard]] inline double kl_divergence(Theta theta_p, Theta theta_q) noexcept {
    return detail::kl_raw(theta_p.value, theta_q.value);
}

/// Maximum likelihood variance over an interval: the mean of squared
/// returns. A degenerate (all-zero) interval is clamped to `floor` and
/// reported through `clamped` when a sink is supplied.
[[nodiscard]] inline Theta local_mle(const ReturnSeries& series, Interval iv,
                                     double floor = THETA_FLOOR_DEFAULT,
                                     bool* clamped = nullptr) {
    series.check_interval(iv);
    if (iv.empty()) {
        throw GeometryError("cannot estimate variance over an empty interval");
    }
    if (!(floor > 0.0)) {
        throw ValueError("theta floor must be positive");
    }
    const double mean = series.sum_sq(iv) / static_cast<double>(iv.length());
    if (mean < floor) {
        if (clamped != nullptr) {
            *clamped = true;
        }
        return Theta(floor);
    }
    if (clamped != nullptr) {
        *clamped = false;
    }
    return Theta(mean);
}

/// Gaussian log-likelihood of the constant-variance model over an interval:
///   L_I(theta) = -(N/2) log(2 pi theta) - S_I / (2 theta),
/// with N the interval length and S_I the sum of squared returns.
[[nodiscard]] inline double interval_loglik(const ReturnSeries& series, Interval iv, Theta theta) {
    series.check_interval(iv);
    if (iv.empty()) {
        throw GeometryError("cannot evaluate likelihood over an empty interval");
    }
    const double n = static_cast<double>(iv.length());
    const double s = series.sum_sq(iv);
    return -0.5 * n * std::log(2.0 * std::numbers::pi * theta.value) - s / (2.0 * theta.value);
}

/// Fitted log-likelihood ratio sup_u L_I(u) - L_I(theta). Collapses to
/// N_I * K(mle, theta); that identity is what makes every split statistic a
/// pair of divergence evaluations.
[[nodiscard]] inline double fitted_loglik_ratio(const ReturnSeries& series, Interval iv, Theta theta,
                                                double floor = THETA_FLOOR_DEFAULT) {
    const Theta mle = local_mle(series, iv, floor);
    return static_cast<double>(iv.length()) * detail::kl_raw(mle.value, theta.value);
}

/// Risk normalizer r_r = 2 r Gamma(r) for the power-loss moments used by the
/// calibration budget. Gamma is evaluated by the standard library, which is
/// accurate to well under 1e-12 relative error in this range.
[[nodiscard]] inline double risk_constant(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw ValueError("risk power must be positive and finite");
    }
    const double value = 2.0 * r * std::tgamma(r);
    if (!std::isfinite(value)) {
        throw ValueError("risk constant overflows for power " + std::to_string(r));
    }
    return value;
}

/// Two-sided likelihood-ratio confidence interval for the interval variance:
///   { theta : N_I K(mle, theta) <= z },  z = log(2 / alpha).
struct ConfidenceBand {
    Theta lo;
    Theta hi;
    double z;
};

namespace detail {

/// Bisection for N * K(mle, theta) = z in log-space on [lo, hi], where the
/// boundary condition g(lo) > 0 > g(hi) or g(lo) < 0 < g(hi) is arranged by
/// the caller. Stops at 1e-10 relative width.
inline double kl_level_crossing(double mle, double n, double z, double lo, double hi) {
    double llo = std::log(lo);
    double lhi = std::log(hi);
    const bool lo_above = n * kl_raw(mle, lo) - z > 0.0;
    for (int it = 0; it < 200 && (lhi - llo) > 1e-10; ++it) {
        const double mid = 0.5 * (llo + lhi);
        const bool mid_above = n * kl_raw(mle, std::exp(mid)) - z > 0.0;
        if (mid_above == lo_above) {
            llo = mid;
        } else {
            lhi = mid;
        }
    }
    return std::exp(0.5 * (llo + lhi));
}

}  // namespace detail

/// Confidence set at coverage 1 - alpha. The exponential deviation bound for
/// the fitted ratio makes this conservative: actual coverage is at least the
/// nominal level. The search brackets are [floor, mle] and [mle, mle * e^64];
/// a bracket whose far end still satisfies the inequality is returned as-is.
[[nodiscard]] inline ConfidenceBand confidence_set(const ReturnSeries& series, Interval iv,
                                                   double alpha,
                                                   double floor = THETA_FLOOR_DEFAULT) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw ValueError("alpha must lie in (0, 1)");
    }
    const Theta mle = local_mle(series, iv, floor);
    const double n = static_cast<double>(iv.length());
    const double z = std::log(2.0 / alpha);
    const double lo_end = floor;
    const double hi_end = mle.value * std::exp(64.0);

    double lo = lo_end;
    if (lo_end < mle.value && n * detail::kl_raw(mle.value, lo_end) > z) {
        lo = detail::kl_level_crossing(mle.value, n, z, lo_end, mle.value);
    }
    double hi = hi_end;
    if (n * detail::kl_raw(mle.value, hi_end) > z) {
        hi = detail::kl_level_crossing(mle.value, n, z, mle.value, hi_end);
    }
    return ConfidenceBand{Theta(lo), Theta(hi), z};
}

/// Accumulated divergence between the true (stored) variance path and a
/// constant candidate over an interval. Quantifies how far the interval is
/// from homogeneity at level theta.
[[nodiscard]] inline double modeling_bias(const ReturnSeries& series, Interval iv, Theta theta) {
    series.check_interval(iv);
    if (!series.has_true_vol()) {
        throw ValueError("modeling bias requires a series with stored true volatility");
    }
    double acc = 0.0;
    for (std::int64_t t = iv.start; t < iv.end; ++t) {
        acc += detail::kl_raw(series.true_vol(t), theta.value);
    }
    return acc;
}

}  // namespace lcp
