#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lcp/errors.hpp"
#include "lcp/rng.hpp"
#include "lcp/series.hpp"

namespace lcp {

/// GARCH(1,1) benchmark model
///   sigma_t^2 = omega + alpha R_{t-1}^2 + beta sigma_{t-1}^2
/// with Gaussian quasi-likelihood fitting. Used as the reference forecaster
/// the adaptive estimator is compared against.
struct GarchParams {
    double omega;
    double alpha;
    double beta;

    [[nodiscard]] double persistence() const noexcept { return alpha + beta; }

    /// Stationary variance omega / (1 - alpha - beta).
    [[nodiscard]] double unconditional() const {
        validate();
        return omega / (1.0 - alpha - beta);
    }

    void validate() const {
        if (!(omega > 0.0) || !std::isfinite(omega)) {
            throw ValueError("omega must be positive");
        }
        if (!(alpha >= 0.0) || !(beta >= 0.0)) {
            throw ValueError("alpha and beta must be non-negative");
        }
        if (!(alpha + beta < 1.0)) {
            throw ValueError("alpha + beta must be below 1");
        }
    }
};

struct GarchFitOptions {
    std::int64_t min_window = 250;
    int max_iterations = 500;
    double grad_tol = 1e-8;
};

struct GarchFit {
    GarchParams params;
    double nll;                        // Gaussian quasi negative log-likelihood (without 2 pi term)
    std::array<double, 3> std_errors;  // (omega, alpha, beta); NaN when the information matrix is not usable
    int iterations;
    bool converged;
    bool boundary;                     // solution pinned near the edge of the admissible region
    double grad_norm;
};

namespace garch_detail {

/// Fitting runs in unconstrained coordinates x = (w, a, b):
///   omega = exp(w), persistence p = logistic(a) in (0,1), split q = logistic(b),
///   alpha = p q, beta = p (1 - q),
/// which enforces positivity and alpha + beta < 1 by construction.
inline double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

inline GarchParams decode(const std::array<double, 3>& x) noexcept {
    const double p = logistic(x[1]);
    const double q = logistic(x[2]);
    return GarchParams{std::exp(x[0]), p * q, p * (1.0 - q)};
}

inline std::array<double, 3> encode(const GarchParams& g) {
    const double p = g.alpha + g.beta;
    const double q = g.alpha / p;
    const auto logit = [](double v) { return std::log(v / (1.0 - v)); };
    return {std::log(g.omega), logit(p), logit(q)};
}

struct NllGrad {
    double value;
    std::array<double, 3> grad;  // with respect to (omega, alpha, beta)
};

/// Negative quasi log-likelihood 0.5 sum [log sigma_t^2 + y_t / sigma_t^2]
/// over the window, with the recursion started at the window's mean of
/// squares, plus its analytic gradient propagated through the recursion.
inline NllGrad nll_with_grad(const std::vector<double>& y, double init, const GarchParams& g) {
    double sig = init;
    double d_om = 0.0, d_al = 0.0, d_be = 0.0;
    double value = 0.0;
    double g_om = 0.0, g_al = 0.0, g_be = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (t > 0) {
            const double prev = sig;
            const double pd_om = d_om, pd_al = d_al, pd_be = d_be;
            sig = g.omega + g.alpha * y[t - 1] + g.beta * prev;
            d_om = 1.0 + g.beta * pd_om;
            d_al = y[t - 1] + g.beta * pd_al;
            d_be = prev + g.beta * pd_be;
        }
        value += 0.5 * (std::log(sig) + y[t] / sig);
        const double w = 0.5 * (1.0 / sig - y[t] / (sig * sig));
        g_om += w * d_om;
        g_al += w * d_al;
        g_be += w * d_be;
    }
    return NllGrad{value, {g_om, g_al, g_be}};
}

/// Same objective in unconstrained coordinates, gradient by chain rule.
inline NllGrad nll_transformed(const std::vector<double>& y, double init,
                               const std::array<double, 3>& x) {
    const GarchParams g = decode(x);
    const NllGrad raw = nll_with_grad(y, init, g);
    const double p = logistic(x[1]);
    const double q = logistic(x[2]);
    const double dp = p * (1.0 - p);
    const double dq = q * (1.0 - q);
    NllGrad out;
    out.value = raw.value;
    out.grad[0] = raw.grad[0] * g.omega;
    out.grad[1] = (raw.grad[1] * q + raw.grad[2] * (1.0 - q)) * dp;
    out.grad[2] = (raw.grad[1] * p - raw.grad[2] * p) * dq;
    return out;
}

inline double inf_norm(const std::array<double, 3>& v) noexcept {
    return std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])});
}

struct BfgsResult {
    std::array<double, 3> x;
    double value;
    double grad_norm;
    int iterations;
    bool converged;
};

/// Plain BFGS with backtracking line search on the 3-dimensional
/// transformed objective. Deterministic for a fixed starting point.
template <typename F>
BfgsResult bfgs(F&& f, std::array<double, 3> x, int max_iter, double tol) {
    auto cur = f(x);
    double h[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};  // inverse Hessian estimate
    int it = 0;
    for (; it < max_iter; ++it) {
        if (inf_norm(cur.grad) <= tol * std::max(1.0, std::fabs(cur.value))) {
            return BfgsResult{x, cur.value, inf_norm(cur.grad), it, true};
        }
        std::array<double, 3> dir{};
        for (int i = 0; i < 3; ++i) {
            dir[i] = -(h[i][0] * cur.grad[0] + h[i][1] * cur.grad[1] + h[i][2] * cur.grad[2]);
        }
        double slope = dir[0] * cur.grad[0] + dir[1] * cur.grad[1] + dir[2] * cur.grad[2];
        if (!(slope < 0.0)) {
            // Reset a non-descent direction to steepest descent.
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    h[i][j] = i == j ? 1.0 : 0.0;
                }
                dir[i] = -cur.grad[i];
            }
            slope = -(cur.grad[0] * cur.grad[0] + cur.grad[1] * cur.grad[1] +
                      cur.grad[2] * cur.grad[2]);
        }
        double step = 1.0;
        std::array<double, 3> xn{};
        NllGrad nxt{};
        bool advanced = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (int i = 0; i < 3; ++i) {
                xn[i] = x[i] + step * dir[i];
            }
            nxt = f(xn);
            if (std::isfinite(nxt.value) && nxt.value <= cur.value + 1e-4 * step * slope) {
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if (!advanced) {
            return BfgsResult{x, cur.value, inf_norm(cur.grad), it, false};
        }
        std::array<double, 3> s{}, yv{};
        for (int i = 0; i < 3; ++i) {
            s[i] = xn[i] - x[i];
            yv[i] = nxt.grad[i] - cur.grad[i];
        }
        const double sy = s[0] * yv[0] + s[1] * yv[1] + s[2] * yv[2];
        if (sy > 1e-12) {
            // Standard BFGS update of the inverse Hessian estimate.
            double hy[3];
            for (int i = 0; i < 3; ++i) {
                hy[i] = h[i][0] * yv[0] + h[i][1] * yv[1] + h[i][2] * yv[2];
            }
            const double yhy = yv[0] * hy[0] + yv[1] * hy[1] + yv[2] * hy[2];
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) -
                               (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        x = xn;
        cur = nxt;
    }
    return BfgsResult{x, cur.value, inf_norm(cur.grad), it, inf_norm(cur.grad) <= 1e-5};
}

/// Inverse of a symmetric positive definite 3x3 matrix by adjugate; returns
/// false when the matrix is not usable (non-positive determinant or
/// non-positive variance estimates).
inline bool invert_spd3(const double m[3][3], double inv[3][3]) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (!(det > 0.0) || !std::isfinite(det)) {
        return false;
    }
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = inv[0][1];
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = inv[0][2];
    inv[2][1] = inv[1][2];
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return inv[0][0] > 0.0 && inv[1][1] > 0.0 && inv[2][2] > 0.0;
}

}  // namespace garch_detail

/// Gaussian quasi-maximum-likelihood fit over a window of at least
/// min_window observations. The optimizer is BFGS on unconstrained
/// coordinates, multi-started from three fixed initial parameter sets, so
/// the fit is a deterministic function of the data. Standard errors come
/// from the numerically differentiated observed information at the optimum.
inline GarchFit garch_fit(const ReturnSeries& series, Interval window,
                          const GarchFitOptions& opts = {}) {
    series.check_interval(window);
    if (window.length() < opts.min_window) {
        throw ValueError("fitting window of " + std::to_string(window.length()) +
                         " observations is shorter than the minimum " +
                         std::to_string(opts.min_window));
    }
    std::vector<double> y(static_cast<std::size_t>(window.length()));
    for (std::int64_t t = window.start; t < window.end; ++t) {
        const double v = series.ret(t);
        y[static_cast<std::size_t>(t - window.start)] = v * v;
    }
    const double init = series.sum_sq(window) / static_cast<double>(window.length());
    if (!(init > 0.0)) {
        throw FitError("window variance is zero, nothing to fit");
    }

    const auto objective = [&](const std::array<double, 3>& x) {
        return garch_detail::nll_transformed(y, init, x);
    };

    // Fixed multi-start grid: persistence-heavy, moderate, and weakly
    // persistent initial guesses, each with omega matching the window
    // variance as the implied stationary level.
    const std::array<std::array<double, 2>, 3> starts = {{{0.05, 0.90}, {0.10, 0.80}, {0.05, 0.60}}};
    garch_detail::BfgsResult best{};
    bool have = false;
    for (const auto& ab : starts) {
        const GarchParams g0{init * (1.0 - ab[0] - ab[1]), ab[0], ab[1]};
        const auto res = garch_detail::bfgs(objective, garch_detail::encode(g0),
                                            opts.max_iterations, opts.grad_tol);
        const bool better = !have || (res.converged && !best.converged) ||
                            (res.converged == best.converged && res.value < best.value);
        if (better) {
            best = res;
            have = true;
        }
    }
    if (!best.converged || !std::isfinite(best.value)) {
        throw FitError("optimizer failed to converge after " + std::to_string(best.iterations) +
                       " iterations at x = (" + std::to_string(best.x[0]) + ", " +
                       std::to_string(best.x[1]) + ", " + std::to_string(best.x[2]) +
                       "), gradient norm " + std::to_string(best.grad_norm));
    }

    GarchFit fit;
    fit.params = garch_detail::decode(best.x);
    fit.nll = best.value;
    fit.iterations = best.iterations;
    fit.converged = best.converged;
    fit.grad_norm = best.grad_norm;
    fit.boundary = std::fabs(best.x[1]) > 12.0 || std::fabs(best.x[2]) > 12.0;

    // Observed information in (omega, alpha, beta) coordinates by central
    // differences of the analytic gradient.
    const GarchParams p = fit.params;
    double hess[3][3];
    const std::array<double, 3> base{p.omega, p.alpha, p.beta};
    for (int j = 0; j < 3; ++j) {
        const double h = std::max(1e-6 * std::fabs(base[j]), 1e-10);
        std::array<double, 3> hi = base, lo = base;
        hi[j] += h;
        lo[j] -= h;
        const auto ghi =
            garch_detail::nll_with_grad(y, init, GarchParams{hi[0], hi[1], hi[2]});
        const auto glo =
            garch_detail::nll_with_grad(y, init, GarchParams{lo[0], lo[1], lo[2]});
        for (int i = 0; i < 3; ++i) {
            hess[i][j] = (ghi.grad[i] - glo.grad[i]) / (2.0 * h);
        }
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const double sym = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = sym;
            hess[j][i] = sym;
        }
    }
    double inv[3][3];
    if (garch_detail::invert_spd3(hess, inv)) {
        fit.std_errors = {std::sqrt(inv[0][0]), std::sqrt(inv[1][1]), std::sqrt(inv[2][2])};
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        fit.std_errors = {nan, nan, nan};
        fit.boundary = true;
    }
    return fit;
}

/// Conditional variance at window.end implied by the recursion over the
/// window, i.e. the variance of the first post-window observation given the
/// window data. Uses only observations inside the window.
[[nodiscard]] inline double garch_variance_state(const ReturnSeries& series, Interval window,
                                                 const GarchParams& g) {
    g.validate();
    series.check_interval(window);
    if (window.empty()) {
        throw GeometryError("variance state needs a non-empty window");
    }
    double sig = series.sum_sq(window) / static_cast<double>(window.length());
    for (std::int64_t t = window.start + 1; t <= window.end; ++t) {
        const double prev = series.ret(t - 1);
        sig = g.omega + g.alpha * prev * prev + g.beta * sig;
    }
    return sig;
}

/// h-step variance forecast from the current state:
///   sigma^2_{t+h|t} = sigma_bar^2 + (alpha + beta)^h (sigma_t^2 - sigma_bar^2).
[[nodiscard]] inline double garch_forecast(const GarchParams& g, double sigma2_t, std::int64_t h) {
    g.validate();
    if (!(sigma2_t > 0.0)) {
        throw ValueError("current variance must be positive");
    }
    if (h < 1) {
        throw ValueError("horizon must be at least 1");
    }
    const double bar = g.unconditional();
    return bar + std::pow(g.persistence(), static_cast<double>(h)) * (sigma2_t - bar);
}

/// Aggregated variance over the next h steps, the closed-form sum of the
/// per-step forecasts: h sigma_bar^2 + (sigma_t^2 - sigma_bar^2) * s (1 - s^h) / (1 - s).
[[nodiscard]] inline double garch_aggregated_forecast(const GarchParams& g, double sigma2_t,
                                                      std::int64_t h) {
    g.validate();
    if (!(sigma2_t > 0.0)) {
        throw ValueError("current variance must be positive");
    }
    if (h < 1) {
        throw ValueError("horizon must be at least 1");
    }
    const double bar = g.unconditional();
    const double s = g.persistence();
    const double geo = s == 0.0 ? 0.0
                                : s * (1.0 - std::pow(s, static_cast<double>(h))) / (1.0 - s);
    return static_cast<double>(h) * bar + (sigma2_t - bar) * geo;
}

/// Simulated GARCH(1,1) path with Gaussian innovations, started at the
/// stationary variance, first `burn_in` observations discarded. The stored
/// true volatility is the conditional variance path.
[[nodiscard]] inline ReturnSeries simulate_garch(const GarchParams& g, std::int64_t n,
                                                 std::uint64_t seed, std::int64_t burn_in = 500) {
    g.validate();
    if (n < 1 || burn_in < 0) {
        throw ValueError("need n >= 1 and burn_in >= 0");
    }
    auto engine = derive_stream(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    double sig = g.unconditional();
    std::vector<double> r;
    std::vector<double> vol;
    r.reserve(static_cast<std::size_t>(n));
    vol.reserve(static_cast<std::size_t>(n));
    double prev = 0.0;
    for (std::int64_t t = 0; t < burn_in + n; ++t) {
        if (t > 0) {
            sig = g.omega + g.alpha * prev * prev + g.beta * sig;
        }
        prev = std::sqrt(sig) * normal(engine);
        if (t >= burn_in) {
            r.push_back(prev);
            vol.push_back(sig);
        }
    }
    return ReturnSeries(std::move(r), std::move(vol));
}

}  // namespace lcp
