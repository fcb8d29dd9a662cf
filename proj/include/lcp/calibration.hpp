#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "lcp/changepoint.hpp"
#include "lcp/core.hpp"
#include "lcp/critical_values.hpp"
#include "lcp/errors.hpp"
#include "lcp/estimator.hpp"
#include "lcp/parallel.hpp"
#include "lcp/rng.hpp"
#include "lcp/scheme.hpp"
#include "lcp/series.hpp"

namespace lcp {

struct CalibrationConfig {
    double r = 0.5;
    double alpha = 0.2;
    std::int64_t replicates = 20000;
    std::uint64_t seed = 12345;
    double z_grid_step = 0.05;
    double cap_a0 = 1.0;
    double theta_floor = THETA_FLOOR_DEFAULT;
    int threads = 1;
};

/// Closed-form upper envelope for acceptable critical values,
///   cap_k = a0 log K + 2 log(N_k / alpha) + 2 r log(N_K / N_k),
/// evaluated over the full length grid (K = last index, so a two-entry grid
/// collapses to 2 log(N_1 / alpha)). This envelope caps the calibration
/// search; the operational thresholds always come from the Monte Carlo
/// search below it.
inline std::vector<double> theoretical_cap(const std::vector<std::int64_t>& lengths, double r,
                                           double alpha, double a0 = 1.0) {
    if (lengths.size() < 2) {
        throw ValueError("cap formula needs at least two lengths");
    }
    if (!(r > 0.0)) {
        throw ValueError("risk power must be positive");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw ValueError("alpha must lie in (0, 1)");
    }
    if (!(a0 >= 0.0)) {
        throw ValueError("a0 must be non-negative");
    }
    const auto kk = static_cast<double>(lengths.size() - 1);
    const double n_last = static_cast<double>(lengths.back());
    std::vector<double> caps(lengths.size() - 1);
    for (std::size_t k = 1; k < lengths.size(); ++k) {
        const double nk = static_cast<double>(lengths[k]);
        caps[k - 1] = a0 * std::log(kk) + 2.0 * std::log(nk / alpha) + 2.0 * r * std::log(n_last / nk);
    }
    return caps;
}

inline std::vector<double> theoretical_cap(const IntervalScheme& scheme, double r, double alpha,
                                           double a0 = 1.0) {
    return theoretical_cap(scheme.lengths(), r, alpha, a0);
}

namespace detail {

/// Unit-variance Gaussian path of the given length for the replicate's
/// private stream. Calibration may simulate at variance one without loss:
/// every statistic involved depends on the data only through ratios of
/// interval means of squares, which are invariant under common scaling.
inline ReturnSeries homogeneous_path(std::int64_t length, std::uint64_t seed,
                                     std::int64_t replicate) {
    auto engine = derive_stream(seed, replicate);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> r(static_cast<std::size_t>(length));
    for (auto& v : r) {
        v = normal(engine);
    }
    return ReturnSeries(std::move(r), std::vector<double>(static_cast<std::size_t>(length), 1.0));
}

}  // namespace detail

/// Sequential Monte Carlo choice of the critical values. Scale l receives
/// the smallest grid value z_l = j * z_grid_step such that the estimated
/// contribution of "first rejection happens at scale l" to the propagation
/// risk stays within an equal share of the total budget:
///   max_{k >= l} E |N_k K(theta_k, theta_{l-1})|^r 1(B_l) <= alpha r_r / K,
/// where B_l = {T_1 <= z_1, ..., T_{l-1} <= z_{l-1}, T_l > z_l}. One fixed
/// set of simulated paths is shared by every scale and every candidate value
/// (common random numbers), so the search is monotone and reproducible; the
/// candidate grid is capped by the closed-form envelope above, and exceeding
/// the cap at any scale aborts the calibration with the achieved risk.
inline CriticalValues calibrate(const IntervalScheme& scheme, const CalibrationConfig& cfg = {}) {
    if (cfg.replicates < 1000) {
        throw ValueError("calibration needs at least 1000 replicates");
    }
    if (!(cfg.z_grid_step > 0.0)) {
        throw ValueError("z grid step must be positive");
    }
    const int K = scheme.num_scales();
    const std::int64_t M = cfg.replicates;
    const std::int64_t L = scheme.max_history();
    const double budget = cfg.alpha * risk_constant(cfg.r) / static_cast<double>(K);
    const std::vector<double> caps = theoretical_cap(scheme, cfg.r, cfg.alpha, cfg.cap_a0);

    // loss(rep, l, k) = |N_k K(theta_k, theta_{l-1})|^r for 1 <= l <= k <= K,
    // flattened as a per-replicate triangle.
    std::vector<std::size_t> tri_offset(static_cast<std::size_t>(K) + 1, 0);
    for (int l = 1; l <= K; ++l) {
        tri_offset[static_cast<std::size_t>(l)] =
            tri_offset[static_cast<std::size_t>(l - 1)] + static_cast<std::size_t>(K - l + 1);
    }
    const std::size_t tri = tri_offset[static_cast<std::size_t>(K)];
    const auto tri_idx = [&](int l, int k) {
        return tri_offset[static_cast<std::size_t>(l - 1)] + static_cast<std::size_t>(k - l);
    };

    std::vector<double> stats(static_cast<std::size_t>(M) * static_cast<std::size_t>(K));
    std::vector<double> losses(static_cast<std::size_t>(M) * tri);

    parallel_for(M, cfg.threads, [&](std::int64_t rep) {
        const ReturnSeries path = detail::homogeneous_path(L, cfg.seed, rep);
        const std::int64_t t = L;
        std::vector<double> theta(static_cast<std::size_t>(K) + 1);
        for (int k = 0; k <= K; ++k) {
            theta[static_cast<std::size_t>(k)] =
                local_mle(path, {t - scheme.length(k), t}, cfg.theta_floor).value;
        }
        double* stat_row = stats.data() + static_cast<std::size_t>(rep) * static_cast<std::size_t>(K);
        double* loss_row = losses.data() + static_cast<std::size_t>(rep) * tri;
        for (int l = 1; l <= K; ++l) {
            const Interval testing{t - scheme.testing_length(l), t};
            const Interval tested{t - scheme.length(l), t - scheme.length(l - 1)};
            stat_row[l - 1] = max_stat(path, testing, tested, cfg.theta_floor).stat;
            for (int k = l; k <= K; ++k) {
                const double kl = detail::kl_raw(theta[static_cast<std::size_t>(k)],
                                                 theta[static_cast<std::size_t>(l - 1)]);
                loss_row[tri_idx(l, k)] = std::pow(static_cast<double>(scheme.length(k)) * kl, cfg.r);
            }
        }
    });

    CriticalValues cv;
    cv.r = cfg.r;
    cv.alpha = cfg.alpha;
    cv.replicates = M;
    cv.seed = cfg.seed;
    cv.scheme_lengths = scheme.lengths();
    cv.z.resize(static_cast<std::size_t>(K));

    std::vector<std::int64_t> alive(static_cast<std::size_t>(M));
    std::iota(alive.begin(), alive.end(), std::int64_t{0});

    for (int l = 1; l <= K; ++l) {
        // Survivors of scales < l, ordered by decreasing T_l, with prefix
        // sums of each k-loss in that order. The risk of candidate z is then
        // a prefix mean over the paths with T_l > z.
        std::vector<std::int64_t> order = alive;
        std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
            const double ta = stats[static_cast<std::size_t>(a) * static_cast<std::size_t>(K) + l - 1];
            const double tb = stats[static_cast<std::size_t>(b) * static_cast<std::size_t>(K) + l - 1];
            if (ta != tb) {
                return ta > tb;
            }
            return a < b;
        });
        std::vector<double> sorted_t(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            sorted_t[i] =
                stats[static_cast<std::size_t>(order[i]) * static_cast<std::size_t>(K) + l - 1];
        }
        std::vector<std::vector<double>> prefix(static_cast<std::size_t>(K - l + 1));
        for (int k = l; k <= K; ++k) {
            auto& p = prefix[static_cast<std::size_t>(k - l)];
            p.resize(order.size() + 1, 0.0);
            for (std::size_t i = 0; i < order.size(); ++i) {
                p[i + 1] = p[i] + losses[static_cast<std::size_t>(order[i]) * tri + tri_idx(l, k)];
            }
        }
        const auto risk_at = [&](double z) {
            // Number of surviving paths with T_l > z; sorted_t is descending.
            const auto it = std::upper_bound(sorted_t.begin(), sorted_t.end(), z,
                                             [](double zz, double t) { return zz >= t; });
            const auto cnt = static_cast<std::size_t>(it - sorted_t.begin());
            double worst = 0.0;
            for (int k = l; k <= K; ++k) {
                worst = std::max(worst,
                                 prefix[static_cast<std::size_t>(k - l)][cnt] / static_cast<double>(M));
            }
            return worst;
        };

        const double cap = caps[static_cast<std::size_t>(l - 1)];
        const auto j_max = static_cast<std::int64_t>(std::floor(cap / cfg.z_grid_step + 1e-12));
        double chosen = -1.0;
        double last_risk = 0.0;
        for (std::int64_t j = 1; j <= j_max; ++j) {
            const double z = static_cast<double>(j) * cfg.z_grid_step;
            last_risk = risk_at(z);
            if (last_risk <= budget) {
                chosen = z;
                break;
            }
        }
        if (chosen < 0.0) {
            throw CalibrationError("scale " + std::to_string(l) + " cannot meet the risk budget " +
                                       std::to_string(budget) + " below the cap " +
                                       std::to_string(cap) + " (achieved " +
                                       std::to_string(last_risk) + ")",
                                   l, last_risk);
        }
        cv.z[static_cast<std::size_t>(l - 1)] = chosen;

        std::vector<std::int64_t> next;
        next.reserve(alive.size());
        for (std::int64_t rep : alive) {
            if (!(stats[static_cast<std::size_t>(rep) * static_cast<std::size_t>(K) + l - 1] >
                  chosen)) {
                next.push_back(rep);
            }
        }
        alive = std::move(next);
    }
    return cv;
}

/// Per-scale outcome of the independent propagation check.
struct PropagationScale {
    int k;
    double mean_risk;
    double se;
    double threshold;
    bool pass;
};

struct PropagationReport {
    std::vector<PropagationScale> scales;
    bool pass = true;
    bool identity_ok = true;       // first-rejection decomposition reproduces each risk term
    double false_alarm_freq = 0.0; // fraction of homogeneous paths with any rejection
    std::int64_t replicates = 0;
    std::int64_t executions = 0;
    std::int64_t stability_violations = 0;
};

/// Fresh-seed Monte Carlo verification that the calibrated thresholds hold
/// the propagation condition E |N_k K(theta_k, hat_theta_k)|^r <= alpha r_r
/// at every scale, where hat_theta_k is the estimate selected after the
/// first k scales. A scale passes when its sample mean is within three
/// standard errors of the bound.
inline PropagationReport verify_propagation(const IntervalScheme& scheme,
                                            const CriticalValues& crits, std::int64_t replicates,
                                            std::uint64_t seed, int threads = 1,
                                            double theta_floor = THETA_FLOOR_DEFAULT) {
    crits.validate();
    if (crits.scheme_lengths != scheme.lengths()) {
        throw ValueError("critical values were calibrated for a different scheme");
    }
    if (replicates < 2) {
        throw ValueError("need at least two replicates");
    }
    const int K = scheme.num_scales();
    const std::int64_t L = scheme.max_history();
    const std::int64_t M = replicates;

    std::vector<double> loss(static_cast<std::size_t>(M) * static_cast<std::size_t>(K));
    std::vector<char> rejected(static_cast<std::size_t>(M));
    std::vector<char> identity(static_cast<std::size_t>(M));
    std::vector<char> unstable(static_cast<std::size_t>(M));

    EstimatorOptions opts;
    opts.theta_floor = theta_floor;
    opts.record_steps = true;
    opts.check_stability = true;

    parallel_for(M, threads, [&](std::int64_t rep) {
        const ReturnSeries path = detail::homogeneous_path(L, seed, rep);
        const LcpResult res = run_lcp(path, L, scheme, crits, opts);
        rejected[static_cast<std::size_t>(rep)] = res.change_found ? 1 : 0;
        unstable[static_cast<std::size_t>(rep)] =
            (res.stability.checked && !res.stability.ok) ? 1 : 0;
        std::vector<double> theta(static_cast<std::size_t>(K) + 1);
        for (int k = 0; k <= K; ++k) {
            theta[static_cast<std::size_t>(k)] =
                local_mle(path, {L - scheme.length(k), L}, theta_floor).value;
        }
        char ok = 1;
        for (int k = 1; k <= K; ++k) {
            const int sel = res.kappa < k ? res.kappa : k;
            const double direct =
                std::pow(static_cast<double>(scheme.length(k)) *
                             detail::kl_raw(theta[static_cast<std::size_t>(k)],
                                            theta[static_cast<std::size_t>(sel)]),
                         crits.r);
            // Decomposition over the first-rejection event: exactly one
            // scale l <= k can host it, contributing the matching term.
            double decomposed = 0.0;
            if (res.change_found && res.kappa + 1 <= k) {
                decomposed =
                    std::pow(static_cast<double>(scheme.length(k)) *
                                 detail::kl_raw(theta[static_cast<std::size_t>(k)],
                                                theta[static_cast<std::size_t>(res.kappa)]),
                             crits.r);
            }
            if (direct != decomposed) {
                ok = 0;
            }
            loss[static_cast<std::size_t>(rep) * static_cast<std::size_t>(K) + k - 1] = direct;
        }
        identity[static_cast<std::size_t>(rep)] = ok;
    });

    PropagationReport rep_out;
    rep_out.replicates = M;
    rep_out.executions = M;
    const double threshold = crits.alpha * risk_constant(crits.r);
    for (int k = 1; k <= K; ++k) {
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::int64_t repi = 0; repi < M; ++repi) {
            const double v =
                loss[static_cast<std::size_t>(repi) * static_cast<std::size_t>(K) + k - 1];
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / static_cast<double>(M);
        const double sample_var =
            std::max(0.0, sumsq - static_cast<double>(M) * mean * mean) / static_cast<double>(M - 1);
        const double se = std::sqrt(sample_var / static_cast<double>(M));
        const bool pass = mean <= threshold + 3.0 * se;
        rep_out.scales.push_back(PropagationScale{k, mean, se, threshold, pass});
        rep_out.pass = rep_out.pass && pass;
    }
    for (std::int64_t repi = 0; repi < M; ++repi) {
        rep_out.false_alarm_freq += rejected[static_cast<std::size_t>(repi)] != 0 ? 1.0 : 0.0;
        rep_out.identity_ok = rep_out.identity_ok && identity[static_cast<std::size_t>(repi)] != 0;
        rep_out.stability_violations += unstable[static_cast<std::size_t>(repi)] != 0 ? 1 : 0;
    }
    rep_out.false_alarm_freq /= static_cast<double>(M);
    return rep_out;
}

}  // namespace lcp
