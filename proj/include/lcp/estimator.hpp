#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcp/changepoint.hpp"
#include "lcp/core.hpp"
#include "lcp/critical_values.hpp"
#include "lcp/errors.hpp"
#include "lcp/parallel.hpp"
#include "lcp/scheme.hpp"
#include "lcp/series.hpp"

namespace lcp {

struct EstimatorOptions {
    double theta_floor = THETA_FLOOR_DEFAULT;
    /// Triangle constant for the coarse cross-scale stability bound. When
    /// unset it is taken as sqrt(max/min) over the accepted estimates, the
    /// smallest value compatible with the observed parameter range.
    std::optional<double> a_prime;
    bool record_steps = true;
    bool check_stability = true;
};

/// One executed scale of the sweep.
struct StepRecord {
    int k;
    double stat;
    double z;
    std::int64_t tau_hat;
    bool accepted;
};

/// Post-run verification that the accepted estimates form a slowly moving
/// chain. Adjacent accepted scales must satisfy
///   N_k K(theta_k, theta_{k+1}) <= z_k,
/// which is implied by acceptance itself (the left edge of the tested set
/// splits the testing interval into exactly I_k and its complement), and
/// arbitrary accepted pairs must satisfy the coarse bound
///   N_k K(theta_k, theta_k') <= a'^2 c_u^2 max_{l >= k} z_l.
struct StabilityReport {
    bool checked = false;
    bool ok = true;
    double a_prime = 1.0;
    double worst_adjacent = 0.0;  // max of LHS / z_k over adjacent accepted pairs
    double worst_pair = 0.0;      // max of LHS / (a'^2 c_u^2 z_bar) over accepted pairs
};

struct LcpResult {
    Theta theta;             // selected estimate, the fit over `selected`
    int kappa;               // number of accepted scales
    Interval selected;       // longest accepted interval I_kappa
    bool change_found;       // true when some scale rejected
    std::int64_t tau_hat;    // maximizing break of the rejecting scale, -1 otherwise
    bool truncated;          // sweep ran out of history before scale K
    bool degenerate_mle;     // some interval estimate was clamped at the floor
    int scales_run;          // number of scales actually tested
    std::vector<StepRecord> steps;
    StabilityReport stability;
};

/// Adaptive local variance estimate at stamp t_end. Intervals are anchored
/// at the stamp and extend backwards: I_k = [t_end - N_k, t_end), using
/// observations strictly prior to the stamp. Scale k is tested by maximizing
/// the split statistic over the fresh segment J_k = I_k \ I_{k-1} inside the
/// testing interval I_{k+1}; the sweep stops at the first rejection and
/// returns the fit over the last accepted interval. When history is too
/// short for the full scheme the sweep stops at the largest fully available
/// scale and flags the result instead of failing.
inline LcpResult run_lcp(const ReturnSeries& series, std::int64_t t_end,
                         const IntervalScheme& scheme, const CriticalValues& crits,
                         const EstimatorOptions& opts = {}) {
    crits.validate();
    if (crits.scheme_lengths != scheme.lengths()) {
        throw ValueError("critical values were calibrated for a different scheme");
    }
    if (t_end > series.size()) {
        throw GeometryError("stamp " + std::to_string(t_end) + " beyond series of length " +
                            std::to_string(series.size()));
    }
    if (t_end < scheme.length(0)) {
        throw GeometryError("stamp " + std::to_string(t_end) + " has fewer than N_0 = " +
                            std::to_string(scheme.length(0)) + " observations of history");
    }

    const int K = scheme.num_scales();
    bool clamped_any = false;
    std::vector<double> theta_at;  // accepted estimates theta_0..theta_kappa
    theta_at.reserve(static_cast<std::size_t>(K) + 1);
    {
        bool clamped = false;
        theta_at.push_back(
            local_mle(series, {t_end - scheme.length(0), t_end}, opts.theta_floor, &clamped).value);
        clamped_any |= clamped;
    }

    LcpResult out{Theta(theta_at[0]), 0,       {t_end - scheme.length(0), t_end},
                  false,              -1,      false,
                  false,              0,       {},
                  {}};
    if (opts.record_steps) {
        out.steps.reserve(static_cast<std::size_t>(K));
    }

    int kappa = 0;
    for (int k = 1; k <= K; ++k) {
        if (t_end < scheme.testing_length(k)) {
            out.truncated = true;
            break;
        }
        const Interval testing{t_end - scheme.testing_length(k), t_end};
        const Interval tested{t_end - scheme.length(k), t_end - scheme.length(k - 1)};
        const MaxTest test = max_stat(series, testing, tested, opts.theta_floor);
        const double z = crits.z_at(k);
        const bool accepted = !(test.stat > z);
        ++out.scales_run;
        if (opts.record_steps) {
            out.steps.push_back(StepRecord{k, test.stat, z, test.tau_hat, accepted});
        }
        if (!accepted) {
            out.change_found = true;
            out.tau_hat = test.tau_hat;
            break;
        }
        bool clamped = false;
        theta_at.push_back(
            local_mle(series, {t_end - scheme.length(k), t_end}, opts.theta_floor, &clamped).value);
        clamped_any |= clamped;
        kappa = k;
    }

    out.kappa = kappa;
    out.selected = Interval{t_end - scheme.length(kappa), t_end};
    out.theta = Theta(theta_at[static_cast<std::size_t>(kappa)]);
    out.degenerate_mle = clamped_any;

    if (opts.check_stability) {
        StabilityReport& st = out.stability;
        st.checked = true;
        if (kappa >= 1) {
            double lo = theta_at[0];
            double hi = theta_at[0];
            for (int k = 1; k <= kappa; ++k) {
                lo = std::min(lo, theta_at[static_cast<std::size_t>(k)]);
                hi = std::max(hi, theta_at[static_cast<std::size_t>(k)]);
            }
            st.a_prime = opts.a_prime.value_or(std::sqrt(hi / lo));
            if (st.a_prime < 1.0) {
                st.a_prime = 1.0;
            }
            for (int k = 1; k < kappa; ++k) {
                const double lhs = static_cast<double>(scheme.length(k)) *
                                   detail::kl_raw(theta_at[static_cast<std::size_t>(k)],
                                                  theta_at[static_cast<std::size_t>(k + 1)]);
                st.worst_adjacent = std::max(st.worst_adjacent, lhs / crits.z_at(k));
            }
            const double coarse = st.a_prime * st.a_prime * scheme.c_u() * scheme.c_u();
            for (int k = 1; k < kappa; ++k) {
                for (int kp = k + 1; kp <= kappa; ++kp) {
                    const double lhs = static_cast<double>(scheme.length(k)) *
                                       detail::kl_raw(theta_at[static_cast<std::size_t>(k)],
                                                      theta_at[static_cast<std::size_t>(kp)]);
                    st.worst_pair = std::max(st.worst_pair, lhs / (coarse * crits.z_bar(k)));
                }
            }
            st.ok = st.worst_adjacent <= 1.0 && st.worst_pair <= 1.0;
        }
    }
    return out;
}

/// Sweep of run_lcp over [t_begin, t_end). Per-stamp failures are collected,
/// never aborting the remaining stamps. The warmup requirement N_0 + N_1 on
/// the first stamp keeps at least one scale testable everywhere.
struct RollingEstimate {
    std::vector<std::int64_t> stamps;
    std::vector<std::optional<LcpResult>> results;
    std::vector<std::string> errors;  // parallel to stamps, empty when the stamp succeeded
    std::int64_t executions = 0;
    std::int64_t stability_violations = 0;
};

inline RollingEstimate rolling_estimate(const ReturnSeries& series, std::int64_t t_begin,
                                        std::int64_t t_end, const IntervalScheme& scheme,
                                        const CriticalValues& crits,
                                        const EstimatorOptions& opts = {}, int threads = 1) {
    if (t_begin >= t_end) {
        throw ValueError("empty stamp range");
    }
    if (t_begin < scheme.length(0) + scheme.length(1)) {
        throw ValueError("first stamp needs at least N_0 + N_1 = " +
                         std::to_string(scheme.length(0) + scheme.length(1)) +
                         " observations of history");
    }
    if (t_end > series.size()) {
        throw ValueError("stamp range extends beyond the series");
    }
    const std::int64_t n = t_end - t_begin;
    RollingEstimate out;
    out.stamps.resize(static_cast<std::size_t>(n));
    out.results.resize(static_cast<std::size_t>(n));
    out.errors.resize(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](std::int64_t i) {
        const std::int64_t t = t_begin + i;
        out.stamps[static_cast<std::size_t>(i)] = t;
        try {
            out.results[static_cast<std::size_t>(i)] = run_lcp(series, t, scheme, crits, opts);
        } catch (const Error& e) {
            out.errors[static_cast<std::size_t>(i)] = e.what();
        }
    });
    for (const auto& res : out.results) {
        if (res.has_value()) {
            ++out.executions;
            if (res->stability.checked && !res->stability.ok) {
                ++out.stability_violations;
            }
        }
    }
    return out;
}

}  // namespace lcp
