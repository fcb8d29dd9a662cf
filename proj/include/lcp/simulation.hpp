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
#include "lcp/distributions.hpp"
#include "lcp/errors.hpp"
#include "lcp/estimator.hpp"
#include "lcp/parallel.hpp"
#include "lcp/rng.hpp"
#include "lcp/scheme.hpp"
#include "lcp/series.hpp"

namespace lcp {

/// Piecewise constant variance specification: consecutive segments of given
/// length and variance level, with unit-variance innovations drawn from the
/// configured law.
struct JumpSegment {
    std::int64_t length;
    double sigma2;
};

struct JumpSpec {
    std::vector<JumpSegment> segments;
    InnovationLaw law = InnovationLaw::gaussian;

    [[nodiscard]] std::int64_t total_length() const {
        std::int64_t n = 0;
        for (const auto& s : segments) {
            n += s.length;
        }
        return n;
    }

    /// Indices where a new segment starts (excluding zero).
    [[nodiscard]] std::vector<std::int64_t> change_points() const {
        std::vector<std::int64_t> cps;
        std::int64_t at = 0;
        for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
            at += segments[i].length;
            cps.push_back(at);
        }
        return cps;
    }

    void validate() const {
        if (segments.empty()) {
            throw ValueError("jump specification needs at least one segment");
        }
        for (const auto& s : segments) {
            if (s.length < 1) {
                throw ValueError("segment length must be at least 1");
            }
            if (!(s.sigma2 > 0.0) || !std::isfinite(s.sigma2)) {
                throw ValueError("segment variance must be positive and finite");
            }
        }
    }
};

/// Default study design: equally long segments at unit base variance
/// alternating up to the given relative magnitude and back.
[[nodiscard]] inline JumpSpec two_segment_spec(double magnitude, std::int64_t segment_length = 150,
                                               InnovationLaw law = InnovationLaw::gaussian) {
    if (!(magnitude > 0.0)) {
        throw ValueError("jump magnitude must be positive");
    }
    JumpSpec spec;
    spec.segments = {JumpSegment{segment_length, 1.0}, JumpSegment{segment_length, magnitude}};
    spec.law = law;
    return spec;
}

/// R_t = sqrt(f(t)) eps_t with f the piecewise constant variance and eps
/// unit-variance innovations from the replicate's private stream. The true
/// variance path is stored alongside the returns.
[[nodiscard]] inline ReturnSeries simulate_jump_process(const JumpSpec& spec, std::uint64_t seed,
                                                        std::int64_t replicate) {
    spec.validate();
    auto engine = derive_stream(seed, replicate);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::student_t_distribution<double> student(5.0);
    const double t_scale = 1.0 / std::sqrt(5.0 / 3.0);
    const std::int64_t n = spec.total_length();
    std::vector<double> r;
    std::vector<double> vol;
    r.reserve(static_cast<std::size_t>(n));
    vol.reserve(static_cast<std::size_t>(n));
    for (const auto& seg : spec.segments) {
        const double sd = std::sqrt(seg.sigma2);
        for (std::int64_t i = 0; i < seg.length; ++i) {
            double eps = 0.0;
            switch (spec.law) {
                case InnovationLaw::gaussian:
                    eps = normal(engine);
                    break;
                case InnovationLaw::student5:
                    eps = student(engine) * t_scale;
                    break;
                case InnovationLaw::empirical:
                    throw ValueError("cannot simulate from the empirical law");
            }
            r.push_back(sd * eps);
            vol.push_back(seg.sigma2);
        }
    }
    return ReturnSeries(std::move(r), std::move(vol));
}

struct StudyConfig {
    JumpSpec spec;
    IntervalScheme scheme = IntervalScheme::reference();
    CriticalValues crits;
    std::int64_t replicates = 1000;
    std::uint64_t seed = 7777;
    std::int64_t t_begin = -1;  // default: scheme.max_history() + 1
    EstimatorOptions est;
    int threads = 1;
};

/// Detection delay summary for one configured change point: the first stamp
/// whose selected interval no longer reaches back across the change.
struct DelayStats {
    std::int64_t change_at;
    double mean = 0.0;
    double median = 0.0;
    std::int64_t censored = 0;  // replicates that never localized the change
};

struct StudySummary {
    std::vector<std::int64_t> stamps;
    std::vector<double> truth;  // true variance at each stamp
    std::vector<double> theta_q25, theta_q50, theta_q75;
    std::vector<double> len_q25, len_q50, len_q75;
    std::vector<DelayStats> delays;
    std::int64_t replicates = 0;
    std::int64_t executions = 0;
    std::int64_t stability_violations = 0;
};

/// Replicated rolling estimation over simulated jump paths, summarized by
/// per-stamp quartiles of the estimate and of the selected interval length.
inline StudySummary replicate_study(const StudyConfig& cfg) {
    cfg.spec.validate();
    cfg.crits.validate();
    if (cfg.replicates < 1) {
        throw ValueError("need at least one replicate");
    }
    const std::int64_t n = cfg.spec.total_length();
    const std::int64_t warmup = cfg.scheme.length(0) + cfg.scheme.length(1);
    std::int64_t t_begin = cfg.t_begin >= 0 ? cfg.t_begin : cfg.scheme.max_history() + 1;
    t_begin = std::max(t_begin, warmup);
    if (t_begin >= n) {
        throw ValueError("no stamps to estimate: path length " + std::to_string(n) +
                         " does not exceed the warmup " + std::to_string(t_begin));
    }
    const std::int64_t stamps = n - t_begin;
    const std::int64_t m = cfg.replicates;

    std::vector<double> theta_all(static_cast<std::size_t>(stamps * m));
    std::vector<double> len_all(static_cast<std::size_t>(stamps * m));
    std::vector<std::int64_t> exec(static_cast<std::size_t>(m), 0);
    std::vector<std::int64_t> viol(static_cast<std::size_t>(m), 0);
    const auto cps = cfg.spec.change_points();
    // delay_all[c * m + rep], -1 when censored
    std::vector<std::int64_t> delay_all(cps.size() * static_cast<std::size_t>(m), -1);

    parallel_for(m, cfg.threads, [&](std::int64_t rep) {
        const ReturnSeries path = simulate_jump_process(cfg.spec, cfg.seed, rep);
        const RollingEstimate roll =
            rolling_estimate(path, t_begin, n, cfg.scheme, cfg.crits, cfg.est, 1);
        exec[static_cast<std::size_t>(rep)] = roll.executions;
        viol[static_cast<std::size_t>(rep)] = roll.stability_violations;
        for (std::int64_t i = 0; i < stamps; ++i) {
            const auto& res = roll.results[static_cast<std::size_t>(i)];
            if (!res.has_value()) {
                throw Error("stamp " + std::to_string(t_begin + i) + " failed: " +
                            roll.errors[static_cast<std::size_t>(i)]);
            }
            theta_all[static_cast<std::size_t>(i * m + rep)] = res->theta.value;
            len_all[static_cast<std::size_t>(i * m + rep)] =
                static_cast<double>(res->selected.length());
        }
        for (std::size_t c = 0; c < cps.size(); ++c) {
            const std::int64_t nu = cps[c];
            for (std::int64_t t = std::max(nu + 1, t_begin); t < n; ++t) {
                const auto& res = roll.results[static_cast<std::size_t>(t - t_begin)];
                if (res->selected.start >= nu) {
                    delay_all[c * static_cast<std::size_t>(m) + static_cast<std::size_t>(rep)] =
                        t - nu;
                    break;
                }
            }
        }
    });

    StudySummary out;
    out.replicates = m;
    out.stamps.resize(static_cast<std::size_t>(stamps));
    out.truth.resize(static_cast<std::size_t>(stamps));
    out.theta_q25.resize(static_cast<std::size_t>(stamps));
    out.theta_q50.resize(static_cast<std::size_t>(stamps));
    out.theta_q75.resize(static_cast<std::size_t>(stamps));
    out.len_q25.resize(static_cast<std::size_t>(stamps));
    out.len_q50.resize(static_cast<std::size_t>(stamps));
    out.len_q75.resize(static_cast<std::size_t>(stamps));
    {
        // truth lookup from one replicate's stored path (identical across replicates)
        const ReturnSeries path = simulate_jump_process(cfg.spec, cfg.seed, 0);
        for (std::int64_t i = 0; i < stamps; ++i) {
            out.stamps[static_cast<std::size_t>(i)] = t_begin + i;
            out.truth[static_cast<std::size_t>(i)] = path.true_vol(t_begin + i);
        }
    }
    std::vector<double> buf(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < stamps; ++i) {
        std::copy_n(theta_all.begin() + i * m, m, buf.begin());
        std::sort(buf.begin(), buf.end());
        out.theta_q25[static_cast<std::size_t>(i)] = empirical_quantile_sorted(buf, 0.25);
        out.theta_q50[static_cast<std::size_t>(i)] = empirical_quantile_sorted(buf, 0.50);
        out.theta_q75[static_cast<std::size_t>(i)] = empirical_quantile_sorted(buf, 0.75);
        std::copy_n(len_all.begin() + i * m, m, buf.begin());
        std::sort(buf.begin(), buf.end());
        out.len_q25[static_cast<std::size_t>(i)] = empirical_quantile_sorted(buf, 0.25);
        out.len_q50[static_cast<std::size_t>(i)] = empirical_quantile_sorted(buf, 0.50);
        out.len_q75[static_cast<std::size_t>(i)] = empirical_quantile_sorted(buf, 0.75);
    }
    for (std::size_t c = 0; c < cps.size(); ++c) {
        DelayStats ds;
        ds.change_at = cps[c];
        std::vector<double> delays;
        for (std::int64_t rep = 0; rep < m; ++rep) {
            const std::int64_t d =
                delay_all[c * static_cast<std::size_t>(m) + static_cast<std::size_t>(rep)];
            if (d < 0) {
                ++ds.censored;
            } else {
                delays.push_back(static_cast<double>(d));
            }
        }
        if (!delays.empty()) {
            double sum = 0.0;
            for (double d : delays) {
                sum += d;
            }
            ds.mean = sum / static_cast<double>(delays.size());
            std::sort(delays.begin(), delays.end());
            ds.median = empirical_quantile_sorted(delays, 0.5);
        }
        out.delays.push_back(ds);
    }
    for (std::int64_t rep = 0; rep < m; ++rep) {
        out.executions += exec[static_cast<std::size_t>(rep)];
        out.stability_violations += viol[static_cast<std::size_t>(rep)];
    }
    return out;
}

/// Single-break power experiment. The path holds theta_before up to the
/// break and theta_after for the final `offset` observations before the
/// stamp, with the break located in the tested set of scale k_star + 1. The
/// detectability condition compares the interval-length-weighted squared
/// contrast against the scale's threshold plus a slack z:
///   N_{k*+2} d^2(theta', theta'') >= 2 a'^2 (z_{k*+1} + z),
/// and when it holds the probability that scale k_star + 1 is NOT rejected
/// is at most 4 exp(-z).
struct SensitivityConfig {
    IntervalScheme scheme = IntervalScheme::reference();
    CriticalValues crits;
    int k_star = 1;
    double theta_before = 1.0;
    double theta_after = 4.0;
    std::int64_t offset = -1;  // stamp - break; default: midpoint of the tested set
    double z_slack = 3.0;
    std::optional<double> a_prime;  // default sqrt(theta ratio)
    std::int64_t replicates = 10000;
    std::uint64_t seed = 4242;
    InnovationLaw law = InnovationLaw::gaussian;
    double theta_floor = THETA_FLOOR_DEFAULT;
    int threads = 1;
};

struct SensitivityReport {
    double d2 = 0.0;
    double condition_lhs = 0.0;
    double condition_rhs = 0.0;
    bool condition_met = false;
    double a_prime = 1.0;
    double z_slack = 0.0;
    double z_implied = 0.0;  // largest z the geometry supports
    double non_rejection_freq = 0.0;
    double bound = 0.0;  // 4 exp(-z_slack)
    double se = 0.0;
    std::int64_t replicates = 0;
    std::int64_t executions = 0;
    std::int64_t stability_violations = 0;
};

inline SensitivityReport sensitivity_experiment(const SensitivityConfig& cfg) {
    cfg.crits.validate();
    if (cfg.crits.scheme_lengths != cfg.scheme.lengths()) {
        throw ValueError("critical values were calibrated for a different scheme");
    }
    const int K = cfg.scheme.num_scales();
    if (cfg.k_star < 0 || cfg.k_star + 1 > K) {
        throw ValueError("k_star + 1 must be a testable scale");
    }
    if (!(cfg.theta_before > 0.0) || !(cfg.theta_after > 0.0)) {
        throw ValueError("regime variances must be positive");
    }
    const std::int64_t n_k = cfg.scheme.length(cfg.k_star);
    const std::int64_t n_k1 = cfg.scheme.length(cfg.k_star + 1);
    const std::int64_t n_k2 = cfg.scheme.length(cfg.k_star + 2);
    std::int64_t offset = cfg.offset >= 0 ? cfg.offset : (n_k + n_k1 + 1) / 2;
    if (offset <= n_k || offset > n_k1) {
        throw ValueError("break offset " + std::to_string(offset) +
                         " must place the break inside the tested set of scale " +
                         std::to_string(cfg.k_star + 1) + ", i.e. in (" + std::to_string(n_k) +
                         ", " + std::to_string(n_k1) + "]");
    }
    if (cfg.replicates < 100) {
        throw ValueError("need at least 100 replicates");
    }

    SensitivityReport report;
    report.z_slack = cfg.z_slack;
    const double c1 = static_cast<double>(n_k) / static_cast<double>(n_k2);
    const double c2 = static_cast<double>(n_k1) / static_cast<double>(n_k2);
    report.d2 = change_contrast(Theta(cfg.theta_before), Theta(cfg.theta_after), c1, c2);
    const double ratio = std::max(cfg.theta_after / cfg.theta_before,
                                  cfg.theta_before / cfg.theta_after);
    report.a_prime = cfg.a_prime.value_or(std::sqrt(ratio));
    report.condition_lhs = static_cast<double>(n_k2) * report.d2;
    report.condition_rhs =
        2.0 * report.a_prime * report.a_prime * (cfg.crits.z_at(cfg.k_star + 1) + cfg.z_slack);
    report.condition_met = report.condition_lhs >= report.condition_rhs;
    report.z_implied = report.condition_lhs / (2.0 * report.a_prime * report.a_prime) -
                       cfg.crits.z_at(cfg.k_star + 1);
    report.bound = 4.0 * std::exp(-cfg.z_slack);
    report.replicates = cfg.replicates;

    JumpSpec spec;
    spec.law = cfg.law;
    spec.segments = {JumpSegment{n_k2 - offset, cfg.theta_before},
                     JumpSegment{offset, cfg.theta_after}};

    EstimatorOptions opts;
    opts.theta_floor = cfg.theta_floor;
    opts.record_steps = true;
    opts.check_stability = true;

    std::vector<char> missed(static_cast<std::size_t>(cfg.replicates));
    std::vector<char> unstable(static_cast<std::size_t>(cfg.replicates));
    parallel_for(cfg.replicates, cfg.threads, [&](std::int64_t rep) {
        const ReturnSeries path = simulate_jump_process(spec, cfg.seed, rep);
        const LcpResult res = run_lcp(path, n_k2, cfg.scheme, cfg.crits, opts);
        // Scale k_star + 1 escapes rejection exactly when the sweep accepts
        // through it.
        missed[static_cast<std::size_t>(rep)] = res.kappa >= cfg.k_star + 1 ? 1 : 0;
        unstable[static_cast<std::size_t>(rep)] =
            res.stability.checked && !res.stability.ok ? 1 : 0;
    });
    std::int64_t miss_count = 0;
    for (std::int64_t rep = 0; rep < cfg.replicates; ++rep) {
        miss_count += missed[static_cast<std::size_t>(rep)] != 0 ? 1 : 0;
        report.stability_violations += unstable[static_cast<std::size_t>(rep)] != 0 ? 1 : 0;
    }
    report.executions = cfg.replicates;
    report.non_rejection_freq =
        static_cast<double>(miss_count) / static_cast<double>(cfg.replicates);
    report.se = std::sqrt(report.non_rejection_freq * (1.0 - report.non_rejection_freq) /
                          static_cast<double>(cfg.replicates));
    return report;
}

/// Detection delay for a single variance break: replicates a two-segment
/// path and measures, per replicate, how many observations after the break
/// the selected interval first stops reaching across it.
[[nodiscard]] inline DelayStats detection_delay(double theta_before, double theta_after,
                                                const IntervalScheme& scheme,
                                                const CriticalValues& crits,
                                                std::int64_t replicates, std::uint64_t seed,
                                                std::int64_t post_length = 400,
                                                InnovationLaw law = InnovationLaw::gaussian,
                                                int threads = 1) {
    StudyConfig cfg;
    cfg.spec.law = law;
    cfg.spec.segments = {JumpSegment{scheme.max_history() + 1, theta_before},
                         JumpSegment{post_length, theta_after}};
    cfg.scheme = scheme;
    cfg.crits = crits;
    cfg.replicates = replicates;
    cfg.seed = seed;
    cfg.threads = threads;
    const StudySummary summary = replicate_study(cfg);
    return summary.delays.at(0);
}

/// Comparison of the adaptive estimate against the truth-aware benchmark at
/// the final stamp of the simulated path. The benchmark scale k_star is the
/// largest one whose interval avoids the most recent break; per replicate
/// the distance of the adaptive estimate from the benchmark estimate is the
/// interval-weighted divergence N_{k*} K(theta_kstar, theta_hat), set
/// against the benchmark's own distance from the true variance.
struct OracleComparison {
    int k_star = 0;
    double z_bar_kstar = 0.0;
    double adaptive_q25 = 0.0, adaptive_q50 = 0.0, adaptive_q75 = 0.0;
    double oracle_q25 = 0.0, oracle_q50 = 0.0, oracle_q75 = 0.0;
    // median sqrt(adaptive loss) relative to sqrt(z_bar_kstar)
    double median_inflation = 0.0;
    double full_acceptance_freq = 0.0;  // fraction of replicates with kappa = K
    std::int64_t replicates = 0;
    std::int64_t executions = 0;
    std::int64_t stability_violations = 0;
};

inline OracleComparison oracle_comparison(const JumpSpec& spec, const IntervalScheme& scheme,
                                          const CriticalValues& crits, std::int64_t replicates,
                                          std::uint64_t seed, int threads = 1,
                                          double theta_floor = THETA_FLOOR_DEFAULT) {
    spec.validate();
    crits.validate();
    if (crits.scheme_lengths != scheme.lengths()) {
        throw ValueError("critical values were calibrated for a different scheme");
    }
    if (replicates < 100) {
        throw ValueError("need at least 100 replicates");
    }
    const std::int64_t t = spec.total_length();
    if (t < scheme.length(0) + scheme.length(1)) {
        throw ValueError("path too short for the smallest testing interval");
    }
    const int K = scheme.num_scales();
    const auto cps = spec.change_points();
    const std::int64_t last_change = cps.empty() ? 0 : cps.back();
    int k_star = -1;
    for (int k = 0; k <= K; ++k) {
        if (scheme.length(k) <= t - last_change) {
            k_star = k;
        }
    }
    if (k_star < 0) {
        throw ValueError("no interval fits between the last break and the stamp");
    }
    const double theta_star = spec.segments.back().sigma2;
    const std::int64_t n_star = scheme.length(k_star);
    const Interval oracle_iv{t - n_star, t};

    EstimatorOptions opts;
    opts.theta_floor = theta_floor;
    opts.check_stability = true;

    std::vector<double> adaptive(static_cast<std::size_t>(replicates));
    std::vector<double> oracle(static_cast<std::size_t>(replicates));
    std::vector<char> full(static_cast<std::size_t>(replicates));
    std::vector<char> unstable(static_cast<std::size_t>(replicates));
    parallel_for(replicates, threads, [&](std::int64_t rep) {
        const ReturnSeries path = simulate_jump_process(spec, seed, rep);
        const Theta theta_k = local_mle(path, oracle_iv, theta_floor);
        const LcpResult res = run_lcp(path, t, scheme, crits, opts);
        adaptive[static_cast<std::size_t>(rep)] =
            static_cast<double>(n_star) * kl_divergence(theta_k, res.theta);
        oracle[static_cast<std::size_t>(rep)] =
            static_cast<double>(n_star) * kl_divergence(theta_k, Theta(theta_star));
        full[static_cast<std::size_t>(rep)] = res.kappa == K ? 1 : 0;
        unstable[static_cast<std::size_t>(rep)] =
            res.stability.checked && !res.stability.ok ? 1 : 0;
    });

    OracleComparison out;
    out.k_star = k_star;
    out.z_bar_kstar = crits.z_bar(std::max(k_star, 1));
    out.replicates = replicates;
    out.executions = replicates;
    std::int64_t full_count = 0;
    for (std::int64_t rep = 0; rep < replicates; ++rep) {
        full_count += full[static_cast<std::size_t>(rep)] != 0 ? 1 : 0;
        out.stability_violations += unstable[static_cast<std::size_t>(rep)] != 0 ? 1 : 0;
    }
    out.full_acceptance_freq = static_cast<double>(full_count) / static_cast<double>(replicates);
    std::sort(adaptive.begin(), adaptive.end());
    std::sort(oracle.begin(), oracle.end());
    out.adaptive_q25 = empirical_quantile_sorted(adaptive, 0.25);
    out.adaptive_q50 = empirical_quantile_sorted(adaptive, 0.50);
    out.adaptive_q75 = empirical_quantile_sorted(adaptive, 0.75);
    out.oracle_q25 = empirical_quantile_sorted(oracle, 0.25);
    out.oracle_q50 = empirical_quantile_sorted(oracle, 0.50);
    out.oracle_q75 = empirical_quantile_sorted(oracle, 0.75);
    out.median_inflation = std::sqrt(out.adaptive_q50) / std::sqrt(out.z_bar_kstar);
    return out;
}

}  // namespace lcp
