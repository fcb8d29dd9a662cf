#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lcp/calibration.hpp"
#include "lcp/core.hpp"
#include "lcp/critical_values.hpp"
#include "lcp/errors.hpp"
#include "lcp/estimator.hpp"
#include "lcp/rng.hpp"
#include "lcp/scheme.hpp"
#include "lcp/series.hpp"

using namespace lcp;

namespace {

const IntervalScheme& ref_scheme() {
    static const IntervalScheme s = IntervalScheme::reference();
    return s;
}

// One shared Monte Carlo calibration of the reference grid for this binary.
const CriticalValues& ref_crits() {
    static const CriticalValues cv = [] {
        CalibrationConfig cfg;
        cfg.replicates = 2000;
        cfg.seed = 5150;
        return calibrate(ref_scheme(), cfg);
    }();
    return cv;
}

CriticalValues loose_crits(double z) {
    CriticalValues cv;
    cv.z.assign(static_cast<std::size_t>(ref_scheme().num_scales()), z);
    cv.scheme_lengths = ref_scheme().lengths();
    return cv;
}

// Piecewise-constant variance path; segment i holds theta[i] for len[i] steps.
ReturnSeries piecewise_path(const std::vector<std::int64_t>& len, const std::vector<double>& theta,
                            std::uint64_t seed, std::int64_t rep) {
    auto eng = derive_stream(seed, rep);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> r;
    for (std::size_t i = 0; i < len.size(); ++i) {
        const double sd = std::sqrt(theta[i]);
        for (std::int64_t j = 0; j < len[i]; ++j) {
            r.push_back(sd * normal(eng));
        }
    }
    return ReturnSeries(std::move(r));
}

}  // namespace

TEST_CASE("estimator input validation", "[estimator]") {
    const ReturnSeries s = piecewise_path({100}, {1.0}, 1, 0);
    CHECK_THROWS_AS(run_lcp(s, 101, ref_scheme(), ref_crits()), GeometryError);
    CHECK_THROWS_AS(run_lcp(s, 4, ref_scheme(), ref_crits()), GeometryError);
    CHECK_THROWS_AS(run_lcp(s, 92, IntervalScheme::geometric(5, 2.0, 3), ref_crits()), ValueError);
    CriticalValues bad = ref_crits();
    bad.z[0] = -1.0;
    CHECK_THROWS_AS(run_lcp(s, 92, ref_scheme(), bad), ValueError);
}

TEST_CASE("short history truncates the sweep instead of failing", "[estimator]") {
    const ReturnSeries s = piecewise_path({40}, {1.0}, 2, 0);
    const CriticalValues cv = loose_crits(100.0);

    SECTION("sweep stops at the largest scale whose testing interval fits") {
        const LcpResult res = run_lcp(s, 40, ref_scheme(), cv);
        CHECK(res.truncated);
        CHECK(res.scales_run == 7);
        CHECK(res.kappa == 7);
        CHECK_FALSE(res.change_found);
        CHECK(res.tau_hat == -1);
        CHECK(res.selected == Interval{10, 40});
    }
    SECTION("minimal history runs no scale at all") {
        const LcpResult res = run_lcp(s, 5, ref_scheme(), cv);
        CHECK(res.truncated);
        CHECK(res.scales_run == 0);
        CHECK(res.kappa == 0);
        CHECK(res.selected == Interval{0, 5});
        CHECK(res.theta.value == local_mle(s, {0, 5}).value);
    }
    SECTION("full history does not truncate") {
        const ReturnSeries full = piecewise_path({92}, {1.0}, 3, 0);
        CHECK_FALSE(run_lcp(full, 92, ref_scheme(), cv).truncated);
    }
}

TEST_CASE("homogeneous data mostly accepts every scale", "[estimator][slow]") {
    constexpr int reps = 400;
    const int K = ref_scheme().num_scales();
    int full_acceptance = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const ReturnSeries s = piecewise_path({92}, {2.5}, 6001, rep);
        const LcpResult res = run_lcp(s, 92, ref_scheme(), ref_crits());
        REQUIRE_FALSE(res.truncated);

        // Selected estimate is exactly the fit over the selected interval.
        CHECK(res.theta.value == local_mle(s, res.selected).value);
        CHECK(res.selected == Interval{92 - ref_scheme().length(res.kappa), 92});
        CHECK(res.change_found == (res.kappa < K));
        if (res.change_found) {
            // First rejection happened at scale kappa + 1; the break must
            // come from its tested segment.
            const Interval tested{92 - ref_scheme().length(res.kappa + 1),
                                  92 - ref_scheme().length(res.kappa)};
            CHECK(tested.contains(res.tau_hat));
        } else {
            CHECK(res.tau_hat == -1);
        }
        REQUIRE(res.steps.size() == static_cast<std::size_t>(res.scales_run));
        for (std::size_t i = 0; i < res.steps.size(); ++i) {
            CHECK(res.steps[i].k == static_cast<int>(i) + 1);
            CHECK(res.steps[i].accepted == (res.steps[i].stat <= res.steps[i].z));
        }
        if (!res.steps.empty()) {
            CHECK(res.steps.back().accepted == !res.change_found);
        }
        full_acceptance += res.kappa == K ? 1 : 0;
    }
    // Thresholds control the weighted propagation risk, not the raw
    // any-rejection rate, so a sweep across eleven scales keeps a visible
    // false-alarm share. Empirically about 0.69 here.
    CHECK(static_cast<double>(full_acceptance) / reps >= 0.6);
}

TEST_CASE("a variance jump is localized at the matching scale", "[estimator][slow]") {
    // Jump from variance 1 to 9 at index 60, stamp 92: the first seven scales
    // see only post-jump data, scale 8 is the first whose fresh segment
    // reaches across the break.
    constexpr int reps = 200;
    int found = 0;
    int clean_kappa = 0;
    int tau_close = 0;
    int rejected_at_8 = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const ReturnSeries s = piecewise_path({60, 32}, {1.0, 9.0}, 424242, rep);
        const LcpResult res = run_lcp(s, 92, ref_scheme(), ref_crits());
        found += res.change_found ? 1 : 0;
        if (res.change_found) {
            clean_kappa += res.kappa == 7 ? 1 : 0;
            if (res.kappa == 7) {
                ++rejected_at_8;
                CHECK(res.selected == Interval{62, 92});
                CHECK(res.tau_hat >= 54);
                CHECK(res.tau_hat < 62);
                tau_close += std::llabs(res.tau_hat - 60) <= 3 ? 1 : 0;
            }
        }
    }
    CHECK(static_cast<double>(found) / reps >= 0.95);
    // Spurious rejections at finer scales leak some mass below kappa = 7.
    CHECK(static_cast<double>(clean_kappa) / reps >= 0.45);
    if (rejected_at_8 > 0) {
        CHECK(static_cast<double>(tau_close) / rejected_at_8 >= 0.6);
    }
}

TEST_CASE("estimator is deterministic", "[estimator]") {
    const ReturnSeries s = piecewise_path({60, 32}, {1.0, 4.0}, 999, 0);
    const LcpResult a = run_lcp(s, 92, ref_scheme(), ref_crits());
    const LcpResult b = run_lcp(s, 92, ref_scheme(), ref_crits());
    CHECK(a.theta.value == b.theta.value);
    CHECK(a.kappa == b.kappa);
    CHECK(a.tau_hat == b.tau_hat);
    CHECK(a.change_found == b.change_found);
}

TEST_CASE("raising thresholds never shrinks the accepted prefix", "[estimator][slow]") {
    CriticalValues lifted = ref_crits();
    for (double& z : lifted.z) {
        z += 1.0;
    }
    for (int rep = 0; rep < 200; ++rep) {
        const ReturnSeries s = rep % 2 == 0 ? piecewise_path({92}, {1.0}, 777, rep)
                                            : piecewise_path({52, 40}, {1.0, 5.0}, 777, rep);
        const LcpResult base = run_lcp(s, 92, ref_scheme(), ref_crits());
        const LcpResult high = run_lcp(s, 92, ref_scheme(), lifted);
        CHECK(high.kappa >= base.kappa);
    }
}

TEST_CASE("estimator is invariant under return rescaling", "[estimator]") {
    const ReturnSeries base = piecewise_path({60, 32}, {1.0, 4.0}, 31415, 0);

    SECTION("power-of-two factor matches bit for bit") {
        std::vector<double> scaled(static_cast<std::size_t>(base.size()));
        for (std::int64_t i = 0; i < base.size(); ++i) {
            scaled[static_cast<std::size_t>(i)] = 0.25 * base.ret(i);
        }
        const ReturnSeries s{std::move(scaled)};
        const LcpResult a = run_lcp(base, 92, ref_scheme(), ref_crits());
        const LcpResult b = run_lcp(s, 92, ref_scheme(), ref_crits());
        CHECK(b.kappa == a.kappa);
        CHECK(b.tau_hat == a.tau_hat);
        CHECK(b.change_found == a.change_found);
        CHECK(b.theta.value == 0.0625 * a.theta.value);
    }
    SECTION("general factor matches decisions and scales the estimate") {
        std::vector<double> scaled(static_cast<std::size_t>(base.size()));
        for (std::int64_t i = 0; i < base.size(); ++i) {
            scaled[static_cast<std::size_t>(i)] = 10.0 * base.ret(i);
        }
        const ReturnSeries s{std::move(scaled)};
        const LcpResult a = run_lcp(base, 92, ref_scheme(), ref_crits());
        const LcpResult b = run_lcp(s, 92, ref_scheme(), ref_crits());
        CHECK(b.kappa == a.kappa);
        CHECK(b.tau_hat == a.tau_hat);
        CHECK_THAT(b.theta.value, Catch::Matchers::WithinRel(100.0 * a.theta.value, 1e-12));
    }
}

TEST_CASE("accepted estimates form a slowly moving chain", "[estimator][slow]") {
    // Acceptance at scale k bounds N_k K(theta_k, theta_{k+1}) by z_k exactly,
    // because that term is one summand of an accepted split statistic and
    // the remaining summand is non-negative. No tolerance is needed.
    int checked_pairs = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const ReturnSeries s = rep % 2 == 0 ? piecewise_path({92}, {1.5}, 888, rep)
                                            : piecewise_path({46, 46}, {1.0, 6.0}, 888, rep);
        const LcpResult res = run_lcp(s, 92, ref_scheme(), ref_crits());
        REQUIRE(res.stability.checked);
        CHECK(res.stability.ok);
        CHECK(res.stability.worst_adjacent <= 1.0);
        CHECK(res.stability.worst_pair <= 1.0);
        for (int k = 1; k < res.kappa; ++k) {
            const double theta_k =
                local_mle(s, {92 - ref_scheme().length(k), 92}).value;
            const double theta_next =
                local_mle(s, {92 - ref_scheme().length(k + 1), 92}).value;
            const double lhs = static_cast<double>(ref_scheme().length(k)) *
                               kl_divergence(Theta(theta_k), Theta(theta_next));
            CHECK(lhs <= ref_crits().z_at(k));
            ++checked_pairs;
        }
    }
    CHECK(checked_pairs > 500);

    SECTION("an explicit triangle constant is honored") {
        const ReturnSeries s = piecewise_path({92}, {1.0}, 889, 0);
        EstimatorOptions opts;
        opts.a_prime = 50.0;
        const LcpResult res = run_lcp(s, 92, ref_scheme(), ref_crits(), opts);
        CHECK(res.stability.a_prime == 50.0);
        CHECK(res.stability.ok);
    }
    SECTION("stability checking can be disabled") {
        const ReturnSeries s = piecewise_path({92}, {1.0}, 890, 0);
        EstimatorOptions opts;
        opts.check_stability = false;
        CHECK_FALSE(run_lcp(s, 92, ref_scheme(), ref_crits(), opts).stability.checked);
    }
    SECTION("step recording can be disabled") {
        const ReturnSeries s = piecewise_path({92}, {1.0}, 891, 0);
        EstimatorOptions opts;
        opts.record_steps = false;
        CHECK(run_lcp(s, 92, ref_scheme(), ref_crits(), opts).steps.empty());
    }
}

TEST_CASE("default triangle constant tracks the accepted range", "[estimator]") {
    const ReturnSeries s = piecewise_path({92}, {3.0}, 1234, 7);
    const LcpResult res = run_lcp(s, 92, ref_scheme(), ref_crits());
    REQUIRE(res.stability.checked);
    if (res.kappa >= 1) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (int k = 0; k <= res.kappa; ++k) {
            const double v = local_mle(s, {92 - ref_scheme().length(k), 92}).value;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(res.stability.a_prime == std::max(1.0, std::sqrt(hi / lo)));
    }
}

TEST_CASE("all-zero returns clamp at the variance floor", "[estimator]") {
    const ReturnSeries s(std::vector<double>(92, 0.0));
    const LcpResult res = run_lcp(s, 92, ref_scheme(), loose_crits(1.0));
    CHECK(res.degenerate_mle);
    CHECK(res.kappa == ref_scheme().num_scales());
    CHECK_FALSE(res.change_found);
}

TEST_CASE("rolling sweep over a stamp range", "[estimator][slow]") {
    const ReturnSeries s = piecewise_path({120, 80}, {1.0, 5.0}, 5678, 0);

    SECTION("stamp range validation") {
        CHECK_THROWS_AS(rolling_estimate(s, 50, 50, ref_scheme(), ref_crits()), ValueError);
        CHECK_THROWS_AS(rolling_estimate(s, 11, 50, ref_scheme(), ref_crits()), ValueError);
        CHECK_THROWS_AS(rolling_estimate(s, 50, 201, ref_scheme(), ref_crits()), ValueError);
    }
    SECTION("every stamp yields a result") {
        const RollingEstimate roll = rolling_estimate(s, 12, 200, ref_scheme(), ref_crits());
        REQUIRE(roll.stamps.size() == 188);
        CHECK(roll.stamps.front() == 12);
        CHECK(roll.stamps.back() == 199);
        CHECK(roll.executions == 188);
        CHECK(roll.stability_violations == 0);
        for (std::size_t i = 0; i < roll.stamps.size(); ++i) {
            REQUIRE(roll.results[i].has_value());
            CHECK(roll.errors[i].empty());
            CHECK(roll.results[i]->selected.end == roll.stamps[i]);
        }
        // Early stamps cannot host the full scheme, late stamps can.
        CHECK(roll.results.front()->truncated);
        CHECK_FALSE(roll.results.back()->truncated);
    }
    SECTION("thread count does not change the results") {
        const RollingEstimate one = rolling_estimate(s, 100, 160, ref_scheme(), ref_crits());
        const RollingEstimate two = rolling_estimate(s, 100, 160, ref_scheme(), ref_crits(), {}, 2);
        REQUIRE(two.results.size() == one.results.size());
        for (std::size_t i = 0; i < one.results.size(); ++i) {
            CHECK(two.results[i]->theta.value == one.results[i]->theta.value);
            CHECK(two.results[i]->kappa == one.results[i]->kappa);
        }
    }
}
