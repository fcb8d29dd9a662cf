#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "lcp/core.hpp"
#include "lcp/rng.hpp"
#include "lcp/series.hpp"

using namespace lcp;

namespace {

ReturnSeries constant_series(double ret, std::int64_t n) {
    return ReturnSeries(std::vector<double>(static_cast<std::size_t>(n), ret));
}

ReturnSeries gaussian_series(double theta, std::int64_t n, std::uint64_t seed) {
    auto eng = derive_stream(seed, 0);
    std::normal_distribution<double> normal(0.0, std::sqrt(theta));
    std::vector<double> r(static_cast<std::size_t>(n));
    for (auto& x : r) {
        x = normal(eng);
    }
    return ReturnSeries(std::move(r));
}

}  // namespace

TEST_CASE("log returns of prices", "[core]") {
    SECTION("constant prices give zero returns") {
        const ReturnSeries s = log_returns({1.0, 1.0, 1.0});
        REQUIRE(s.size() == 2);
        CHECK(s.ret(0) == 0.0);
        CHECK(s.ret(1) == 0.0);
    }
    SECTION("single e-fold step") {
        const ReturnSeries s = log_returns({1.0, std::exp(1.0)});
        REQUIRE(s.size() == 1);
        CHECK_THAT(s.ret(0), Catch::Matchers::WithinRel(1.0, 1e-15));
    }
    SECTION("general prices") {
        const ReturnSeries s = log_returns({100.0, 101.0, 99.5});
        REQUIRE(s.size() == 2);
        CHECK_THAT(s.ret(0), Catch::Matchers::WithinRel(0.0099503308531680828, 1e-14));
        CHECK_THAT(s.ret(1), Catch::Matchers::WithinRel(-0.014962872676712365, 1e-14));
    }
    SECTION("non-positive price names the offending index") {
        try {
            log_returns({100.0, -1.0, 99.5});
            FAIL("expected a validation error");
        } catch (const ValueError& e) {
            CHECK(std::string(e.what()).find("1") != std::string::npos);
        }
        CHECK_THROWS_AS(log_returns({0.0, 1.0}), ValueError);
        CHECK_THROWS_AS(log_returns({100.0}), ValueError);
    }
}

TEST_CASE("local variance mle", "[core]") {
    SECTION("constant squared returns") {
        const ReturnSeries s = constant_series(2.0, 3);
        CHECK(local_mle(s, s.full()).value == 4.0);
    }
    SECTION("mixed returns") {
        const ReturnSeries s({1.0, -1.0, 3.0, -3.0});
        CHECK_THAT(local_mle(s, s.full()).value, Catch::Matchers::WithinRel(5.0, 1e-15));
    }
    SECTION("subinterval uses only its own observations") {
        const ReturnSeries s({1.0, -1.0, 3.0, -3.0});
        CHECK_THAT(local_mle(s, {2, 4}).value, Catch::Matchers::WithinRel(9.0, 1e-15));
    }
    SECTION("consistency on simulated data") {
        const double theta = 2.5;
        const ReturnSeries s = gaussian_series(theta, 40000, 11);
        const double est = local_mle(s, s.full()).value;
        // relative sampling error of a mean of squares is sqrt(2/n)
        CHECK(std::abs(est - theta) < 5.0 * theta * std::sqrt(2.0 / 40000.0));
    }
    SECTION("degenerate all-zero interval clamps to the floor and flags") {
        const ReturnSeries s({0.0, 0.0, 0.0});
        bool clamped = false;
        const Theta t = local_mle(s, s.full(), 1e-12, &clamped);
        CHECK(t.value == 1e-12);
        CHECK(clamped);
    }
    SECTION("interval validation") {
        const ReturnSeries s({1.0, 2.0});
        CHECK_THROWS_AS(local_mle(s, {0, 3}), GeometryError);
        CHECK_THROWS_AS(local_mle(s, {1, 1}), GeometryError);
        CHECK_THROWS_AS(local_mle(s, {-1, 1}), GeometryError);
    }
}

TEST_CASE("divergence between variance parameters", "[core]") {
    SECTION("zero iff equal") {
        CHECK(kl_divergence(Theta(3.7), Theta(3.7)) == 0.0);
        CHECK(kl_divergence(Theta(2.0), Theta(1.0)) > 0.0);
    }
    SECTION("frozen reference values") {
        CHECK_THAT(kl_divergence(Theta(2.0), Theta(1.0)),
                   Catch::Matchers::WithinRel(0.15342640972002735, 1e-14));
        CHECK_THAT(kl_divergence(Theta(1.0), Theta(2.0)),
                   Catch::Matchers::WithinRel(0.096573590279972655, 1e-14));
    }
    SECTION("nonnegative on random pairs") {
        std::mt19937_64 eng(42);
        std::uniform_real_distribution<double> u(-6.0, 6.0);
        for (int i = 0; i < 10000; ++i) {
            const double a = std::exp(u(eng));
            const double b = std::exp(u(eng));
            CHECK(kl_divergence(Theta(a), Theta(b)) >= 0.0);
        }
    }
    SECTION("invariant under common scaling") {
        std::mt19937_64 eng(43);
        std::uniform_real_distribution<double> u(0.1, 10.0);
        for (int i = 0; i < 2000; ++i) {
            const double a = u(eng);
            const double b = u(eng);
            const double base = kl_divergence(Theta(a), Theta(b));
            // powers of two rescale both arguments without rounding
            CHECK(kl_divergence(Theta(0.25 * a), Theta(0.25 * b)) == base);
            CHECK(kl_divergence(Theta(1024.0 * a), Theta(1024.0 * b)) == base);
            const double c = u(eng);
            CHECK_THAT(kl_divergence(Theta(c * a), Theta(c * b)),
                       Catch::Matchers::WithinAbs(base, 1e-12 * (1.0 + base)));
        }
    }
    SECTION("domain validation") {
        CHECK_THROWS_AS(Theta(0.0), ValueError);
        CHECK_THROWS_AS(Theta(-1.0), ValueError);
        CHECK_THROWS_AS(Theta(std::numeric_limits<double>::infinity()), ValueError);
        CHECK_THROWS_AS(Theta(std::numeric_limits<double>::quiet_NaN()), ValueError);
    }
}

TEST_CASE("mle scale equivariance", "[core]") {
    std::mt19937_64 eng(44);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> r(64);
    for (auto& x : r) {
        x = normal(eng);
    }
    const ReturnSeries base{std::vector<double>(r)};
    const double m0 = local_mle(base, base.full()).value;
    for (const double c : {0.5, 3.0, 10.0}) {
        std::vector<double> scaled(r);
        for (auto& x : scaled) {
            x *= c;
        }
        const ReturnSeries s(std::move(scaled));
        CHECK_THAT(local_mle(s, s.full()).value, Catch::Matchers::WithinRel(c * c * m0, 1e-12));
    }
}

TEST_CASE("fitted likelihood ratio", "[core]") {
    SECTION("zero at the mle") {
        const ReturnSeries s({1.0, -2.0, 0.5, 1.5});
        const Theta mle = local_mle(s, s.full());
        CHECK(fitted_loglik_ratio(s, s.full(), mle) == 0.0);
    }
    SECTION("frozen composition") {
        const ReturnSeries s = constant_series(std::sqrt(2.0), 10);
        CHECK_THAT(fitted_loglik_ratio(s, s.full(), Theta(1.0)),
                   Catch::Matchers::WithinRel(1.5342640972002735, 1e-12));
    }
    SECTION("matches the direct likelihood difference") {
        std::mt19937_64 eng(45);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> logth(-3.0, 3.0);
        for (int i = 0; i < 500; ++i) {
            std::vector<double> r(5 + static_cast<std::size_t>(eng() % 80));
            for (auto& x : r) {
                x = 0.7 * normal(eng);
            }
            const ReturnSeries s(std::move(r));
            const Theta theta(std::exp(logth(eng)));
            const Theta mle = local_mle(s, s.full());
            const double via_kl = fitted_loglik_ratio(s, s.full(), theta);
            const double direct =
                interval_loglik(s, s.full(), mle) - interval_loglik(s, s.full(), theta);
            const double scale = std::max({std::abs(via_kl), std::abs(direct), 1e-12});
            CHECK(std::abs(via_kl - direct) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("likelihood is maximized at the mle", "[core]") {
    const ReturnSeries s = gaussian_series(1.3, 200, 12);
    const Theta mle = local_mle(s, s.full());
    const double at_mle = interval_loglik(s, s.full(), mle);
    for (const double f : {0.5, 0.9, 1.1, 2.0}) {
        CHECK(interval_loglik(s, s.full(), Theta(f * mle.value)) <= at_mle);
    }
}

TEST_CASE("confidence set", "[core]") {
    SECTION("level translates to the tail crossing") {
        const ReturnSeries s = constant_series(1.0, 100);
        const ConfidenceBand band = confidence_set(s, s.full(), 0.05);
        CHECK_THAT(band.z, Catch::Matchers::WithinRel(3.6888794541139363, 1e-14));
        CHECK(band.lo.value < 1.0);
        CHECK(band.hi.value > 1.0);
        // both roots solve N K(mle, root) = z
        CHECK_THAT(100.0 * kl_divergence(Theta(1.0), band.lo),
                   Catch::Matchers::WithinAbs(band.z, 1e-8));
        CHECK_THAT(100.0 * kl_divergence(Theta(1.0), band.hi),
                   Catch::Matchers::WithinAbs(band.z, 1e-8));
    }
    SECTION("band shrinks with growing interval") {
        const ReturnSeries small = constant_series(1.0, 50);
        const ReturnSeries large = constant_series(1.0, 5000);
        const ConfidenceBand a = confidence_set(small, small.full(), 0.1);
        const ConfidenceBand b = confidence_set(large, large.full(), 0.1);
        CHECK(b.hi.value - b.lo.value < a.hi.value - a.lo.value);
    }
    SECTION("alpha validation") {
        const ReturnSeries s = constant_series(1.0, 10);
        CHECK_THROWS_AS(confidence_set(s, s.full(), 0.0), ValueError);
        CHECK_THROWS_AS(confidence_set(s, s.full(), 1.0), ValueError);
    }
    SECTION("empirical coverage meets the level") {
        const double theta = 1.0;
        const double alpha = 0.2;
        const int m = 2000;
        int covered = 0;
        for (int rep = 0; rep < m; ++rep) {
            auto eng = derive_stream(202, rep);
            std::normal_distribution<double> normal(0.0, 1.0);
            std::vector<double> r(50);
            for (auto& x : r) {
                x = normal(eng);
            }
            const ReturnSeries s(std::move(r));
            const ConfidenceBand band = confidence_set(s, s.full(), alpha);
            if (band.lo.value <= theta && theta <= band.hi.value) {
                ++covered;
            }
        }
        const double cov = static_cast<double>(covered) / m;
        const double se = std::sqrt(cov * (1.0 - cov) / m);
        CHECK(cov >= 1.0 - alpha - 3.0 * se);
    }
}

TEST_CASE("risk constant", "[core]") {
    CHECK_THAT(risk_constant(1.0), Catch::Matchers::WithinRel(2.0, 1e-14));
    CHECK_THAT(risk_constant(0.5), Catch::Matchers::WithinRel(1.772453850905516, 1e-13));
    CHECK_THAT(risk_constant(2.0), Catch::Matchers::WithinRel(4.0, 1e-14));
    CHECK_THROWS_AS(risk_constant(0.0), ValueError);
    CHECK_THROWS_AS(risk_constant(-0.5), ValueError);
}

TEST_CASE("modeling bias against the true variance path", "[core]") {
    SECTION("exact parametric fit has zero bias") {
        const ReturnSeries s(std::vector<double>(20, 0.3), std::vector<double>(20, 1.7));
        CHECK(modeling_bias(s, s.full(), Theta(1.7)) == 0.0);
    }
    SECTION("frozen composition") {
        const ReturnSeries s(std::vector<double>(5, 0.1), std::vector<double>(5, 2.0));
        CHECK_THAT(modeling_bias(s, s.full(), Theta(1.0)),
                   Catch::Matchers::WithinRel(0.76713204860013673, 1e-13));
    }
    SECTION("monotone under leftward extension") {
        std::vector<double> vol(30, 1.0);
        for (std::size_t i = 0; i < 10; ++i) {
            vol[i] = 4.0;
        }
        const ReturnSeries s(std::vector<double>(30, 0.2), std::move(vol));
        double prev = -1.0;
        for (std::int64_t start = 25; start >= 0; --start) {
            const double bias = modeling_bias(s, {start, 30}, Theta(1.1));
            CHECK(bias >= prev);
            prev = bias;
        }
    }
    SECTION("requires a true variance path") {
        const ReturnSeries s({0.1, 0.2});
        CHECK_THROWS_AS(modeling_bias(s, s.full(), Theta(1.0)), ValueError);
    }
}

TEST_CASE("square root divergence triangle bound", "[core]") {
    // Admissible parameters live in [lo, hi]; the configured constant is
    // sqrt(hi / lo), the smallest value compatible with that range. The
    // empirically smallest constant on the grid is reported for reference.
    std::mt19937_64 eng(46);
    const double lo = 0.5;
    const double hi = 8.0;
    const double a_prime = std::sqrt(hi / lo);
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    double worst = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double t1 = std::exp(u(eng));
        const double t2 = std::exp(u(eng));
        const double t0 = std::exp(u(eng));
        const double num = std::sqrt(kl_divergence(Theta(t1), Theta(t2)));
        const double den = std::sqrt(kl_divergence(Theta(t1), Theta(t0))) +
                           std::sqrt(kl_divergence(Theta(t2), Theta(t0)));
        if (den > 0.0) {
            worst = std::max(worst, num / den);
        }
    }
    INFO("empirically smallest admissible constant: " << worst << ", configured: " << a_prime);
    CHECK(worst <= a_prime);
}

TEST_CASE("series storage and prefix sums", "[core]") {
    SECTION("sum of squares matches direct accumulation") {
        const ReturnSeries s = gaussian_series(0.8, 500, 13);
        double direct = 0.0;
        for (std::int64_t i = 100; i < 400; ++i) {
            direct += s.ret(i) * s.ret(i);
        }
        CHECK_THAT(s.sum_sq({100, 400}), Catch::Matchers::WithinRel(direct, 1e-12));
    }
    SECTION("input validation") {
        CHECK_THROWS_AS(ReturnSeries(std::vector<double>{}), ValueError);
        CHECK_THROWS_AS(ReturnSeries({1.0, std::numeric_limits<double>::quiet_NaN()}), ValueError);
        CHECK_THROWS_AS(ReturnSeries({1.0, 2.0}, {1.0, -1.0}), ValueError);
        CHECK_THROWS_AS(ReturnSeries({1.0, 2.0}, {1.0}), ValueError);
    }
    SECTION("true variance access") {
        const ReturnSeries s({0.1, 0.2}, {1.0, 4.0});
        CHECK(s.has_true_vol());
        CHECK(s.true_vol(1) == 4.0);
        const ReturnSeries bare({0.1, 0.2});
        CHECK_FALSE(bare.has_true_vol());
        CHECK_THROWS_AS(bare.true_vol(0), ValueError);
    }
}
