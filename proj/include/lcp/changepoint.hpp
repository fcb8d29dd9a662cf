#pragma once

#include <cstdint>
#include <string>

#include "lcp/core.hpp"
#include "lcp/errors.hpp"
#include "lcp/series.hpp"

namespace lcp {

/// Likelihood-ratio statistic for a single candidate break point tau inside
/// a testing interval I = [start, end): the break splits I into
/// left = [start, tau) and right = [tau, end), and
///   T = N_right K(mle_right, mle_I) + N_left K(mle_left, mle_I).
/// This equals the raw sup-likelihood form
///   max_{u', u''} [L_left(u') + L_right(u'')] - max_u L_I(u),
/// evaluated in closed form through the fitted-ratio identity.
struct SplitTest {
    std::int64_t tau;
    double stat;
    Interval left;
    Interval right;
    double theta_left;
    double theta_right;
    double theta_full;
};

[[nodiscard]] inline SplitTest split_stat(const ReturnSeries& series, Interval testing,
                                          std::int64_t tau,
                                          double theta_floor = THETA_FLOOR_DEFAULT) {
    series.check_interval(testing);
    if (tau <= testing.start || tau >= testing.end) {
        throw GeometryError("split point " + std::to_string(tau) +
                            " must lie strictly inside the testing interval [" +
                            std::to_string(testing.start) + ", " + std::to_string(testing.end) + ")");
    }
    const Interval left{testing.start, tau};
    const Interval right{tau, testing.end};
    const Theta th_full = local_mle(series, testing, theta_floor);
    const Theta th_left = local_mle(series, left, theta_floor);
    const Theta th_right = local_mle(series, right, theta_floor);
    const double stat =
        static_cast<double>(right.length()) * detail::kl_raw(th_right.value, th_full.value) +
        static_cast<double>(left.length()) * detail::kl_raw(th_left.value, th_full.value);
    return SplitTest{tau, stat, left, right, th_left.value, th_right.value, th_full.value};
}

/// Maximum of split_stat over every candidate break in `tested`, with the
/// smallest maximizer reported on ties. Evaluation order is fixed
/// (ascending tau), so results do not depend on any scheduling.
struct MaxTest {
    double stat;
    std::int64_t tau_hat;
};

[[nodiscard]] inline MaxTest max_stat(const ReturnSeries& series, Interval testing, Interval tested,
                                      double theta_floor = THETA_FLOOR_DEFAULT) {
    series.check_interval(testing);
    if (tested.empty()) {
        throw GeometryError("tested set is empty");
    }
    if (tested.start <= testing.start || tested.end > testing.end) {
        throw GeometryError("tested set [" + std::to_string(tested.start) + ", " +
                            std::to_string(tested.end) + ") must lie strictly inside the testing interval [" +
                            std::to_string(testing.start) + ", " + std::to_string(testing.end) + ")");
    }
    double best = -1.0;
    std::int64_t best_tau = tested.start;
    for (std::int64_t tau = tested.start; tau < tested.end; ++tau) {
        const double stat = split_stat(series, testing, tau, theta_floor).stat;
        if (stat > best) {
            best = stat;
            best_tau = tau;
        }
    }
    return MaxTest{best, best_tau};
}

/// Squared contrast between two variance regimes over the admissible break
/// range [c1, c2] (break position as a fraction of the testing interval):
///   d^2 = inf_theta inf_{c in [c1,c2]} { (1-c) K(theta', theta) + c K(theta'', theta) }.
/// The inner infimum over theta is attained at the mixture
/// (1-c) theta' + c theta''; the resulting function of c is a pointwise
/// infimum of affine functions, hence concave, so the outer infimum sits at
/// an endpoint.
[[nodiscard]] inline double change_contrast(Theta theta_p, Theta theta_pp, double c1, double c2) {
    if (!(c1 > 0.0) || !(c2 < 1.0) || !(c1 <= c2)) {
        throw ValueError("break fractions must satisfy 0 < c1 <= c2 < 1");
    }
    const auto at = [&](double c) {
        const double mix = (1.0 - c) * theta_p.value + c * theta_pp.value;
        return (1.0 - c) * detail::kl_raw(theta_p.value, mix) +
               c * detail::kl_raw(theta_pp.value, mix);
    };
    const double lo = at(c1);
    const double hi = at(c2);
    return lo < hi ? lo : hi;
}

}  // namespace lcp
