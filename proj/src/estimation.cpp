#include "ipvsim/estimation.h"

#include "ipvsim/errors.h"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <string>

namespace ipvsim {

namespace {

struct ArmMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
};

ArmMoments arm_moments(std::span<const double> y, std::span<const int> z, int arm) {
    ArmMoments m;
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (z[i] == arm) {
            sum += y[i];
            ++m.n;
        }
    }
    if (m.n < 2) {
        throw InferenceError("arm z=" + std::to_string(arm) + " has " + std::to_string(m.n) +
                             " units; at least 2 are needed for a robust standard error");
    }
    m.mean = sum / static_cast<double>(m.n);
    double squares = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (z[i] == arm) {
            const double d = y[i] - m.mean;
            squares += d * d;
        }
    }
    m.variance = squares / static_cast<double>(m.n - 1);
    return m;
}

} // namespace

EstimateResult estimate_ols_hc2(std::span<const double> y, std::span<const int> z, double alpha,
                                ReferenceDistribution reference) {
    if (y.size() != z.size()) {
        throw ValidationError("outcome and assignment vectors differ in length");
    }
    for (const int value : z) {
        if (value != 0 && value != 1) {
            throw ValidationError("assignment must be 0 or 1");
        }
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
    const ArmMoments treated = arm_moments(y, z, 1);
    const ArmMoments control = arm_moments(y, z, 0);

    EstimateResult result;
    result.n_treated = treated.n;
    result.n_control = control.n;
    result.tau_hat = treated.mean - control.mean;

    const double v1 = treated.variance / static_cast<double>(treated.n);
    const double v0 = control.variance / static_cast<double>(control.n);
    result.se = std::sqrt(v1 + v0);

    if (result.se == 0.0) {
        result.degenerate = true;
        result.p_value = result.tau_hat == 0.0 ? 1.0 : 0.0;
        result.ci_low = result.tau_hat;
        result.ci_high = result.tau_hat;
        return result;
    }

    const double statistic = std::abs(result.tau_hat) / result.se;
    double critical = 0.0;
    if (reference == ReferenceDistribution::normal) {
        const boost::math::normal_distribution<double> normal;
        critical = boost::math::quantile(normal, 1.0 - alpha / 2.0);
        result.p_value = std::erfc(statistic / std::sqrt(2.0));
    } else {
        const double df = (v1 + v0) * (v1 + v0) /
                          (v1 * v1 / static_cast<double>(treated.n - 1) +
                           v0 * v0 / static_cast<double>(control.n - 1));
        const boost::math::students_t_distribution<double> t{df};
        critical = boost::math::quantile(t, 1.0 - alpha / 2.0);
        result.p_value = 2.0 * boost::math::cdf(boost::math::complement(t, statistic));
    }
    result.p_value = std::min(result.p_value, 1.0);
    result.ci_low = result.tau_hat - critical * result.se;
    result.ci_high = result.tau_hat + critical * result.se;
    return result;
}

bool reject_null(const EstimateResult &result, double alpha) { return result.p_value < alpha; }

} // namespace ipvsim
