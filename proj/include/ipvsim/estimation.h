#pragma once

#include <cstddef>
#include <span>

namespace ipvsim {

/// Reference distribution for tests and intervals.
enum class ReferenceDistribution { normal, welch_t };

struct EstimateResult {
    double tau_hat = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    /// Both arms have zero variance; se is 0 and p is 1 if tau_hat = 0, otherwise 0.
    bool degenerate = false;
};

/// Least-squares slope of y on (1, z) with the HC2 robust standard error.
///
/// For a binary regressor the slope is the difference in arm means and the HC2 variance
/// reduces to s1^2 / n1 + s0^2 / n0 with (n - 1) denominators. Intervals are
/// tau_hat +/- q(1 - alpha / 2) * se and the p-value is two-sided.
///
/// Throws InferenceError if either arm has fewer than 2 units, ValidationError if z is not
/// 0/1 or lengths differ.
EstimateResult estimate_ols_hc2(std::span<const double> y, std::span<const int> z,
                                double alpha = 0.05,
                                ReferenceDistribution reference = ReferenceDistribution::normal);

/// Strict p < alpha.
bool reject_null(const EstimateResult &result, double alpha = 0.05);

} // namespace ipvsim
