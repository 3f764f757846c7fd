#include "ipvsim/count_models.h"

#include "ipvsim/errors.h"
#include "optimize.h"

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ipvsim {

namespace {

constexpr double kPhiCeiling = 1e9;

double logit(double p) { return std::log(p / (1.0 - p)); }
double inverse_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// ZIP, or ZINB at its Poisson limit phi = infinity.
bool is_poisson(const MarginalParams &params) {
    return params.family == Family::zip || std::isinf(params.phi);
}

/// log g(y) for the count component.
double log_count_pmf(const MarginalParams &params, int y) {
    const double lambda = params.lambda;
    if (is_poisson(params)) {
        return y * std::log(lambda) - lambda - std::lgamma(y + 1.0);
    }
    const double phi = params.phi;
    // log Gamma(y + phi) - log Gamma(phi), summed exactly for moderate y so that very
    // large phi keeps full precision.
    double rising = 0.0;
    if (y <= 10000) {
        for (int j = 0; j < y; ++j) {
            rising += std::log(phi + j);
        }
    } else {
        rising = std::lgamma(y + phi) - std::lgamma(phi);
    }
    return rising - std::lgamma(y + 1.0) - phi * std::log1p(lambda / phi) +
           y * std::log(lambda / (phi + lambda));
}

/// P(count component <= 4), evaluated through the regularized incomplete gamma/beta.
double count_cdf_at_four(const MarginalParams &params) {
    if (is_poisson(params)) {
        return boost::math::gamma_q(5.0, params.lambda);
    }
    const double p = params.phi / (params.phi + params.lambda);
    return boost::math::ibeta(params.phi, 5.0, p);
}

double count_tail_from_five(const MarginalParams &params) {
    if (is_poisson(params)) {
        return boost::math::gamma_p(5.0, params.lambda);
    }
    const double p = params.phi / (params.phi + params.lambda);
    return boost::math::ibetac(params.phi, 5.0, p);
}

double zero_probability(const MarginalParams &params) {
    return params.theta + (1.0 - params.theta) * count_pmf(params, 0);
}

/// Transform between natural parameters and the unconstrained optimisation scale
/// (log lambda, [log phi,] logit theta).
Eigen::VectorXd to_working(const MarginalParams &params) {
    const bool nb = params.family == Family::zinb;
    Eigen::VectorXd x(nb ? 3 : 2);
    x[0] = std::log(params.lambda);
    if (nb) {
        x[1] = std::log(params.phi);
    }
    x[x.size() - 1] = logit(std::clamp(params.theta, 1e-12, 1.0 - 1e-12));
    return x;
}

MarginalParams from_working(Family family, const Eigen::VectorXd &x) {
    MarginalParams params;
    params.family = family;
    params.lambda = std::exp(std::clamp(x[0], -30.0, 30.0));
    if (family == Family::zinb) {
        params.phi = std::min(std::exp(std::clamp(x[1], -30.0, 30.0)), kPhiCeiling);
    }
    params.theta = inverse_logit(std::clamp(x[x.size() - 1], -40.0, 40.0));
    return params;
}

std::vector<double> natural_vector(const MarginalParams &params) {
    if (params.family == Family::zinb) {
        return {params.lambda, params.phi, params.theta};
    }
    return {params.lambda, params.theta};
}

MarginalParams from_natural(Family family, const Eigen::VectorXd &v) {
    if (family == Family::zinb) {
        return MarginalParams{family, v[0], v[1], v[2]};
    }
    return MarginalParams{family, v[0], std::numeric_limits<double>::infinity(), v[1]};
}

/// Standard errors from the observed information on the natural scale.
template <typename LogLik>
std::vector<double> asymptotic_std_errors(const MarginalParams &params, LogLik &&loglik) {
    const auto natural = natural_vector(params);
    const auto n = static_cast<Eigen::Index>(natural.size());
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(natural.data(), n);
    Eigen::VectorXd steps(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        steps[i] = 1e-4 * std::max(std::abs(x[i]), 1e-3);
    }
    const double theta_step = steps[n - 1];
    if (x[n - 1] - theta_step <= 0.0 || x[n - 1] + theta_step >= 1.0 ||
        (params.family == Family::zinb && params.phi >= 0.5 * kPhiCeiling)) {
        return {};
    }
    const detail::Objective negative = [&](const Eigen::VectorXd &v) {
        return -loglik(from_natural(params.family, v));
    };
    const Eigen::MatrixXd information = detail::numeric_hessian(negative, x, steps);
    Eigen::LLT<Eigen::MatrixXd> llt(information);
    if (llt.info() != Eigen::Success) {
        return {};
    }
    const Eigen::MatrixXd covariance = llt.solve(Eigen::MatrixXd::Identity(n, n));
    std::vector<double> errors(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        errors[static_cast<std::size_t>(i)] = std::sqrt(covariance(i, i));
    }
    return errors;
}

double zero_inflation_start(double observed_zero_fraction, double count_zero_mass) {
    if (count_zero_mass >= 1.0) {
        return 0.5;
    }
    const double theta =
        std::max(0.0, (observed_zero_fraction - count_zero_mass) / (1.0 - count_zero_mass));
    return std::clamp(theta, 0.01, 0.99);
}

template <typename LogLik>
detail::MinimizeResult maximise(Family family, const MarginalParams &start, LogLik &&loglik,
                                const FitOptions &options) {
    const detail::Objective negative = [&](const Eigen::VectorXd &x) {
        return -loglik(from_working(family, x));
    };
    return detail::minimize_bfgs(negative, to_working(start), options.tolerance,
                                 options.max_iterations);
}

FitResult degenerate_fit(Family family) {
    FitResult fit;
    fit.params = family == Family::zinb ? MarginalParams::zinb(1.0, 1.0, 1.0)
                                        : MarginalParams::zip(1.0, 1.0);
    fit.log_likelihood = 0.0;
    fit.status = FitStatus::degenerate;
    fit.weakly_identified = true;
    return fit;
}

FitResult fit_zip_em(const CountHistogram &data, const FitOptions &options) {
    const double total = data.total_weight();
    const double zeros = data.weight_at(0);
    const double sum = data.weighted_sum();
    const double positive_weight = total - zeros;

    const double lambda_start = sum / positive_weight;
    double theta = zero_inflation_start(zeros / total, std::exp(-lambda_start));
    double lambda = lambda_start;

    FitResult fit;
    fit.params = MarginalParams::zip(lambda, theta);
    double loglik = zi_log_likelihood(fit.params, data);
    fit.status = FitStatus::max_iterations;
    for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
        fit.iterations = iteration;
        // E-step: posterior probability that an observed zero is structural.
        const double structural = theta / (theta + (1.0 - theta) * std::exp(-lambda));
        const double expected_structural = zeros * structural;
        // M-step.
        theta = expected_structural / total;
        lambda = sum / (total - expected_structural);

        const MarginalParams next = MarginalParams::zip(lambda, theta);
        const double next_loglik = zi_log_likelihood(next, data);
        const double improvement = next_loglik - loglik;
        fit.params = next;
        loglik = next_loglik;
        if (improvement < options.tolerance) {
            fit.status = FitStatus::converged;
            break;
        }
    }
    fit.log_likelihood = loglik;
    return fit;
}

FitResult best_of(FitResult a, FitResult b) {
    return a.log_likelihood >= b.log_likelihood ? a : b;
}

/// The ZIP optimum seen as a ZINB on the boundary phi = infinity. Keeping it as a candidate
/// guarantees the nested model never beats the ZINB fit, which a finite phi ceiling cannot.
template <typename LogLik>
FitResult poisson_limit(const FitResult &zip_fit, LogLik &&loglik) {
    FitResult fit = zip_fit;
    fit.params.family = Family::zinb;
    fit.params.phi = std::numeric_limits<double>::infinity();
    fit.log_likelihood = loglik(fit.params);
    return fit;
}

FitResult finish(detail::MinimizeResult minimum, Family family) {
    FitResult fit;
    fit.params = from_working(family, minimum.x);
    fit.log_likelihood = -minimum.value;
    fit.iterations = minimum.iterations;
    fit.status = minimum.converged ? FitStatus::converged : FitStatus::max_iterations;
    return fit;
}

} // namespace

std::string_view to_string(Family family) noexcept {
    return family == Family::zip ? "zip" : "zinb";
}

Family parse_family(std::string_view text) {
    if (text == "zip") {
        return Family::zip;
    }
    if (text == "zinb") {
        return Family::zinb;
    }
    throw DomainError("unknown count family '" + std::string{text} + "' (expected zip or zinb)");
}

std::string_view to_string(FitStatus status) noexcept {
    switch (status) {
    case FitStatus::converged:
        return "converged";
    case FitStatus::max_iterations:
        return "max_iterations";
    case FitStatus::degenerate:
        return "degenerate";
    }
    return "unknown";
}

MarginalParams MarginalParams::zip(double lambda, double theta) {
    return MarginalParams{Family::zip, lambda, std::numeric_limits<double>::infinity(), theta};
}

MarginalParams MarginalParams::zinb(double lambda, double phi, double theta) {
    return MarginalParams{Family::zinb, lambda, phi, theta};
}

void MarginalParams::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("lambda must be a positive finite number, got " +
                          std::to_string(lambda));
    }
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw DomainError("theta must lie in [0, 1], got " + std::to_string(theta));
    }
    if (family == Family::zinb && !(phi > 0.0)) {
        throw DomainError("phi must be positive for ZINB, got " + std::to_string(phi));
    }
}

double MarginalParams::mean() const noexcept { return (1.0 - theta) * lambda; }

double MarginalParams::variance() const noexcept {
    const double count_variance =
        family == Family::zip ? lambda : lambda + lambda * lambda / phi;
    return (1.0 - theta) * count_variance + theta * (1.0 - theta) * lambda * lambda;
}

double count_pmf(const MarginalParams &params, int y) {
    params.validate();
    if (y < 0) {
        throw DomainError("count must be non-negative, got " + std::to_string(y));
    }
    return std::exp(log_count_pmf(params, y));
}

double zi_pmf(const MarginalParams &params, int y) {
    const double g = count_pmf(params, y);
    return (y == 0 ? params.theta : 0.0) + (1.0 - params.theta) * g;
}

double zi_cdf(const MarginalParams &params, int y) {
    params.validate();
    if (y < 0) {
        return 0.0;
    }
    double cdf = 0.0;
    for (int k = 0; k <= y; ++k) {
        cdf += zi_pmf(params, k);
    }
    return std::min(cdf, 1.0);
}

int zi_quantile(const MarginalParams &params, double u) {
    params.validate();
    if (!(u >= 0.0 && u < 1.0)) {
        throw DomainError("quantile level must lie in [0, 1), got " + std::to_string(u));
    }
    const double stall_after = params.lambda + 50.0 * std::sqrt(params.variance() + 1.0);
    double cdf = 0.0;
    for (int y = 0;; ++y) {
        const double mass = zi_pmf(params, y);
        cdf += mass;
        if (cdf >= u) {
            return y;
        }
        // Summation has saturated below u: nothing further can be accumulated.
        if (mass == 0.0 && y > stall_after) {
            return y;
        }
    }
}

int zi_draw(const MarginalParams &params, RandomStream &rng) {
    if (rng.uniform() < params.theta) {
        return 0;
    }
    double rate = params.lambda;
    if (!is_poisson(params)) {
        std::gamma_distribution<double> mixing{params.phi, params.lambda / params.phi};
        rate = mixing(rng.engine());
        if (!(rate > 0.0)) {
            return 0;
        }
    }
    std::poisson_distribution<int> count{rate};
    return count(rng.engine());
}

CountSample zi_sample(const MarginalParams &params, std::size_t n, RandomStream &rng) {
    params.validate();
    CountSample sample(n);
    for (auto &value : sample) {
        value = zi_draw(params, rng);
    }
    return sample;
}

CdfTable::CdfTable(const MarginalParams &params, double tail_mass) : params_{params} {
    params.validate();
    const double stall_after = params.lambda + 50.0 * std::sqrt(params.variance() + 1.0);
    double cdf = 0.0;
    for (int y = 0;; ++y) {
        const double mass = zi_pmf(params, y);
        cdf += mass;
        cdf_.push_back(std::min(cdf, 1.0));
        if (1.0 - cdf < tail_mass || (mass == 0.0 && y > stall_after)) {
            break;
        }
    }
}

int CdfTable::quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) {
        throw DomainError("quantile level must lie in [0, 1), got " + std::to_string(u));
    }
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) {
        return zi_quantile(params_, u);
    }
    return static_cast<int>(it - cdf_.begin());
}

double CdfTable::cdf(int y) const {
    if (y < 0) {
        return 0.0;
    }
    if (static_cast<std::size_t>(y) < cdf_.size()) {
        return cdf_[static_cast<std::size_t>(y)];
    }
    return zi_cdf(params_, y);
}

CountHistogram CountHistogram::from_sample(std::span<const int> values) {
    CountHistogram histogram;
    for (const int value : values) {
        histogram.add(value);
    }
    return histogram;
}

void CountHistogram::add(int value, double weight) {
    if (value < 0) {
        throw ValidationError("counts must be non-negative, got " + std::to_string(value));
    }
    if (!(weight >= 0.0)) {
        throw ValidationError("weights must be non-negative");
    }
    const auto index = static_cast<std::size_t>(value);
    if (index >= weights_.size()) {
        weights_.resize(index + 1, 0.0);
    }
    weights_[index] += weight;
    total_ += weight;
    if (value > 0 && weight > 0.0) {
        ++positive_count_;
    }
}

double CountHistogram::weight_at(int value) const noexcept {
    if (value < 0 || static_cast<std::size_t>(value) >= weights_.size()) {
        return 0.0;
    }
    return weights_[static_cast<std::size_t>(value)];
}

double CountHistogram::weighted_sum() const noexcept {
    double sum = 0.0;
    for (std::size_t y = 0; y < weights_.size(); ++y) {
        sum += static_cast<double>(y) * weights_[y];
    }
    return sum;
}

std::array<double, 4> category_probabilities(const MarginalParams &params) {
    params.validate();
    const double active = 1.0 - params.theta;
    const double g0 = count_pmf(params, 0);
    const double g1 = count_pmf(params, 1);
    const double up_to_four = count_cdf_at_four(params);
    return {params.theta + active * g0, active * g1, active * std::max(up_to_four - g0 - g1, 0.0),
            active * count_tail_from_five(params)};
}

double zi_log_likelihood(const MarginalParams &params, const CountHistogram &data) {
    params.validate();
    double loglik = 0.0;
    const double zeros = data.weight_at(0);
    if (zeros > 0.0) {
        loglik += zeros * std::log(zero_probability(params));
    }
    const double log_active = std::log1p(-params.theta);
    for (int y = 1; y <= data.max_value(); ++y) {
        const double weight = data.weight_at(y);
        if (weight > 0.0) {
            loglik += weight * (log_active + log_count_pmf(params, y));
        }
    }
    return loglik;
}

double censored_log_likelihood(const MarginalParams &params, const CategoryHistogram &data) {
    const auto probabilities = category_probabilities(params);
    double loglik = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        if (data[c] > 0.0) {
            loglik += data[c] * std::log(std::max(probabilities[c], 1e-300));
        }
    }
    return loglik;
}

FitResult fit_mle_exact(std::span<const int> data, Family family, const FitOptions &options) {
    return fit_mle_exact(CountHistogram::from_sample(data), family, options);
}

FitResult fit_mle_exact(const CountHistogram &data, Family family, const FitOptions &options) {
    if (!(data.total_weight() > 0.0)) {
        throw DomainError("cannot fit a count model to an empty sample");
    }
    if (data.positive_observations() == 0) {
        return degenerate_fit(family);
    }
    auto loglik = [&data](const MarginalParams &p) { return zi_log_likelihood(p, data); };

    FitResult fit = fit_zip_em(data, options);
    if (family == Family::zinb) {
        // Method-of-moments start among positives, plus a start next to the nested ZIP optimum.
        const double positive_weight = data.total_weight() - data.weight_at(0);
        const double mean = data.weighted_sum() / positive_weight;
        double second_moment = 0.0;
        for (int y = 1; y <= data.max_value(); ++y) {
            second_moment += data.weight_at(y) * y * y;
        }
        const double variance = second_moment / positive_weight - mean * mean;
        const double phi_start =
            variance > 1.01 * mean ? std::clamp(mean * mean / (variance - mean), 0.05, 1e4) : 10.0;
        MarginalParams moments = MarginalParams::zinb(mean, phi_start, 0.5);
        moments.theta = zero_inflation_start(data.weight_at(0) / data.total_weight(),
                                             count_pmf(moments, 0));
        const MarginalParams near_poisson =
            MarginalParams::zinb(fit.params.lambda, 1e3, std::clamp(fit.params.theta, 1e-6, 0.99));

        const FitResult boundary = poisson_limit(fit, loglik);
        fit = best_of(finish(maximise(Family::zinb, moments, loglik, options), Family::zinb),
                      finish(maximise(Family::zinb, near_poisson, loglik, options), Family::zinb));
        fit = best_of(fit, boundary);
    }

    fit.weakly_identified = fit.params.theta > 0.999 || data.positive_observations() < 5;
    fit.std_errors = asymptotic_std_errors(fit.params, loglik);
    return fit;
}

FitResult fit_mle_censored(const CategoryHistogram &data, Family family,
                           const FitOptions &options) {
    const double total = std::accumulate(data.begin(), data.end(), 0.0);
    if (!(total > 0.0)) {
        throw DomainError("cannot fit a count model to an empty category histogram");
    }
    for (const double weight : data) {
        if (!(weight >= 0.0)) {
            throw ValidationError("category weights must be non-negative");
        }
    }
    const double positive_weight = data[1] + data[2] + data[3];
    if (!(positive_weight > 0.0)) {
        return degenerate_fit(family);
    }
    auto loglik = [&data](const MarginalParams &p) { return censored_log_likelihood(p, data); };

    // Representative counts per category give the moment start for lambda.
    const double lambda_start = (1.0 * data[1] + 3.0 * data[2] + 7.0 * data[3]) / positive_weight;
    MarginalParams start = MarginalParams::zip(lambda_start, 0.5);
    start.theta = zero_inflation_start(data[0] / total, std::exp(-lambda_start));
    FitResult fit = finish(maximise(Family::zip, start, loglik, options), Family::zip);

    if (family == Family::zinb) {
        MarginalParams moments = MarginalParams::zinb(lambda_start, 1.0, 0.5);
        moments.theta = zero_inflation_start(data[0] / total, count_pmf(moments, 0));
        const MarginalParams near_poisson =
            MarginalParams::zinb(fit.params.lambda, 1e3, std::clamp(fit.params.theta, 1e-6, 0.99));
        const FitResult boundary = poisson_limit(fit, loglik);
        fit = best_of(finish(maximise(Family::zinb, moments, loglik, options), Family::zinb),
                      finish(maximise(Family::zinb, near_poisson, loglik, options), Family::zinb));
        fit = best_of(fit, boundary);
    }

    fit.weakly_identified = fit.params.theta > 0.999 || positive_weight < 5.0;
    fit.std_errors = asymptotic_std_errors(fit.params, loglik);
    return fit;
}

} // namespace ipvsim
