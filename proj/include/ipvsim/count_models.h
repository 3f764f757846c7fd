#pragma once

#include "ipvsim/random.h"

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ipvsim {

/// Distribution of the count component among "violent" relationships.
enum class Family { zip, zinb };

std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view text);

/// Parameters of a zero-inflated count distribution.
///
/// With probability `theta` the count is a structural zero; otherwise it is drawn from the
/// count component g: Poisson(lambda) for ZIP, or a negative binomial with mean `lambda` and
/// variance `lambda + lambda^2 / phi` for ZINB. A ZINB with phi = infinity is its Poisson limit.
struct MarginalParams {
    Family family = Family::zip;
    double lambda = 1.0;
    double phi = std::numeric_limits<double>::infinity();
    double theta = 0.0;

    static MarginalParams zip(double lambda, double theta);
    static MarginalParams zinb(double lambda, double phi, double theta);

    /// Throws DomainError unless lambda > 0, theta in [0, 1] and (for ZINB) phi > 0.
    void validate() const;

    /// (1 - theta) * lambda
    double mean() const noexcept;
    double variance() const noexcept;

    bool operator==(const MarginalParams &) const = default;
};

using CountSample = std::vector<int>;

/// Mass of the count component g(y) (no zero inflation).
double count_pmf(const MarginalParams &params, int y);

double zi_pmf(const MarginalParams &params, int y);
double zi_cdf(const MarginalParams &params, int y);

/// Generalized inverse of zi_cdf: smallest y with cdf(y) >= u. Requires u in [0, 1).
int zi_quantile(const MarginalParams &params, double u);

int zi_draw(const MarginalParams &params, RandomStream &rng);
CountSample zi_sample(const MarginalParams &params, std::size_t n, RandomStream &rng);

/// Cumulative distribution table truncated where the remaining tail mass drops below
/// `tail_mass`. Quantile lookups beyond the table fall back to direct evaluation.
class CdfTable {
  public:
    explicit CdfTable(const MarginalParams &params, double tail_mass = 1e-12);

    int quantile(double u) const;
    double cdf(int y) const;

    std::span<const double> values() const noexcept { return cdf_; }
    const MarginalParams &params() const noexcept { return params_; }

  private:
    MarginalParams params_;
    std::vector<double> cdf_;
};

/// Weighted histogram of observed counts; entry y holds the total weight at value y.
class CountHistogram {
  public:
    CountHistogram() = default;

    static CountHistogram from_sample(std::span<const int> values);

    void add(int value, double weight = 1.0);

    double weight_at(int value) const noexcept;
    double total_weight() const noexcept { return total_; }
    double weighted_sum() const noexcept;
    std::size_t positive_observations() const noexcept { return positive_count_; }
    int max_value() const noexcept { return static_cast<int>(weights_.size()) - 1; }

  private:
    std::vector<double> weights_;
    double total_ = 0.0;
    std::size_t positive_count_ = 0;
};

/// Weights of the four survey categories: never, once, a few times (2-4), many times (5+).
using CategoryHistogram = std::array<double, 4>;

/// Interval masses P(Y=0), P(Y=1), P(2<=Y<=4), P(Y>=5).
std::array<double, 4> category_probabilities(const MarginalParams &params);

double zi_log_likelihood(const MarginalParams &params, const CountHistogram &data);
double censored_log_likelihood(const MarginalParams &params, const CategoryHistogram &data);

enum class FitStatus {
    converged,
    max_iterations,
    /// All observed mass sits at zero: theta = 1 and lambda is not identified.
    degenerate,
};

std::string_view to_string(FitStatus status) noexcept;

struct FitOptions {
    double tolerance = 1e-8;
    int max_iterations = 500;
};

struct FitResult {
    /// For a degenerate fit, theta = 1 and lambda is a placeholder of 1.
    MarginalParams params;
    double log_likelihood = 0.0;
    FitStatus status = FitStatus::converged;
    int iterations = 0;
    /// Set when theta > 0.999 or fewer than 5 positive observations support lambda.
    bool weakly_identified = false;
    /// Asymptotic standard errors of (lambda, [phi,] theta) from the observed information.
    /// Empty when the information matrix is singular or the fit is degenerate.
    std::vector<double> std_errors;
};

FitResult fit_mle_exact(const CountHistogram &data, Family family, const FitOptions &options = {});
FitResult fit_mle_exact(std::span<const int> data, Family family, const FitOptions &options = {});
FitResult fit_mle_censored(const CategoryHistogram &data, Family family,
                           const FitOptions &options = {});

} // namespace ipvsim
