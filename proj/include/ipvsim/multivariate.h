#pragma once

#include "ipvsim/count_models.h"
#include "ipvsim/random.h"
#include "ipvsim/types.h"

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace ipvsim {

enum class ActCategory { emotional, physical, sexual };
enum class Severity { moderate, severe };

std::string_view to_string(ActCategory category) noexcept;
std::string_view to_string(Severity severity) noexcept;
ActCategory parse_act_category(std::string_view text);
Severity parse_severity(std::string_view text);

/// One survey item.
struct ActSpec {
    /// 1-based position in the act table.
    int index = 1;
    /// Short identifier used as a column name in data files.
    std::string id;
    std::string label;
    ActCategory category = ActCategory::physical;
    Severity severity = Severity::severe;

    bool operator==(const ActSpec &) const = default;
};

/// Throws ValidationError unless indices run 1..K in order and ids are unique and non-empty.
void validate_acts(const std::vector<ActSpec> &acts);

/// Default K = 10 act table: seven physical items followed by three sexual items.
std::vector<ActSpec> default_acts();

/// Per-act zero-inflated marginals coupled by a Gaussian copula with latent correlation
/// `sigma`. Sigma acts on the latent normal scale; it is not the covariance of the counts.
struct MultiActModel {
    std::vector<ActSpec> acts;
    std::vector<MarginalParams> margins;
    Eigen::MatrixXd sigma;

    std::size_t size() const noexcept { return acts.size(); }

    /// Checks act table, marginal parameters and that sigma is a K x K symmetric
    /// unit-diagonal matrix with eigenvalues >= -1e-10. The error for an indefinite sigma
    /// names the offending eigenvalue.
    void validate() const;
};

/// Generating model of the bundled synthetic example dataset.
MultiActModel default_model();

/// Source of untreated outcomes Y(0) for a simulated sample.
class BaselineGenerator {
  public:
    virtual ~BaselineGenerator() = default;

    virtual const std::vector<ActSpec> &acts() const noexcept = 0;

    /// n x K matrix of latent counts.
    virtual CountMatrix draw(std::size_t n, RandomStream &rng) const = 0;
};

/// Gaussian-copula sampler with cached marginal CDF tables and a factor of sigma.
class JointSampler final : public BaselineGenerator {
  public:
    explicit JointSampler(MultiActModel model);

    const std::vector<ActSpec> &acts() const noexcept override { return model_.acts; }
    const MultiActModel &model() const noexcept { return model_; }

    CountMatrix draw(std::size_t n, RandomStream &rng) const override;

  private:
    MultiActModel model_;
    std::vector<CdfTable> tables_;
    Eigen::MatrixXd factor_;
};

CountMatrix sample_joint(const MultiActModel &model, std::size_t n, RandomStream &rng);

/// Nearest unit-diagonal positive semi-definite matrix in Frobenius norm (alternating
/// projections with Dykstra's correction), finished by eigenvalue clipping and rescaling
/// to an exact unit diagonal. Inputs that are already valid correlation matrices are
/// returned unchanged.
Eigen::MatrixXd nearest_psd(const Eigen::MatrixXd &matrix);

/// Standard normal CDF.
double normal_cdf(double z);

/// Standard normal quantile.
double normal_quantile(double p);

/// P(X <= h, Y <= k) for standard bivariate normal (X, Y) with correlation rho. Infinite
/// limits are allowed.
double bivariate_normal_cdf(double h, double k, double rho);

} // namespace ipvsim
