#include "ipvsim/multivariate.h"

#include "ipvsim/errors.h"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace ipvsim {

namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr double kEigenFloor = 1e-8;

bool is_valid_correlation(const Eigen::MatrixXd &m) {
    if (m.rows() != m.cols() || !m.allFinite()) {
        return false;
    }
    if (m != m.transpose()) {
        return false;
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, i) != 1.0) {
            return false;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -kPsdTolerance;
}

Eigen::MatrixXd clip_eigenvalues(const Eigen::MatrixXd &m, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    const Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(floor);
    Eigen::MatrixXd result =
        solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().transpose();
    return 0.5 * (result + result.transpose());
}

Eigen::MatrixXd rescale_to_unit_diagonal(const Eigen::MatrixXd &m) {
    const Eigen::VectorXd scale = m.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd result = scale.asDiagonal() * m * scale.asDiagonal();
    result.diagonal().setOnes();
    return 0.5 * (result + result.transpose());
}

} // namespace

std::string_view to_string(ActCategory category) noexcept {
    switch (category) {
    case ActCategory::emotional:
        return "emotional";
    case ActCategory::physical:
        return "physical";
    case ActCategory::sexual:
        return "sexual";
    }
    return "unknown";
}

std::string_view to_string(Severity severity) noexcept {
    return severity == Severity::moderate ? "moderate" : "severe";
}

ActCategory parse_act_category(std::string_view text) {
    if (text == "emotional") {
        return ActCategory::emotional;
    }
    if (text == "physical") {
        return ActCategory::physical;
    }
    if (text == "sexual") {
        return ActCategory::sexual;
    }
    throw ValidationError("unknown act category '" + std::string{text} + "'");
}

Severity parse_severity(std::string_view text) {
    if (text == "moderate") {
        return Severity::moderate;
    }
    if (text == "severe") {
        return Severity::severe;
    }
    throw ValidationError("unknown severity '" + std::string{text} + "'");
}

void validate_acts(const std::vector<ActSpec> &acts) {
    if (acts.empty()) {
        throw ValidationError("act table is empty");
    }
    std::set<std::string> ids;
    for (std::size_t k = 0; k < acts.size(); ++k) {
        const auto &act = acts[k];
        if (act.index != static_cast<int>(k) + 1) {
            throw ValidationError("act indices must run 1..K in order; position " +
                                  std::to_string(k + 1) + " has index " +
                                  std::to_string(act.index));
        }
        if (act.id.empty()) {
            throw ValidationError("act " + std::to_string(act.index) + " has an empty id");
        }
        if (!ids.insert(act.id).second) {
            throw ValidationError("duplicate act id '" + act.id + "'");
        }
    }
}

std::vector<ActSpec> default_acts() {
    using enum ActCategory;
    using enum Severity;
    return {
        {1, "slapped", "slapped you", physical, moderate},
        {2, "pushed", "pushed you, shook you, or threw something at you", physical, moderate},
        {3, "twisted", "twisted your arm or pulled your hair", physical, moderate},
        {4, "punched", "punched you with his fist or with something that could hurt you",
         physical, severe},
        {5, "kicked", "kicked you, dragged you, or beat you up", physical, severe},
        {6, "choked", "tried to choke you or burn you on purpose", physical, severe},
        {7, "weapon", "threatened or attacked you with a knife, gun, or other weapon", physical,
         severe},
        {8, "forced_sex", "physically forced you to have sex when you did not want to", sexual,
         severe},
        {9, "threat_sex", "used threats or intimidation to make you have sex", sexual, severe},
        {10, "forced_acts", "forced you to perform other sexual acts you did not want to", sexual,
         severe},
    };
}

MultiActModel default_model() {
    MultiActModel model;
    model.acts = default_acts();
    model.margins = {
        MarginalParams::zip(2.36, 0.77), MarginalParams::zip(2.20, 0.80),
        MarginalParams::zip(1.80, 0.86), MarginalParams::zip(1.90, 0.88),
        MarginalParams::zip(1.70, 0.90), MarginalParams::zip(1.30, 0.95),
        MarginalParams::zip(1.20, 0.96), MarginalParams::zip(2.00, 0.90),
        MarginalParams::zip(1.80, 0.92), MarginalParams::zip(1.60, 0.93),
    };
    const std::size_t k = model.acts.size();
    model.sigma = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const auto &a = model.acts[i];
            const auto &b = model.acts[j];
            double rho = 0.0;
            if (a.category == b.category) {
                rho = a.category == ActCategory::sexual ? 0.70 : 0.65;
            } else {
                const bool moderate = a.severity == Severity::moderate || b.severity == Severity::moderate;
                rho = moderate ? 0.50 : 0.40;
            }
            const auto r = static_cast<Eigen::Index>(i);
            const auto c = static_cast<Eigen::Index>(j);
            model.sigma(r, c) = rho;
            model.sigma(c, r) = rho;
        }
    }
    return model;
}

void MultiActModel::validate() const {
    validate_acts(acts);
    if (margins.size() != acts.size()) {
        throw ValidationError("model has " + std::to_string(acts.size()) + " acts but " +
                              std::to_string(margins.size()) + " marginal parameter sets");
    }
    for (std::size_t k = 0; k < margins.size(); ++k) {
        try {
            margins[k].validate();
        } catch (const DomainError &e) {
            throw ValidationError("act " + std::to_string(k + 1) + ": " + e.what());
        }
    }
    const auto dim = static_cast<Eigen::Index>(acts.size());
    if (sigma.rows() != dim || sigma.cols() != dim) {
        throw ValidationError("sigma must be " + std::to_string(dim) + " x " +
                              std::to_string(dim));
    }
    if (!sigma.allFinite()) {
        throw ValidationError("sigma contains non-finite entries");
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (std::abs(sigma(i, i) - 1.0) > 1e-12) {
            throw ValidationError("sigma must have a unit diagonal; entry " +
                                  std::to_string(i + 1) + " is " + std::to_string(sigma(i, i)));
        }
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12) {
                throw ValidationError("sigma is not symmetric at (" + std::to_string(i + 1) +
                                      ", " + std::to_string(j + 1) + ")");
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma, Eigen::EigenvaluesOnly);
    const double smallest = solver.eigenvalues().minCoeff();
    if (smallest < -kPsdTolerance) {
        std::ostringstream message;
        message.precision(6);
        message << "sigma is not positive semi-definite: smallest eigenvalue is " << smallest;
        throw ValidationError(message.str());
    }
}

JointSampler::JointSampler(MultiActModel model) : model_{std::move(model)} {
    model_.validate();
    tables_.reserve(model_.margins.size());
    for (const auto &margin : model_.margins) {
        tables_.emplace_back(margin);
    }
    // Symmetric square root tolerates semi-definite sigma where Cholesky would fail.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model_.sigma);
    const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor_ = solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

CountMatrix JointSampler::draw(std::size_t n, RandomStream &rng) const {
    const auto k = static_cast<Eigen::Index>(tables_.size());
    CountMatrix counts(static_cast<Eigen::Index>(n), k);
    Eigen::VectorXd innovation(k);
    constexpr double kBelowOne = 1.0 - 0x1.0p-53;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            innovation[j] = rng.normal();
        }
        const Eigen::VectorXd latent = factor_ * innovation;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double u = std::min(normal_cdf(latent[j]), kBelowOne);
            counts(i, j) = tables_[static_cast<std::size_t>(j)].quantile(u);
        }
    }
    return counts;
}

CountMatrix sample_joint(const MultiActModel &model, std::size_t n, RandomStream &rng) {
    return JointSampler{model}.draw(n, rng);
}

Eigen::MatrixXd nearest_psd(const Eigen::MatrixXd &matrix) {
    if (matrix.rows() != matrix.cols()) {
        throw ValidationError("nearest_psd requires a square matrix");
    }
    if (is_valid_correlation(matrix)) {
        return matrix;
    }
    const Eigen::MatrixXd target = 0.5 * (matrix + matrix.transpose());
    Eigen::MatrixXd y = target;
    Eigen::MatrixXd correction = Eigen::MatrixXd::Zero(matrix.rows(), matrix.cols());
    Eigen::MatrixXd x = y;
    for (int iteration = 0; iteration < 1000; ++iteration) {
        const Eigen::MatrixXd r = y - correction;
        x = clip_eigenvalues(r, kEigenFloor);
        correction = x - r;
        const Eigen::MatrixXd previous = y;
        y = x;
        y.diagonal().setOnes();
        if ((y - previous).norm() <= 1e-12 * std::max(1.0, y.norm())) {
            break;
        }
    }
    return rescale_to_unit_diagonal(clip_eigenvalues(y, kEigenFloor));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("normal quantile requires p in (0, 1), got " + std::to_string(p));
    }
    return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

} // namespace ipvsim
