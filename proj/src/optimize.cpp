#include "optimize.h"

#include <cmath>
#include <limits>

namespace ipvsim::detail {

namespace {

double evaluate(const Objective &objective, const Eigen::VectorXd &x) {
    const double value = objective(x);
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

} // namespace

Eigen::VectorXd numeric_gradient(const Objective &objective, const Eigen::VectorXd &x,
                                 double step) {
    Eigen::VectorXd gradient(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double up = evaluate(objective, probe);
        probe[i] = x[i] - h;
        const double down = evaluate(objective, probe);
        probe[i] = x[i];
        gradient[i] = (up - down) / (2.0 * h);
    }
    return gradient;
}

Eigen::MatrixXd numeric_hessian(const Objective &objective, const Eigen::VectorXd &x,
                                const Eigen::VectorXd &steps) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd hessian(n, n);
    const double centre = objective(x);
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = steps[i];
        probe[i] = x[i] + hi;
        const double up = objective(probe);
        probe[i] = x[i] - hi;
        const double down = objective(probe);
        probe[i] = x[i];
        hessian(i, i) = (up - 2.0 * centre + down) / (hi * hi);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double hj = steps[j];
            auto at = [&](double di, double dj) {
                probe[i] = x[i] + di;
                probe[j] = x[j] + dj;
                const double value = objective(probe);
                probe[i] = x[i];
                probe[j] = x[j];
                return value;
            };
            const double mixed =
                (at(hi, hj) - at(hi, -hj) - at(-hi, hj) + at(-hi, -hj)) / (4.0 * hi * hj);
            hessian(i, j) = mixed;
            hessian(j, i) = mixed;
        }
    }
    return hessian;
}

MinimizeResult minimize_bfgs(const Objective &objective, Eigen::VectorXd start, double tolerance,
                             int max_iterations) {
    const Eigen::Index n = start.size();
    MinimizeResult result;
    result.x = std::move(start);
    result.value = evaluate(objective, result.x);
    if (!std::isfinite(result.value)) {
        return result;
    }

    Eigen::VectorXd gradient = numeric_gradient(objective, result.x);
    Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(n, n);

    for (int iteration = 1; iteration <= max_iterations; ++iteration) {
        result.iterations = iteration;
        Eigen::VectorXd direction = -inverse_hessian * gradient;
        double slope = gradient.dot(direction);
        if (!(slope < 0.0)) {
            inverse_hessian.setIdentity();
            direction = -gradient;
            slope = -gradient.squaredNorm();
        }
        if (slope == 0.0) {
            result.converged = true;
            return result;
        }

        double step = 1.0;
        Eigen::VectorXd candidate;
        double candidate_value = std::numeric_limits<double>::infinity();
        while (true) {
            candidate = result.x + step * direction;
            candidate_value = evaluate(objective, candidate);
            if (candidate_value <= result.value + 1e-4 * step * slope) {
                break;
            }
            step *= 0.5;
            if (step < 1e-14) {
                // No descent available at working precision.
                result.converged = true;
                return result;
            }
        }

        const Eigen::VectorXd next_gradient = numeric_gradient(objective, candidate);
        const Eigen::VectorXd s = candidate - result.x;
        const Eigen::VectorXd y = next_gradient - gradient;
        const double improvement = result.value - candidate_value;

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
            inverse_hessian = (identity - rho * s * y.transpose()) * inverse_hessian *
                                  (identity - rho * y * s.transpose()) +
                              rho * s * s.transpose();
        }

        result.x = candidate;
        result.value = candidate_value;
        gradient = next_gradient;

        if (improvement < tolerance) {
            result.converged = true;
            return result;
        }
    }
    return result;
}

} // namespace ipvsim::detail
