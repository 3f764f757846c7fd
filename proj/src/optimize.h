#pragma once

#include <Eigen/Core>

#include <functional>

namespace ipvsim::detail {

using Objective = std::function<double(const Eigen::VectorXd &)>;

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Quasi-Newton (BFGS) minimisation with central-difference gradients and an Armijo
/// backtracking line search. Stops once one accepted step improves the objective by
/// less than `tolerance`. Non-finite objective values are treated as +infinity.
MinimizeResult minimize_bfgs(const Objective &objective, Eigen::VectorXd start, double tolerance,
                             int max_iterations);

Eigen::VectorXd numeric_gradient(const Objective &objective, const Eigen::VectorXd &x,
                                 double step = 1e-5);

/// Central-difference Hessian with per-coordinate steps.
Eigen::MatrixXd numeric_hessian(const Objective &objective, const Eigen::VectorXd &x,
                                const Eigen::VectorXd &steps);

} // namespace ipvsim::detail
