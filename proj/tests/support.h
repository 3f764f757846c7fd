#pragma once

// Independent reference implementations used as test oracles. They deliberately avoid the
// library's own numerical routines.

#include "ipvsim/types.h"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace oracle {

/// Poisson or mean/dispersion negative binomial mass, straight from the gamma-function form.
double count_pmf(double lambda, double phi, int y);
double zi_pmf(double lambda, double phi, double theta, int y);

double normal_cdf(double x);

/// Bivariate normal CDF by adaptive Simpson integration of Plackett's identity
/// dPhi2/drho = phi2(h, k; rho).
double bvn_cdf(double h, double k, double rho);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Upper-tail chi-square probability by series expansion of the regularized gamma.
double chi_square_sf(double statistic, int df);

/// HC2 slope standard error from the full sandwich with an explicit design matrix.
double hc2_sandwich_se(std::span<const double> y, std::span<const int> z);

/// Pearson correlation of two columns.
double pearson(std::span<const double> a, std::span<const double> b);

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd &m);

} // namespace oracle

namespace testing {

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string &name);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &content);

} // namespace testing
