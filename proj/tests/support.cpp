#include "support.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace oracle {

double count_pmf(double lambda, double phi, int y) {
    if (std::isinf(phi)) {
        return std::exp(y * std::log(lambda) - lambda - std::lgamma(y + 1.0));
    }
    const double log_p = std::lgamma(y + phi) - std::lgamma(phi) - std::lgamma(y + 1.0) +
                         phi * std::log(phi / (phi + lambda)) +
                         y * std::log(lambda / (phi + lambda));
    return std::exp(log_p);
}

double zi_pmf(double lambda, double phi, double theta, int y) {
    return (y == 0 ? theta : 0.0) + (1.0 - theta) * count_pmf(lambda, phi, y);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

double simpson(const std::function<double(double)> &f, double a, double b, double fa, double fm,
               double fb, double whole, double tolerance, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tolerance) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson(f, a, m, fa, flm, fm, left, tolerance / 2.0, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tolerance / 2.0, depth - 1);
}

} // namespace

double bvn_cdf(double h, double k, double rho) {
    const auto density = [h, k](double r) {
        const double one_minus = 1.0 - r * r;
        return std::exp(-(h * h - 2.0 * r * h * k + k * k) / (2.0 * one_minus)) /
               (2.0 * std::numbers::pi * std::sqrt(one_minus));
    };
    const double fa = density(0.0);
    const double fb = density(rho);
    const double fm = density(0.5 * rho);
    const double whole = rho / 6.0 * (fa + 4.0 * fm + fb);
    return normal_cdf(h) * normal_cdf(k) + simpson(density, 0.0, rho, fa, fm, fb, whole, 1e-14, 50);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) {
            ++i;
        }
        while (j < b.size() && b[j] == x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

double chi_square_sf(double statistic, int df) {
    // P(a, x) by its power series; Q = 1 - P.
    const double a = df / 2.0;
    const double x = statistic / 2.0;
    if (x <= 0.0) {
        return 1.0;
    }
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 100000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (term < sum * 1e-16) {
            break;
        }
    }
    const double p = std::exp(-x + a * std::log(x) - std::lgamma(a)) * sum;
    return std::clamp(1.0 - p, 0.0, 1.0);
}

double hc2_sandwich_se(std::span<const double> y, std::span<const int> z) {
    const auto n = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = z[static_cast<std::size_t>(i)];
        v[i] = y[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
    const Eigen::VectorXd beta = xtx_inv * x.transpose() * v;
    const Eigen::VectorXd residual = v - x * beta;
    const Eigen::MatrixXd hat = x * xtx_inv * x.transpose();
    Eigen::VectorXd omega(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        omega[i] = residual[i] * residual[i] / (1.0 - hat(i, i));
    }
    const Eigen::MatrixXd meat = x.transpose() * omega.asDiagonal() * x;
    const Eigen::MatrixXd cov = xtx_inv * meat * xtx_inv;
    return std::sqrt(cov(1, 1));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd &m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

} // namespace oracle

namespace testing {

std::filesystem::path scratch_dir(const std::string &name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ipvsim_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

} // namespace testing
