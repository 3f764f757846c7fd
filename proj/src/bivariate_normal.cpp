#include "ipvsim/errors.h"
#include "ipvsim/multivariate.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace ipvsim {

namespace {

// Gauss-Legendre nodes/weights on [-1, 0] for 6, 12 and 20 point rules.
constexpr std::array<std::array<double, 10>, 3> kWeights{{
    {0.17132449237916975, 0.36076157304813894, 0.46791393457269137},
    {0.04717533638651202, 0.10693932599531888, 0.1600783285433461, 0.20316742672306565,
     0.23349253653835464, 0.2491470458134027},
    {0.017614007139153273, 0.04060142980038622, 0.06267204833410944, 0.08327674157670467,
     0.10193011981724026, 0.11819453196151825, 0.13168863844917653, 0.14209610931838187,
     0.14917298647260366, 0.15275338713072578},
}};
constexpr std::array<std::array<double, 10>, 3> kNodes{{
    {-0.932469514203152, -0.6612093864662645, -0.23861918608319693},
    {-0.9815606342467192, -0.9041172563704748, -0.7699026741943047, -0.5873179542866175,
     -0.3678314989981802, -0.1252334085114689},
    {-0.9931285991850949, -0.9639719272779138, -0.9122344282513258, -0.8391169718222188,
     -0.7463319064601508, -0.636053680726515, -0.5108670019508271, -0.37370608871541955,
     -0.2277858511416451, -0.07652652113349734},
}};

/// P(X > dh, Y > dk), after Drezner & Wesolowsky as refined by Genz.
double upper_orthant(double dh, double dk, double r) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::size_t rule = 0;
    std::size_t points = 3;
    if (std::abs(r) >= 0.3) {
        rule = std::abs(r) < 0.75 ? 1 : 2;
        points = rule == 1 ? 6 : 10;
    }
    const auto &w = kWeights[rule];
    const auto &x = kNodes[rule];

    double h = dh;
    double k = dk;
    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r);
        for (std::size_t i = 0; i < points; ++i) {
            double sn = std::sin(asr * (x[i] + 1.0) / 2.0);
            bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            sn = std::sin(asr * (-x[i] + 1.0) / 2.0);
            bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        return bvn * asr / (2.0 * two_pi) + normal_cdf(-h) * normal_cdf(-k);
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        bvn = a * std::exp(-(bs / as + hk) / 2.0) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (hk > -160.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * normal_cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (std::size_t i = 0; i < points; ++i) {
            double xs = (a * (x[i] + 1.0)) * (a * (x[i] + 1.0));
            double rs = std::sqrt(1.0 - xs);
            bvn += a * w[i] *
                   (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
                    std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
            xs = as * (-x[i] + 1.0) * (-x[i] + 1.0) / 4.0;
            rs = std::sqrt(1.0 - xs);
            bvn += a * w[i] * std::exp(-(bs / xs + hk) / 2.0) *
                   (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                    (1.0 + c * xs * (1.0 + d * xs)));
        }
        bvn = -bvn / two_pi;
    }
    if (r > 0.0) {
        return bvn + normal_cdf(-std::max(h, k));
    }
    bvn = -bvn;
    if (k > h) {
        bvn += h < 0.0 ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
    }
    return bvn;
}

} // namespace

double bivariate_normal_cdf(double h, double k, double rho) {
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw DomainError("correlation must lie in [-1, 1]");
    }
    if (h == -INFINITY || k == -INFINITY) {
        return 0.0;
    }
    if (h == INFINITY) {
        return normal_cdf(k);
    }
    if (k == INFINITY) {
        return normal_cdf(h);
    }
    return std::clamp(upper_orthant(-h, -k, rho), 0.0, 1.0);
}

} // namespace ipvsim
