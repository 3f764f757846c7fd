#include "support.h"

#include "ipvsim/coding.h"
#include "ipvsim/errors.h"
#include "ipvsim/ingest.h"
#include "ipvsim/multivariate.h"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace ipvsim;

namespace {

MultiActModel two_act_model(double rho, MarginalParams a, MarginalParams b) {
    MultiActModel model;
    model.acts = {{1, "a", "a", ActCategory::physical, Severity::moderate},
                  {2, "b", "b", ActCategory::physical, Severity::severe}};
    model.margins = {a, b};
    model.sigma = Eigen::MatrixXd::Identity(2, 2);
    model.sigma(0, 1) = model.sigma(1, 0) = rho;
    return model;
}

std::vector<double> column(const CountMatrix &m, Eigen::Index j) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(m(i, j));
    }
    return out;
}

std::vector<double> average_ranks(const std::vector<double> &v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && v[order[j]] == v[order[i]]) {
            ++j;
        }
        const double rank = 0.5 * (i + j - 1) + 1.0;
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j;
    }
    return ranks;
}

Eigen::MatrixXd identity_like(const Eigen::MatrixXd &m) {
    return Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

double spearman(const std::vector<double> &a, const std::vector<double> &b) {
    return oracle::pearson(average_ranks(a), average_ranks(b));
}

/// Chi-square goodness of fit of categorized column j against the marginal's interval masses.
double category_gof_p(const CountMatrix &counts, Eigen::Index j, const MarginalParams &margin) {
    std::array<double, 4> observed{};
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        observed[static_cast<std::size_t>(categorize(counts(i, j)))] += 1.0;
    }
    std::array<double, 4> expected{};
    double p24 = 0.0;
    for (int y = 2; y <= 4; ++y) {
        p24 += oracle::zi_pmf(margin.lambda, margin.phi, margin.theta, y);
    }
    const double p0 = oracle::zi_pmf(margin.lambda, margin.phi, margin.theta, 0);
    const double p1 = oracle::zi_pmf(margin.lambda, margin.phi, margin.theta, 1);
    const double n = static_cast<double>(counts.rows());
    expected = {n * p0, n * p1, n * p24, n * (1.0 - p0 - p1 - p24)};
    double statistic = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        statistic += (observed[c] - expected[c]) * (observed[c] - expected[c]) / expected[c];
    }
    return oracle::chi_square_sf(statistic, 3);
}

} // namespace

TEST_SUITE("multivariate") {

TEST_CASE("default act table") {
    const auto acts = default_acts();
    REQUIRE(acts.size() == 10);
    CHECK(std::count_if(acts.begin(), acts.end(),
                        [](const ActSpec &a) { return a.category == ActCategory::physical; }) == 7);
    CHECK(std::count_if(acts.begin(), acts.end(),
                        [](const ActSpec &a) { return a.category == ActCategory::sexual; }) == 3);
    CHECK_NOTHROW(validate_acts(acts));
    CHECK_NOTHROW(default_model().validate());
}

TEST_CASE("act table validation") {
    auto acts = default_acts();
    acts[3].index = 7;
    CHECK_THROWS_AS(validate_acts(acts), ValidationError);
    acts = default_acts();
    acts[2].id = acts[1].id;
    CHECK_THROWS_AS(validate_acts(acts), ValidationError);
    CHECK_THROWS_AS(validate_acts({}), ValidationError);
    CHECK_THROWS_AS(parse_act_category("verbal"), ValidationError);
    CHECK(parse_severity("moderate") == Severity::moderate);
}

TEST_CASE("indefinite sigma is rejected with its eigenvalue") {
    auto model = two_act_model(0.0, MarginalParams::zip(1, 0.5), MarginalParams::zip(1, 0.5));
    model.sigma(0, 1) = model.sigma(1, 0) = 1.5;
    try {
        model.validate();
        FAIL("expected a validation error");
    } catch (const ValidationError &e) {
        const std::string message = e.what();
        CHECK(message.find("eigenvalue") != std::string::npos);
        CHECK(message.find("-0.5") != std::string::npos);
    }
    RandomStream rng{1};
    CHECK_THROWS_AS(sample_joint(model, 10, rng), ValidationError);
    model.sigma(0, 1) = 0.3;
    CHECK_THROWS_AS(model.validate(), ValidationError);
}

TEST_CASE("independent acts are uncorrelated") {
    const auto model = two_act_model(0.0, MarginalParams::zip(2.36, 0.5), MarginalParams::zinb(1.5, 0.8, 0.3));
    RandomStream rng{101};
    const auto counts = sample_joint(model, 100000, rng);
    const double r = oracle::pearson(column(counts, 0), column(counts, 1));
    CHECK(std::abs(r) < 4.0 / std::sqrt(100000.0));
}

TEST_CASE("a single act reproduces the standalone marginal") {
    MultiActModel model;
    model.acts = {{1, "a", "a", ActCategory::physical, Severity::severe}};
    model.margins = {MarginalParams::zip(2.36, 0.84)};
    model.sigma = Eigen::MatrixXd::Identity(1, 1);
    const std::size_t n = 100000;
    RandomStream a{5};
    RandomStream b{6};
    const auto joint = column(sample_joint(model, n, a), 0);
    std::vector<double> single;
    for (const int v : zi_sample(model.margins[0], n, b)) {
        single.push_back(v);
    }
    const double critical = 1.628 * std::sqrt(2.0 / n);
    CHECK(oracle::ks_statistic(joint, single) < critical);
}

TEST_CASE("latent correlation round trip with identical margins") {
    const auto margin = MarginalParams::zip(2.36, 0.84);
    const auto model = two_act_model(0.6, margin, margin);
    RandomStream rng{7};
    const auto categories = categorize(sample_joint(model, 100000, rng));
    std::vector<int> a;
    std::vector<int> b;
    for (Eigen::Index i = 0; i < categories.rows(); ++i) {
        a.push_back(categories(i, 0));
        b.push_back(categories(i, 1));
    }
    const std::vector<double> weights(a.size(), 1.0);
    CHECK(std::abs(latent_correlation(a, b, weights) - 0.6) < 0.03);
}

TEST_CASE("categorized marginals pass a chi-square test") {
    const auto model = default_model();
    RandomStream rng{8};
    const auto counts = sample_joint(model, 100000, rng);
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
        CHECK(category_gof_p(counts, j, model.margins[static_cast<std::size_t>(j)]) > 0.01);
    }
}

TEST_CASE("stronger latent correlation never lowers rank correlation") {
    const auto margin = MarginalParams::zinb(2.0, 1.2, 0.6);
    double previous = -1.0;
    for (const double rho : {0.2, 0.5, 0.8}) {
        RandomStream rng{9};
        const auto counts = sample_joint(two_act_model(rho, margin, margin), 100000, rng);
        const double s = spearman(column(counts, 0), column(counts, 1));
        CHECK(s >= previous);
        previous = s;
    }
}

TEST_CASE("positive dependence raises the share of all-zero rows") {
    const auto model = default_model();
    RandomStream rng{10};
    const auto counts = sample_joint(model, 100000, rng);
    double all_zero = 0.0;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        all_zero += counts.row(i).maxCoeff() == 0 ? 1.0 : 0.0;
    }
    double independent = 1.0;
    for (const auto &m : model.margins) {
        independent *= zi_pmf(m, 0);
    }
    CHECK(all_zero / counts.rows() >= independent);
}

TEST_CASE("sampling is deterministic given the stream") {
    const JointSampler sampler{default_model()};
    RandomStream a = RandomStream::substream(3, 17, StreamPurpose::baseline);
    RandomStream b = RandomStream::substream(3, 17, StreamPurpose::baseline);
    CHECK(sampler.draw(200, a) == sampler.draw(200, b));
    RandomStream c = RandomStream::substream(3, 18, StreamPurpose::baseline);
    RandomStream d = RandomStream::substream(3, 17, StreamPurpose::assignment);
    const auto reference = sampler.draw(200, a = RandomStream::substream(3, 17, StreamPurpose::baseline));
    CHECK_FALSE(sampler.draw(200, c) == reference);
    CHECK_FALSE(sampler.draw(200, d) == reference);
}

TEST_CASE("nearest_psd on small examples") {
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(4, 4);
    CHECK(nearest_psd(identity) == identity);

    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 1.2, 1.2, 1.0;
    const auto fixed = nearest_psd(bad);
    CHECK(fixed(0, 1) < 1.0);
    CHECK(fixed(0, 1) > 0.99);
    CHECK(fixed(0, 1) == fixed(1, 0));
    CHECK(fixed(0, 0) == 1.0);
    CHECK(oracle::eigenvalues(fixed).minCoeff() >= 0.0);
    CHECK_THROWS_AS(nearest_psd(Eigen::MatrixXd::Ones(2, 3)), ValidationError);
}

TEST_CASE("nearest_psd repairs random indefinite matrices") {
    RandomStream rng{12};
    int indefinite = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(5, 5);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < i; ++j) {
                m(i, j) = m(j, i) = 2.0 * rng.uniform() - 1.0;
            }
        }
        indefinite += oracle::eigenvalues(m).minCoeff() < 0.0 ? 1 : 0;
        const auto fixed = nearest_psd(m);
        CHECK(oracle::eigenvalues(fixed).minCoeff() >= 0.0);
        for (int i = 0; i < 5; ++i) {
            CHECK(fixed(i, i) == 1.0);
        }
        CHECK(fixed == fixed.transpose());
        CHECK(nearest_psd(fixed) == fixed);
        // Never farther from the input than the identity, which is itself feasible.
        CHECK((fixed - m).norm() <= (identity_like(m) - m).norm() + 1e-9);
    }
    CHECK(indefinite > 10);
}

TEST_CASE("bivariate normal CDF against Plackett quadrature") {
    for (const double h : {-2.5, -0.7, 0.0, 0.4, 1.9}) {
        for (const double k : {-1.3, 0.0, 0.8, 3.0}) {
            for (const double rho : {-0.95, -0.5, -0.1, 0.0, 0.3, 0.75, 0.97}) {
                CHECK(std::abs(bivariate_normal_cdf(h, k, rho) - oracle::bvn_cdf(h, k, rho)) < 1e-10);
            }
        }
    }
}

TEST_CASE("bivariate normal CDF closed forms and limits") {
    for (const double rho : {-0.99, -0.4, 0.0, 0.5, 0.9, 0.999}) {
        CHECK(bivariate_normal_cdf(0, 0, rho) ==
              doctest::Approx(0.25 + std::asin(rho) / (2 * std::numbers::pi)).epsilon(1e-13));
    }
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(bivariate_normal_cdf(inf, 0.3, 0.5) == doctest::Approx(oracle::normal_cdf(0.3)).epsilon(1e-14));
    CHECK(bivariate_normal_cdf(-0.2, inf, 0.5) == doctest::Approx(oracle::normal_cdf(-0.2)).epsilon(1e-14));
    CHECK(bivariate_normal_cdf(-inf, 0.3, 0.5) == 0.0);
    CHECK(bivariate_normal_cdf(inf, inf, -0.5) == 1.0);
    CHECK(bivariate_normal_cdf(0.5, 1.0, 1.0) == doctest::Approx(oracle::normal_cdf(0.5)).epsilon(1e-14));
    CHECK(bivariate_normal_cdf(0.5, 1.0, -1.0) ==
          doctest::Approx(oracle::normal_cdf(0.5) + oracle::normal_cdf(1.0) - 1.0).epsilon(1e-12));
    CHECK(bivariate_normal_cdf(0.3, -0.6, 0.0) ==
          doctest::Approx(oracle::normal_cdf(0.3) * oracle::normal_cdf(-0.6)).epsilon(1e-14));
    CHECK_THROWS_AS(bivariate_normal_cdf(0, 0, 1.2), DomainError);
}

} // TEST_SUITE
