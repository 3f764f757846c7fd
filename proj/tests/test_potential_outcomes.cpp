#include "support.h"

#include "ipvsim/coding.h"
#include "ipvsim/errors.h"
#include "ipvsim/potential_outcomes.h"

#include <doctest.h>

#include <cmath>

using namespace ipvsim;

namespace {

std::vector<ActSpec> single_act() {
    return {{1, "act", "act", ActCategory::physical, Severity::severe}};
}

CountMatrix column_of(std::initializer_list<int> values) {
    CountMatrix m(static_cast<Eigen::Index>(values.size()), 1);
    Eigen::Index i = 0;
    for (const int v : values) {
        m(i++, 0) = v;
    }
    return m;
}

CountMatrix random_baseline(std::size_t n, std::size_t k, RandomStream &rng) {
    CountMatrix y0(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < y0.rows(); ++i) {
        const bool violent = rng.uniform() < 0.4;
        for (Eigen::Index j = 0; j < y0.cols(); ++j) {
            y0(i, j) = violent && rng.uniform() < 0.5 ? 1 + static_cast<int>(rng.below(9)) : 0;
        }
    }
    return y0;
}

EffectScenario scenario_with(std::array<double, 4> p_s, ActTarget target = ActTarget::all()) {
    EffectScenario s;
    s.p_s = p_s;
    s.target = std::move(target);
    return s;
}

} // namespace

TEST_SUITE("potential_outcomes") {

TEST_CASE("example schedule with one unit per response type") {
    // Columns: type, Z, Y(1), Y(0), Y*(1), Y*(0), revealed Y*.
    struct Row {
        ResponseType type;
        int z;
        int y1;
        int y0;
        int c1;
        int c0;
        int revealed;
    };
    const std::vector<Row> rows{
        {ResponseType::never_violent, 0, 0, 0, 0, 0, 0},
        {ResponseType::no_effect, 1, 3, 3, 2, 2, 2},
        {ResponseType::cessation, 1, 0, 5, 0, 3, 0},
        {ResponseType::reduction, 0, 2, 4, 2, 2, 2},
        {ResponseType::increase, 1, 3, 1, 2, 1, 2},
    };
    PotentialOutcomeTable table;
    table.y0 = column_of({0, 3, 5, 4, 1});
    for (const auto &r : rows) {
        table.s.push_back(r.type);
        table.z.push_back(r.z);
    }
    EffectScenario scenario;
    scenario.x = 2;
    table.y1 = apply_effects(table.y0, table.s, scenario, {true});
    const CountMatrix observed = reveal(table);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        CHECK(table.y1(r, 0) == rows[i].y1);
        CHECK(table.y0(r, 0) == rows[i].y0);
        CHECK(categorize(table.y1(r, 0)) == rows[i].c1);
        CHECK(categorize(table.y0(r, 0)) == rows[i].c0);
        CHECK(categorize(observed(r, 0)) == rows[i].revealed);
    }
}

TEST_CASE("reduction floors at one unless configured otherwise") {
    EffectScenario scenario;
    scenario.x = 5;
    const auto y1 = apply_effects(column_of({2}), {ResponseType::reduction}, scenario, {true});
    CHECK(y1(0, 0) == 1);
    scenario.floor = ReductionFloor::zero;
    CHECK(apply_effects(column_of({2}), {ResponseType::reduction}, scenario, {true})(0, 0) == 0);
}

TEST_CASE("response type labels must match the baseline") {
    EffectScenario scenario;
    CHECK_THROWS_AS(apply_effects(column_of({0}), {ResponseType::cessation}, scenario, {true}),
                    ValidationError);
    CHECK_THROWS_AS(apply_effects(column_of({3}), {ResponseType::never_violent}, scenario, {true}),
                    ValidationError);
}

TEST_CASE("response types") {
    RandomStream rng{1};
    CountMatrix y0 = random_baseline(2000, 4, rng);
    const std::vector<bool> all(4, true);
    const auto none = assign_response_types(y0, scenario_with({1, 0, 0, 0}), all, rng);
    for (Eigen::Index i = 0; i < y0.rows(); ++i) {
        const bool violent = y0.row(i).maxCoeff() > 0;
        CHECK(none[static_cast<std::size_t>(i)] ==
              (violent ? ResponseType::no_effect : ResponseType::never_violent));
    }
    const auto cessation = assign_response_types(y0, scenario_with({0, 1, 0, 0}), all, rng);
    for (Eigen::Index i = 0; i < y0.rows(); ++i) {
        if (y0.row(i).maxCoeff() == 0) {
            CHECK(cessation[static_cast<std::size_t>(i)] == ResponseType::never_violent);
        }
    }
}

TEST_CASE("cessation share among violent units") {
    RandomStream rng{2};
    CountMatrix y0 = CountMatrix::Ones(100000, 1);
    const auto s = assign_response_types(y0, scenario_with({0.7, 0.3, 0, 0}), {true}, rng);
    double cessation = 0.0;
    for (const auto t : s) {
        cessation += t == ResponseType::cessation ? 1.0 : 0.0;
    }
    CHECK(std::abs(cessation / 1e5 - 0.30) < 0.006);
}

TEST_CASE("response-type frequencies follow p_s") {
    RandomStream rng{3};
    const std::size_t n = 100000;
    CountMatrix y0 = CountMatrix::Ones(static_cast<Eigen::Index>(n), 2);
    const std::array<double, 4> p{0.55, 0.15, 0.2, 0.1};
    const auto s = assign_response_types(y0, scenario_with(p), {true, true}, rng);
    std::array<double, 4> counts{};
    for (const auto t : s) {
        counts[static_cast<std::size_t>(t) - 1] += 1.0;
    }
    double statistic = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        const double expected = p[c] * n;
        statistic += (counts[c] - expected) * (counts[c] - expected) / expected;
    }
    CHECK(oracle::chi_square_sf(statistic, 3) > 0.01);
}

TEST_CASE("schedule invariants over random tables and targets") {
    RandomStream rng{4};
    const auto acts = default_acts();
    for (const auto &target : {ActTarget::all(), ActTarget::physical(), ActTarget::sexual(),
                               ActTarget::moderate(), ActTarget::explicit_acts({2, 9})}) {
        const auto mask = target.mask(acts);
        auto scenario = scenario_with({0.4, 0.2, 0.25, 0.15}, target);
        scenario.x = 3;
        const auto table = build_schedule(random_baseline(3000, acts.size(), rng), scenario, acts, rng);
        for (Eigen::Index i = 0; i < table.y0.rows(); ++i) {
            const auto type = table.s[static_cast<std::size_t>(i)];
            bool any_targeted = false;
            for (Eigen::Index j = 0; j < table.y0.cols(); ++j) {
                any_targeted |= mask[static_cast<std::size_t>(j)] && table.y0(i, j) > 0;
            }
            CHECK((type == ResponseType::never_violent) == !any_targeted);
            if (!any_targeted) {
                CHECK(table.y1.row(i) == table.y0.row(i));
            }
            for (Eigen::Index j = 0; j < table.y0.cols(); ++j) {
                const int before = table.y0(i, j);
                const int after = table.y1(i, j);
                if (!mask[static_cast<std::size_t>(j)] || before == 0) {
                    CHECK(after == before);
                    continue;
                }
                switch (type) {
                case ResponseType::cessation:
                    CHECK(after == 0);
                    break;
                case ResponseType::reduction:
                    // A single episode cannot drop below the floor of one.
                    CHECK(after == std::max(before - 3, 1));
                    CHECK((after < before || before == 1));
                    break;
                case ResponseType::increase:
                    CHECK(after == before + 3);
                    break;
                default:
                    CHECK(after == before);
                }
            }
        }
    }
}

TEST_CASE("true estimands") {
    RandomStream rng{5};
    const auto acts = default_acts();
    const auto y0 = random_baseline(5000, acts.size(), rng);

    const auto null = build_schedule(y0, scenario_with({1, 0, 0, 0}), acts, rng);
    CHECK(true_estimands(null).tau_binary == 0.0);
    CHECK(true_estimands(null).tau_sum == 0.0);

    const auto reduction = build_schedule(y0, scenario_with({0.7, 0, 0.3, 0}), acts, rng);
    CHECK(true_estimands(reduction).tau_binary == 0.0);
    CHECK(true_estimands(reduction).tau_sum < 0.0);

    const auto cessation = build_schedule(y0, scenario_with({0.7, 0.3, 0, 0}), acts, rng);
    double ceased = 0.0;
    for (const auto t : cessation.s) {
        ceased += t == ResponseType::cessation ? 1.0 : 0.0;
    }
    CHECK(true_estimands(cessation).tau_binary == doctest::Approx(-ceased / 5000.0).epsilon(1e-14));
}

TEST_CASE("moving mass from no effect to cessation grows the effects") {
    const auto acts = default_acts();
    RandomStream base{6};
    const auto y0 = random_baseline(4000, acts.size(), base);
    double previous_binary = 0.0;
    double previous_sum = 0.0;
    for (const double c : {0.0, 0.1, 0.3, 0.6}) {
        RandomStream rng{60};
        const auto table = build_schedule(y0, scenario_with({1 - c, c, 0, 0}), acts, rng);
        const auto tau = true_estimands(table);
        CHECK(std::abs(tau.tau_binary) >= previous_binary);
        CHECK(std::abs(tau.tau_sum) >= previous_sum);
        previous_binary = std::abs(tau.tau_binary);
        previous_sum = std::abs(tau.tau_sum);
    }
}

TEST_CASE("sexual-only programs leave physical acts untouched") {
    const auto acts = default_acts();
    RandomStream rng{7};
    const auto table =
        build_schedule(random_baseline(3000, acts.size(), rng),
                       scenario_with({0.2, 0.4, 0.3, 0.1}, ActTarget::sexual()), acts, rng);
    for (std::size_t j = 0; j < acts.size(); ++j) {
        if (acts[j].category == ActCategory::physical) {
            CHECK(table.y1.col(static_cast<Eigen::Index>(j)) == table.y0.col(static_cast<Eigen::Index>(j)));
        }
    }
}

TEST_CASE("complete randomization") {
    RandomStream rng{8};
    for (const std::size_t n : {2u, 4u, 5u, 1680u}) {
        const auto z = randomize(n, rng);
        CHECK(z.size() == n);
        CHECK(std::count(z.begin(), z.end(), 1) == static_cast<long>(n / 2));
    }
    CHECK_THROWS_AS(randomize(1, rng), DomainError);

    std::vector<double> treated(20, 0.0);
    for (int draw = 0; draw < 10000; ++draw) {
        const auto z = randomize(20, rng);
        for (std::size_t i = 0; i < 20; ++i) {
            treated[i] += z[i];
        }
    }
    for (const double t : treated) {
        CHECK(std::abs(t / 10000.0 - 0.5) < 0.02);
    }
}

TEST_CASE("scenario and target validation") {
    CHECK_THROWS_AS(scenario_with({0.5, 0.6, 0, 0}).validate(), ValidationError);
    CHECK_THROWS_AS(scenario_with({1.2, -0.2, 0, 0}).validate(), ValidationError);
    auto s = scenario_with({1, 0, 0, 0});
    s.x = 0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    CHECK_THROWS_AS(ActTarget::explicit_acts({11}).mask(default_acts()), ValidationError);
    CHECK_THROWS_AS(ActTarget::sexual().mask(single_act()), ValidationError);
    CHECK_THROWS_AS(ActTarget::parse("severe"), ValidationError);
    const auto moderate = ActTarget::moderate().mask(default_acts());
    CHECK(std::count(moderate.begin(), moderate.end(), true) == 3);
}

} // TEST_SUITE
