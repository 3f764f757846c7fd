#include "ipvsim/coding.h"
#include "ipvsim/errors.h"
#include "ipvsim/random.h"

#include <doctest.h>

#include <vector>

using namespace ipvsim;

TEST_SUITE("coding") {

TEST_CASE("categorize maps counts to survey categories") {
    CHECK(categorize(0) == 0);
    CHECK(categorize(1) == 1);
    CHECK(categorize(2) == 2);
    CHECK(categorize(3) == 2);
    CHECK(categorize(4) == 2);
    CHECK(categorize(5) == 3);
    CHECK(categorize(1000) == 3);
    CHECK_THROWS_AS(categorize(-1), DomainError);
    int previous = 0;
    for (int y = 0; y < 50; ++y) {
        CHECK(categorize(y) >= previous);
        previous = categorize(y);
    }
    CHECK(categorize(categorize(0)) == 0);
    CHECK(categorize(categorize(1)) == 1);
}

TEST_CASE("binary coding") {
    CHECK(code_binary(std::vector<int>(10, 0)) == 0);
    CHECK(code_binary(std::vector<int>{0, 0, 2, 0, 0, 0, 0, 0, 0, 0}) == 1);
    CHECK_THROWS_AS(code_binary(std::vector<int>{0, 4}), ValidationError);
}

TEST_CASE("sum coding is normalized by the maximum score") {
    CHECK(code_sum(std::vector<int>(10, 0)) == 0.0);
    CHECK(code_sum(std::vector<int>(10, 3)) == 1.0);
    CHECK(code_sum(std::vector<int>{2, 1, 0, 0, 0, 0, 0, 0, 0, 0}) == doctest::Approx(0.1));
    CHECK(code_sum(std::vector<int>{3, 3}) == 1.0);
    CHECK_THROWS_AS(code_sum(std::vector<int>{-1, 0}), ValidationError);
}

TEST_CASE("chronicity is defined only for respondents reporting an act") {
    CHECK_FALSE(code_chronicity(std::vector<int>{0, 0, 0}).has_value());
    CHECK(code_chronicity(std::vector<int>{2, 0, 3}).value() == 5.0);
}

TEST_CASE("coding properties over random category vectors") {
    RandomStream rng{5};
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t k = 1 + rng.below(12);
        std::vector<int> v(k);
        for (auto &c : v) {
            c = rng.uniform() < 0.6 ? 0 : static_cast<int>(rng.below(4));
        }
        const double sum = code_sum(v);
        CHECK(sum >= 0.0);
        CHECK(sum <= 1.0);
        CHECK(code_binary(v) == (sum > 0.0 ? 1 : 0));
        // Raising any entry never lowers either coding.
        auto w = v;
        const std::size_t j = rng.below(k);
        w[j] = std::min(3, w[j] + 1);
        CHECK(code_sum(w) >= sum);
        CHECK(code_binary(w) >= code_binary(v));
    }
}

TEST_CASE("reductions that keep counts positive never change the binary coding") {
    RandomStream rng{8};
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<int> before(10);
        std::vector<int> after(10);
        for (std::size_t k = 0; k < 10; ++k) {
            before[k] = rng.uniform() < 0.7 ? 0 : 1 + static_cast<int>(rng.below(12));
            const int x = 1 + static_cast<int>(rng.below(5));
            after[k] = before[k] == 0 ? 0 : std::max(before[k] - x, 1);
            before[k] = categorize(before[k]);
            after[k] = categorize(after[k]);
        }
        CHECK(code_binary(before) == code_binary(after));
    }
}

TEST_CASE("code_outcomes categorizes each row first") {
    CountMatrix counts(3, 2);
    counts << 0, 0, 7, 1, 3, 0;
    const auto coded = code_outcomes(counts);
    CHECK(coded.binary == std::vector<double>{0.0, 1.0, 1.0});
    CHECK(coded.sum[0] == 0.0);
    CHECK(coded.sum[1] == doctest::Approx(4.0 / 6.0));
    CHECK(coded.sum[2] == doctest::Approx(2.0 / 6.0));
}

} // TEST_SUITE
