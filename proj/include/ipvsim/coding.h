#pragma once

#include "ipvsim/types.h"

#include <optional>
#include <span>
#include <vector>

namespace ipvsim {

/// Survey frequency category of a latent count: 0 never, 1 once, 2 a few times (2-4),
/// 3 many times (5+).
int categorize(int count);

/// Elementwise categorize.
CountMatrix categorize(const CountMatrix &counts);

/// 1 if any act category is positive.
int code_binary(std::span<const int> categories);

/// Sum of categories divided by the maximum attainable score 3K, so the value lies in [0, 1].
double code_sum(std::span<const int> categories);

/// Straus chronicity: raw sum of category scores, defined only for respondents reporting
/// any act. Not part of the default codings.
std::optional<double> code_chronicity(std::span<const int> categories);

struct CodedOutcomes {
    std::vector<double> binary;
    std::vector<double> sum;
};

/// Categorizes each row of latent counts and applies both codings.
CodedOutcomes code_outcomes(const CountMatrix &latent_counts);

} // namespace ipvsim
