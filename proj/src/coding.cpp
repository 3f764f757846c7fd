#include "ipvsim/coding.h"

#include "ipvsim/errors.h"

#include <numeric>
#include <string>

namespace ipvsim {

namespace {

int checked_sum(std::span<const int> categories) {
    int total = 0;
    for (const int c : categories) {
        if (c < 0 || c > 3) {
            throw ValidationError("category out of range [0, 3]: " + std::to_string(c));
        }
        total += c;
    }
    return total;
}

std::span<const int> row_span(const CountMatrix &m, Eigen::Index row) {
    return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}

} // namespace

int categorize(int count) {
    if (count < 0) {
        throw DomainError("latent counts must be non-negative, got " + std::to_string(count));
    }
    if (count <= 1) {
        return count;
    }
    return count <= 4 ? 2 : 3;
}

CountMatrix categorize(const CountMatrix &counts) {
    return counts.unaryExpr([](int y) { return categorize(y); });
}

int code_binary(std::span<const int> categories) { return checked_sum(categories) > 0 ? 1 : 0; }

double code_sum(std::span<const int> categories) {
    if (categories.empty()) {
        return 0.0;
    }
    return static_cast<double>(checked_sum(categories)) /
           (3.0 * static_cast<double>(categories.size()));
}

std::optional<double> code_chronicity(std::span<const int> categories) {
    const int total = checked_sum(categories);
    if (total == 0) {
        return std::nullopt;
    }
    return static_cast<double>(total);
}

CodedOutcomes code_outcomes(const CountMatrix &latent_counts) {
    const CountMatrix categories = categorize(latent_counts);
    CodedOutcomes coded;
    const auto n = static_cast<std::size_t>(categories.rows());
    coded.binary.resize(n);
    coded.sum.resize(n);
    for (Eigen::Index i = 0; i < categories.rows(); ++i) {
        const auto row = row_span(categories, i);
        coded.binary[static_cast<std::size_t>(i)] = code_binary(row);
        coded.sum[static_cast<std::size_t>(i)] = code_sum(row);
    }
    return coded;
}

} // namespace ipvsim
