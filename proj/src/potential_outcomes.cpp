#include "ipvsim/potential_outcomes.h"

#include "ipvsim/coding.h"
#include "ipvsim/errors.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ipvsim {

namespace {

bool any_targeted_positive(const CountMatrix &y0, Eigen::Index row,
                           const std::vector<bool> &targeted) {
    for (Eigen::Index k = 0; k < y0.cols(); ++k) {
        if (targeted[static_cast<std::size_t>(k)] && y0(row, k) > 0) {
            return true;
        }
    }
    return false;
}

void check_mask(const CountMatrix &y0, const std::vector<bool> &targeted) {
    if (targeted.size() != static_cast<std::size_t>(y0.cols())) {
        throw ValidationError("target mask has " + std::to_string(targeted.size()) +
                              " entries for " + std::to_string(y0.cols()) + " acts");
    }
}

} // namespace

std::string_view to_string(ResponseType type) noexcept {
    switch (type) {
    case ResponseType::never_violent:
        return "never_violent";
    case ResponseType::no_effect:
        return "no_effect";
    case ResponseType::cessation:
        return "cessation";
    case ResponseType::reduction:
        return "reduction";
    case ResponseType::increase:
        return "increase";
    }
    return "unknown";
}

ActTarget::ActTarget(Kind kind, std::string name, std::vector<int> indices)
    : kind_{kind}, name_{std::move(name)}, indices_{std::move(indices)} {}

ActTarget ActTarget::all() { return {Kind::all, "all"}; }
ActTarget ActTarget::physical() { return {Kind::physical, "physical"}; }
ActTarget ActTarget::sexual() { return {Kind::sexual, "sexual"}; }
ActTarget ActTarget::moderate() { return {Kind::moderate, "moderate"}; }

ActTarget ActTarget::explicit_acts(std::vector<int> indices, std::string name) {
    if (indices.empty()) {
        throw ValidationError("explicit act target '" + name + "' lists no acts");
    }
    return {Kind::explicit_list, std::move(name), std::move(indices)};
}

ActTarget ActTarget::parse(std::string_view name) {
    if (name == "all") {
        return all();
    }
    if (name == "physical") {
        return physical();
    }
    if (name == "sexual") {
        return sexual();
    }
    if (name == "moderate") {
        return moderate();
    }
    throw ValidationError("unknown act target '" + std::string{name} +
                          "' (expected all, physical, sexual or moderate)");
}

std::vector<bool> ActTarget::mask(const std::vector<ActSpec> &acts) const {
    std::vector<bool> result(acts.size(), false);
    for (std::size_t k = 0; k < acts.size(); ++k) {
        switch (kind_) {
        case Kind::all:
            result[k] = true;
            break;
        case Kind::physical:
            result[k] = acts[k].category == ActCategory::physical;
            break;
        case Kind::sexual:
            result[k] = acts[k].category == ActCategory::sexual;
            break;
        case Kind::moderate:
            result[k] = acts[k].severity == Severity::moderate;
            break;
        case Kind::explicit_list:
            break;
        }
    }
    for (const int index : indices_) {
        if (index < 1 || index > static_cast<int>(acts.size())) {
            throw ValidationError("act target '" + name_ + "' references act " +
                                  std::to_string(index) + " outside 1.." +
                                  std::to_string(acts.size()));
        }
        result[static_cast<std::size_t>(index - 1)] = true;
    }
    if (std::none_of(result.begin(), result.end(), [](bool b) { return b; })) {
        throw ValidationError("act target '" + name_ + "' selects no acts in this act table");
    }
    return result;
}

void EffectScenario::validate() const {
    double total = 0.0;
    for (const double p : p_s) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError("scenario '" + name + "': response-type probabilities must be "
                                  "non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("scenario '" + name + "': response-type probabilities sum to " +
                              std::to_string(total) + ", not 1");
    }
    if (x < 1) {
        throw ValidationError("scenario '" + name + "': effect magnitude x must be >= 1");
    }
}

std::vector<ResponseType> assign_response_types(const CountMatrix &y0,
                                                const EffectScenario &scenario,
                                                const std::vector<bool> &targeted,
                                                RandomStream &rng) {
    scenario.validate();
    check_mask(y0, targeted);
    constexpr std::array<ResponseType, 4> kTypes{ResponseType::no_effect, ResponseType::cessation,
                                                 ResponseType::reduction, ResponseType::increase};
    std::vector<ResponseType> types(static_cast<std::size_t>(y0.rows()),
                                    ResponseType::never_violent);
    for (Eigen::Index i = 0; i < y0.rows(); ++i) {
        const double u = rng.uniform();
        if (!any_targeted_positive(y0, i, targeted)) {
            continue;
        }
        // Fall through to the last type with positive probability on rounding.
        std::size_t chosen = 3;
        while (scenario.p_s[chosen] <= 0.0 && chosen > 0) {
            --chosen;
        }
        double cumulative = 0.0;
        for (std::size_t t = 0; t < kTypes.size(); ++t) {
            cumulative += scenario.p_s[t];
            if (u < cumulative) {
                chosen = t;
                break;
            }
        }
        types[static_cast<std::size_t>(i)] = kTypes[chosen];
    }
    return types;
}

CountMatrix apply_effects(const CountMatrix &y0, const std::vector<ResponseType> &s,
                          const EffectScenario &scenario, const std::vector<bool> &targeted) {
    scenario.validate();
    check_mask(y0, targeted);
    if (s.size() != static_cast<std::size_t>(y0.rows())) {
        throw ValidationError("response types cover " + std::to_string(s.size()) +
                              " units but Y(0) has " + std::to_string(y0.rows()));
    }
    const int floor = scenario.floor == ReductionFloor::one ? 1 : 0;
    CountMatrix y1 = y0;
    for (Eigen::Index i = 0; i < y0.rows(); ++i) {
        const ResponseType type = s[static_cast<std::size_t>(i)];
        const bool violent = any_targeted_positive(y0, i, targeted);
        if (violent == (type == ResponseType::never_violent)) {
            throw ValidationError("unit " + std::to_string(i + 1) + " has response type " +
                                  std::string{to_string(type)} +
                                  " inconsistent with its targeted Y(0)");
        }
        for (Eigen::Index k = 0; k < y0.cols(); ++k) {
            const int before = y0(i, k);
            if (!targeted[static_cast<std::size_t>(k)] || before == 0) {
                continue;
            }
            switch (type) {
            case ResponseType::never_violent:
            case ResponseType::no_effect:
                break;
            case ResponseType::cessation:
                y1(i, k) = 0;
                break;
            case ResponseType::reduction:
                y1(i, k) = std::max(before - scenario.x, floor);
                break;
            case ResponseType::increase:
                y1(i, k) = before + scenario.x;
                break;
            }
        }
    }
    return y1;
}

PotentialOutcomeTable build_schedule(CountMatrix y0, const EffectScenario &scenario,
                                     const std::vector<ActSpec> &acts, RandomStream &rng) {
    const auto targeted = scenario.target.mask(acts);
    PotentialOutcomeTable table;
    table.s = assign_response_types(y0, scenario, targeted, rng);
    table.y1 = apply_effects(y0, table.s, scenario, targeted);
    table.y0 = std::move(y0);
    return table;
}

TrueEstimands true_estimands(const PotentialOutcomeTable &table) {
    const auto n = table.y0.rows();
    if (n == 0) {
        throw ValidationError("cannot compute estimands for an empty schedule");
    }
    const CodedOutcomes control = code_outcomes(table.y0);
    const CodedOutcomes treated = code_outcomes(table.y1);
    TrueEstimands tau;
    for (std::size_t i = 0; i < control.binary.size(); ++i) {
        tau.tau_binary += treated.binary[i] - control.binary[i];
        tau.tau_sum += treated.sum[i] - control.sum[i];
    }
    tau.tau_binary /= static_cast<double>(n);
    tau.tau_sum /= static_cast<double>(n);
    return tau;
}

std::vector<int> randomize(std::size_t n, RandomStream &rng) {
    if (n < 2) {
        throw DomainError("randomization needs at least 2 units, got " + std::to_string(n));
    }
    std::vector<int> z(n, 0);
    std::fill(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
    // Fisher-Yates with the stream's own integer draws.
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(z[i], z[j]);
    }
    return z;
}

CountMatrix reveal(const PotentialOutcomeTable &table) {
    if (table.z.size() != static_cast<std::size_t>(table.y0.rows())) {
        throw ValidationError("assignment vector does not match the schedule");
    }
    CountMatrix observed = table.y0;
    for (Eigen::Index i = 0; i < observed.rows(); ++i) {
        if (table.z[static_cast<std::size_t>(i)] == 1) {
            observed.row(i) = table.y1.row(i);
        }
    }
    return observed;
}

} // namespace ipvsim
