#pragma once

#include "ipvsim/multivariate.h"
#include "ipvsim/random.h"
#include "ipvsim/types.h"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ipvsim {

/// Unit-level program response. Units with no targeted violence under control are
/// `never_violent` and receive no draw.
enum class ResponseType : std::uint8_t { never_violent, no_effect, cessation, reduction, increase };

std::string_view to_string(ResponseType type) noexcept;

/// Subset of acts a program acts upon.
class ActTarget {
  public:
    enum class Kind { all, physical, sexual, moderate, explicit_list };

    static ActTarget all();
    static ActTarget physical();
    static ActTarget sexual();
    static ActTarget moderate();
    /// 1-based act indices.
    static ActTarget explicit_acts(std::vector<int> indices, std::string name = "custom");

    /// Accepts "all", "physical", "sexual" or "moderate".
    static ActTarget parse(std::string_view name);

    Kind kind() const noexcept { return kind_; }
    const std::string &name() const noexcept { return name_; }
    const std::vector<int> &indices() const noexcept { return indices_; }

    /// Per-act membership. Throws ValidationError if an index is out of range or the
    /// subset is empty for this act table.
    std::vector<bool> mask(const std::vector<ActSpec> &acts) const;

  private:
    ActTarget(Kind kind, std::string name, std::vector<int> indices = {});

    Kind kind_;
    std::string name_;
    std::vector<int> indices_;
};

/// Whether a reduction may bring a count below 1. The default keeps reduction disjoint
/// from cessation.
enum class ReductionFloor { one, zero };

struct EffectScenario {
    std::string name = "custom";
    /// Probabilities of no effect, cessation, reduction, increase among violent units.
    std::array<double, 4> p_s{1.0, 0.0, 0.0, 0.0};
    /// Change in counts applied by reduction and increase.
    int x = 2;
    ActTarget target = ActTarget::all();
    ReductionFloor floor = ReductionFloor::one;

    /// Throws ValidationError unless p_s is a probability vector and x >= 1.
    void validate() const;
};

struct PotentialOutcomeTable {
    CountMatrix y0;
    CountMatrix y1;
    std::vector<ResponseType> s;
    /// Assignment; empty until randomized.
    std::vector<int> z;
};

/// Draws one uniform per unit (so draws stay aligned across scenarios sharing a stream)
/// and maps it through the cumulative p_s for units with any positive targeted act.
std::vector<ResponseType> assign_response_types(const CountMatrix &y0,
                                                const EffectScenario &scenario,
                                                const std::vector<bool> &targeted,
                                                RandomStream &rng);

/// Y(1) from Y(0) and response types. Only positive targeted entries change; untargeted
/// acts and zero entries are carried over unchanged.
CountMatrix apply_effects(const CountMatrix &y0, const std::vector<ResponseType> &s,
                          const EffectScenario &scenario, const std::vector<bool> &targeted);

PotentialOutcomeTable build_schedule(CountMatrix y0, const EffectScenario &scenario,
                                     const std::vector<ActSpec> &acts, RandomStream &rng);

struct TrueEstimands {
    double tau_binary = 0.0;
    double tau_sum = 0.0;
};

/// Finite-sample average effects of the coded outcomes over the whole schedule.
TrueEstimands true_estimands(const PotentialOutcomeTable &table);

/// Complete randomization: exactly floor(n / 2) units treated.
std::vector<int> randomize(std::size_t n, RandomStream &rng);

/// Y = Z * Y(1) + (1 - Z) * Y(0), row by row.
CountMatrix reveal(const PotentialOutcomeTable &table);

} // namespace ipvsim
