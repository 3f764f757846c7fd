#pragma once

#include "ipvsim/errors.h"
#include "ipvsim/estimation.h"
#include "ipvsim/multivariate.h"
#include "ipvsim/potential_outcomes.h"
#include "ipvsim/random.h"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ipvsim {

/// Outcome codings evaluated by the harness. `latent_total` (the uncategorized total count
/// of acts, judged against its own latent-scale truth) is an optional diagnostic.
enum class Coding { binary, sum, latent_total };

std::string_view to_string(Coding coding) noexcept;

struct SimulationConfig {
    std::shared_ptr<const BaselineGenerator> baseline;
    EffectScenario scenario;
    std::size_t n_units = 1680;
    std::size_t n_reps = 1000;
    std::size_t n_bootstrap = 100;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    ReferenceDistribution reference = ReferenceDistribution::normal;
    bool latent_diagnostic = false;

    static SimulationConfig for_model(MultiActModel model);

    void validate() const;
};

/// Library error raised inside a replication, tagged with the replication index.
class ReplicationError : public Error {
  public:
    ReplicationError(std::size_t rep_index, const std::string &message)
        : Error{"replication " + std::to_string(rep_index) + ": " + message},
          rep_index_{rep_index} {}

    std::size_t rep_index() const noexcept { return rep_index_; }

  private:
    std::size_t rep_index_;
};

struct CodingOutcome {
    double tau_hat = 0.0;
    double se = 0.0;
    double p_value = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double tau_true = 0.0;
    bool rejected = false;
    bool covered = false;
};

struct ReplicationRecord {
    std::size_t rep_index = 0;
    CodingOutcome binary;
    CodingOutcome sum;
    std::optional<CodingOutcome> latent;

    const CodingOutcome &get(Coding coding) const;
};

/// One pass of: draw Y(0) -> randomize -> assign response types -> Y(1) -> reveal ->
/// categorize and code -> estimate. Deterministic in (seed, rep_index): the baseline,
/// assignment and response-type draws come from separate sub-streams, so every scenario
/// run with the same seed sees identical Y(0) and assignments.
ReplicationRecord run_replication(const SimulationConfig &config, std::size_t rep_index);

/// All replications, executed on `config.threads` workers. Output order is by
/// replication index regardless of scheduling.
std::vector<ReplicationRecord> run_replications(const SimulationConfig &config);

struct StatisticSet {
    double bias = 0.0;
    double rmse = 0.0;
    double power = 0.0;
    double coverage = 0.0;
};

struct CodingPerformance {
    StatisticSet value;
    /// Bootstrap Monte Carlo standard errors; zero until bootstrap_mc_se has been applied.
    StatisticSet mc_se;
    double mean_true_tau = 0.0;
    /// The true effect is exactly 0 in every replication, so `power` is a type-I error rate.
    bool null_truth = false;
};

struct PerformanceStats {
    std::size_t n_reps = 0;
    CodingPerformance binary;
    CodingPerformance sum;
    std::optional<CodingPerformance> latent;
    /// power(binary) - power(sum) and its bootstrap SE from paired resamples.
    double power_diff = 0.0;
    double power_diff_mc_se = 0.0;

    const CodingPerformance &get(Coding coding) const;
};

PerformanceStats summarize(const std::vector<ReplicationRecord> &replications);

struct MonteCarloErrors {
    StatisticSet binary;
    StatisticSet sum;
    std::optional<StatisticSet> latent;
    double power_diff = 0.0;
};

/// Resamples whole replication records with replacement and reports the standard deviation
/// of each statistic across resamples.
MonteCarloErrors bootstrap_mc_se(const std::vector<ReplicationRecord> &replications,
                                 std::size_t n_bootstrap, RandomStream &rng);

/// run_replications + summarize + bootstrap_mc_se.
PerformanceStats evaluate(const SimulationConfig &config);

/// Named response-type mixes: null, cessation_only, cessation_reduction, reduction_only,
/// cessation_reduction_increase.
std::vector<EffectScenario> scenario_presets();
EffectScenario scenario_preset(std::string_view name);

/// all, physical, sexual, moderate.
std::vector<ActTarget> target_presets();

struct GridCell {
    EffectScenario scenario;
    PerformanceStats stats;
};

/// Evaluates every scenario x target combination with the base configuration's seed, so
/// all cells share Y(0) draws and assignments and both codings in a cell share every draw.
std::vector<GridCell> scenario_grid(const SimulationConfig &base,
                                    const std::vector<EffectScenario> &scenarios,
                                    const std::vector<ActTarget> &targets);

} // namespace ipvsim
