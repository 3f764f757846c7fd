#include "ipvsim/mc_harness.h"

#include "ipvsim/coding.h"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace ipvsim {

namespace {

CodingOutcome evaluate_coding(std::span<const double> outcome, std::span<const int> z,
                              double tau_true, const SimulationConfig &config) {
    const EstimateResult estimate = estimate_ols_hc2(outcome, z, config.alpha, config.reference);
    CodingOutcome result;
    result.tau_hat = estimate.tau_hat;
    result.se = estimate.se;
    result.p_value = estimate.p_value;
    result.ci_low = estimate.ci_low;
    result.ci_high = estimate.ci_high;
    result.tau_true = tau_true;
    result.rejected = reject_null(estimate, config.alpha);
    result.covered = estimate.ci_low <= tau_true && tau_true <= estimate.ci_high;
    return result;
}

std::vector<double> row_totals(const CountMatrix &counts) {
    std::vector<double> totals(static_cast<std::size_t>(counts.rows()));
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        totals[static_cast<std::size_t>(i)] = counts.row(i).cast<double>().sum();
    }
    return totals;
}

template <typename Stat>
double mean_of(const std::vector<ReplicationRecord> &records, const std::vector<std::size_t> &idx,
               Stat &&stat) {
    double total = 0.0;
    for (const std::size_t i : idx) {
        total += stat(records[i]);
    }
    return total / static_cast<double>(idx.size());
}

StatisticSet coding_statistics(const std::vector<ReplicationRecord> &records,
                               const std::vector<std::size_t> &idx, Coding coding) {
    StatisticSet stats;
    stats.bias = mean_of(records, idx, [coding](const ReplicationRecord &r) {
        const auto &o = r.get(coding);
        return o.tau_hat - o.tau_true;
    });
    stats.rmse = std::sqrt(mean_of(records, idx, [coding](const ReplicationRecord &r) {
        const auto &o = r.get(coding);
        const double error = o.tau_hat - o.tau_true;
        return error * error;
    }));
    stats.power = mean_of(records, idx, [coding](const ReplicationRecord &r) {
        return r.get(coding).rejected ? 1.0 : 0.0;
    });
    stats.coverage = mean_of(records, idx, [coding](const ReplicationRecord &r) {
        return r.get(coding).covered ? 1.0 : 0.0;
    });
    return stats;
}

CodingPerformance coding_performance(const std::vector<ReplicationRecord> &records,
                                     const std::vector<std::size_t> &idx, Coding coding) {
    CodingPerformance performance;
    performance.value = coding_statistics(records, idx, coding);
    performance.mean_true_tau = mean_of(
        records, idx, [coding](const ReplicationRecord &r) { return r.get(coding).tau_true; });
    performance.null_truth = true;
    for (const std::size_t i : idx) {
        if (records[i].get(coding).tau_true != 0.0) {
            performance.null_truth = false;
            break;
        }
    }
    return performance;
}

/// Sample standard deviation of each statistic across bootstrap draws.
class SpreadAccumulator {
  public:
    void add(const StatisticSet &s) { draws_.push_back(s); }

    StatisticSet standard_deviation() const {
        StatisticSet mean;
        for (const auto &d : draws_) {
            mean.bias += d.bias;
            mean.rmse += d.rmse;
            mean.power += d.power;
            mean.coverage += d.coverage;
        }
        const double n = static_cast<double>(draws_.size());
        mean.bias /= n;
        mean.rmse /= n;
        mean.power /= n;
        mean.coverage /= n;
        StatisticSet spread;
        for (const auto &d : draws_) {
            spread.bias += (d.bias - mean.bias) * (d.bias - mean.bias);
            spread.rmse += (d.rmse - mean.rmse) * (d.rmse - mean.rmse);
            spread.power += (d.power - mean.power) * (d.power - mean.power);
            spread.coverage += (d.coverage - mean.coverage) * (d.coverage - mean.coverage);
        }
        spread.bias = std::sqrt(spread.bias / (n - 1.0));
        spread.rmse = std::sqrt(spread.rmse / (n - 1.0));
        spread.power = std::sqrt(spread.power / (n - 1.0));
        spread.coverage = std::sqrt(spread.coverage / (n - 1.0));
        return spread;
    }

  private:
    std::vector<StatisticSet> draws_;
};

double sample_sd(const std::vector<double> &values) {
    double mean = 0.0;
    for (const double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double squares = 0.0;
    for (const double v : values) {
        squares += (v - mean) * (v - mean);
    }
    return std::sqrt(squares / static_cast<double>(values.size() - 1));
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = i;
    }
    return idx;
}

EffectScenario make_scenario(std::string name, std::array<double, 4> p_s) {
    EffectScenario scenario;
    scenario.name = std::move(name);
    scenario.p_s = p_s;
    return scenario;
}

} // namespace

std::string_view to_string(Coding coding) noexcept {
    switch (coding) {
    case Coding::binary:
        return "binary";
    case Coding::sum:
        return "sum";
    case Coding::latent_total:
        return "latent_total";
    }
    return "unknown";
}

SimulationConfig SimulationConfig::for_model(MultiActModel model) {
    SimulationConfig config;
    config.baseline = std::make_shared<JointSampler>(std::move(model));
    return config;
}

void SimulationConfig::validate() const {
    if (!baseline) {
        throw ValidationError("simulation has no baseline outcome generator");
    }
    scenario.validate();
    scenario.target.mask(baseline->acts());
    if (n_reps < 1) {
        throw ValidationError("n_reps must be at least 1");
    }
    if (n_units < 4) {
        throw ValidationError("n_units must be at least 4");
    }
    if (n_bootstrap < 2) {
        throw ValidationError("n_bootstrap must be at least 2");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0, 1)");
    }
}

const CodingOutcome &ReplicationRecord::get(Coding coding) const {
    switch (coding) {
    case Coding::binary:
        return binary;
    case Coding::sum:
        return sum;
    case Coding::latent_total:
        break;
    }
    if (!latent) {
        throw ValidationError("replication record carries no latent-scale diagnostic");
    }
    return *latent;
}

const CodingPerformance &PerformanceStats::get(Coding coding) const {
    switch (coding) {
    case Coding::binary:
        return binary;
    case Coding::sum:
        return sum;
    case Coding::latent_total:
        break;
    }
    if (!latent) {
        throw ValidationError("performance summary carries no latent-scale diagnostic");
    }
    return *latent;
}

ReplicationRecord run_replication(const SimulationConfig &config, std::size_t rep_index) {
    const auto n = config.n_units;
    RandomStream baseline_stream =
        RandomStream::substream(config.seed, rep_index, StreamPurpose::baseline);
    RandomStream assignment_stream =
        RandomStream::substream(config.seed, rep_index, StreamPurpose::assignment);
    RandomStream type_stream =
        RandomStream::substream(config.seed, rep_index, StreamPurpose::response_types);

    ReplicationRecord record;
    record.rep_index = rep_index;
    try {
        CountMatrix y0 = config.baseline->draw(n, baseline_stream);
        std::vector<int> z = randomize(n, assignment_stream);
        PotentialOutcomeTable table =
            build_schedule(std::move(y0), config.scenario, config.baseline->acts(), type_stream);
        table.z = std::move(z);

        const TrueEstimands truth = true_estimands(table);
        const CountMatrix observed = reveal(table);
        const CodedOutcomes coded = code_outcomes(observed);

        record.binary = evaluate_coding(coded.binary, table.z, truth.tau_binary, config);
        record.sum = evaluate_coding(coded.sum, table.z, truth.tau_sum, config);
        if (config.latent_diagnostic) {
            const auto before = row_totals(table.y0);
            const auto after = row_totals(table.y1);
            double latent_truth = 0.0;
            for (std::size_t i = 0; i < before.size(); ++i) {
                latent_truth += after[i] - before[i];
            }
            latent_truth /= static_cast<double>(before.size());
            record.latent = evaluate_coding(row_totals(observed), table.z, latent_truth, config);
        }
    } catch (const Error &e) {
        throw ReplicationError(rep_index, e.what());
    }
    return record;
}

std::vector<ReplicationRecord> run_replications(const SimulationConfig &config) {
    config.validate();
    std::vector<ReplicationRecord> records(config.n_reps);
    const unsigned workers =
        std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.n_reps)));

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::size_t failure_index = config.n_reps;

    auto work = [&]() {
        while (true) {
            const std::size_t rep = next.fetch_add(1);
            if (rep >= config.n_reps) {
                return;
            }
            try {
                records[rep] = run_replication(config, rep);
            } catch (...) {
                // Report the lowest failing replication so errors do not depend on scheduling.
                const std::lock_guard lock{failure_mutex};
                if (rep < failure_index) {
                    failure_index = rep;
                    failure = std::current_exception();
                }
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto &thread : pool) {
            thread.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return records;
}

PerformanceStats summarize(const std::vector<ReplicationRecord> &replications) {
    if (replications.empty()) {
        throw ValidationError("cannot summarize zero replications");
    }
    const auto idx = all_indices(replications.size());
    PerformanceStats stats;
    stats.n_reps = replications.size();
    stats.binary = coding_performance(replications, idx, Coding::binary);
    stats.sum = coding_performance(replications, idx, Coding::sum);
    if (replications.front().latent) {
        stats.latent = coding_performance(replications, idx, Coding::latent_total);
    }
    stats.power_diff = stats.binary.value.power - stats.sum.value.power;
    return stats;
}

MonteCarloErrors bootstrap_mc_se(const std::vector<ReplicationRecord> &replications,
                                 std::size_t n_bootstrap, RandomStream &rng) {
    if (n_bootstrap < 2) {
        throw ValidationError("n_bootstrap must be at least 2");
    }
    if (replications.empty()) {
        throw ValidationError("cannot bootstrap zero replications");
    }
    const bool has_latent = replications.front().latent.has_value();
    const std::size_t m = replications.size();
    SpreadAccumulator binary;
    SpreadAccumulator sum;
    SpreadAccumulator latent;
    std::vector<double> power_diffs;
    power_diffs.reserve(n_bootstrap);
    std::vector<std::size_t> idx(m);
    for (std::size_t b = 0; b < n_bootstrap; ++b) {
        for (auto &i : idx) {
            i = static_cast<std::size_t>(rng.below(m));
        }
        const StatisticSet binary_stats = coding_statistics(replications, idx, Coding::binary);
        const StatisticSet sum_stats = coding_statistics(replications, idx, Coding::sum);
        binary.add(binary_stats);
        sum.add(sum_stats);
        if (has_latent) {
            latent.add(coding_statistics(replications, idx, Coding::latent_total));
        }
        power_diffs.push_back(binary_stats.power - sum_stats.power);
    }
    MonteCarloErrors errors;
    errors.binary = binary.standard_deviation();
    errors.sum = sum.standard_deviation();
    if (has_latent) {
        errors.latent = latent.standard_deviation();
    }
    errors.power_diff = sample_sd(power_diffs);
    return errors;
}

PerformanceStats evaluate(const SimulationConfig &config) {
    const auto records = run_replications(config);
    PerformanceStats stats = summarize(records);
    RandomStream rng = RandomStream::substream(config.seed, 0, StreamPurpose::bootstrap);
    const MonteCarloErrors errors = bootstrap_mc_se(records, config.n_bootstrap, rng);
    stats.binary.mc_se = errors.binary;
    stats.sum.mc_se = errors.sum;
    if (stats.latent && errors.latent) {
        stats.latent->mc_se = *errors.latent;
    }
    stats.power_diff_mc_se = errors.power_diff;
    return stats;
}

std::vector<EffectScenario> scenario_presets() {
    return {
        make_scenario("null", {1.0, 0.0, 0.0, 0.0}),
        make_scenario("cessation_only", {0.70, 0.30, 0.0, 0.0}),
        make_scenario("cessation_reduction", {0.70, 0.10, 0.20, 0.0}),
        make_scenario("reduction_only", {0.70, 0.0, 0.30, 0.0}),
        make_scenario("cessation_reduction_increase", {0.70, 0.10, 0.15, 0.05}),
    };
}

EffectScenario scenario_preset(std::string_view name) {
    for (auto &scenario : scenario_presets()) {
        if (scenario.name == name) {
            return scenario;
        }
    }
    throw ValidationError("unknown scenario preset '" + std::string{name} + "'");
}

std::vector<ActTarget> target_presets() {
    return {ActTarget::all(), ActTarget::physical(), ActTarget::sexual(), ActTarget::moderate()};
}

std::vector<GridCell> scenario_grid(const SimulationConfig &base,
                                    const std::vector<EffectScenario> &scenarios,
                                    const std::vector<ActTarget> &targets) {
    if (scenarios.empty() || targets.empty()) {
        throw ValidationError("scenario grid needs at least one scenario and one target");
    }
    std::vector<SimulationConfig> configs;
    configs.reserve(scenarios.size() * targets.size());
    for (const auto &scenario : scenarios) {
        for (const auto &target : targets) {
            SimulationConfig config = base;
            config.scenario = scenario;
            config.scenario.target = target;
            // Surface configuration errors before any cell starts computing.
            config.validate();
            configs.push_back(std::move(config));
        }
    }
    std::vector<GridCell> cells;
    cells.reserve(configs.size());
    for (const auto &config : configs) {
        cells.push_back({config.scenario, evaluate(config)});
    }
    return cells;
}

} // namespace ipvsim
