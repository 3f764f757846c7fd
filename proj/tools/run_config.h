#pragma once

#include "ipvsim/mc_harness.h"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace ipvsim::cli {

/// Declarative simulation run. JSON layout:
///
///   {
///     "model": {"file": "model.json"}
///            | {"inline": { ...model document... }}
///            | {"survey": {"data": "survey.csv", "descriptor": "survey.json",
///                          "family": "zip", "baseline": "parametric" | "resample"}},
///     "scenarios": ["null", "cessation_only",
///                   {"name": "mine", "p_s": [0.6, 0.2, 0.2, 0], "x": 3, "floor": "one"}],
///     "targets": ["all", "sexual", {"name": "slaps", "acts": [1]}],
///     "n_units": 1680, "n_reps": 1000, "n_bootstrap": 100, "alpha": 0.05, "seed": 1,
///     "reference": "normal" | "welch_t",
///     "latent_diagnostic": false,
///     "formats": ["md", "txt"]
///   }
///
/// Relative paths resolve against the config file's directory. Omitted scenarios default to
/// every preset; omitted targets default to ["all"].
struct RunConfig {
    std::shared_ptr<const BaselineGenerator> baseline;
    /// Canonical description of the model source, used for hashing.
    nlohmann::ordered_json model_fingerprint;
    std::vector<EffectScenario> scenarios;
    std::vector<ActTarget> targets;
    std::size_t n_units = 1680;
    std::size_t n_reps = 1000;
    std::size_t n_bootstrap = 100;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    ReferenceDistribution reference = ReferenceDistribution::normal;
    bool latent_diagnostic = false;
    bool write_markdown = true;
    bool write_text = true;

    /// Per-cell simulation settings for the grid, validated.
    std::vector<SimulationConfig> cells(unsigned threads) const;

    /// Canonical JSON of everything that affects statistical output (thread count excluded).
    nlohmann::ordered_json canonical() const;
    std::string hash() const;
};

/// Throws ValidationError, ParseError or SchemaVersionError on any problem.
RunConfig parse_run_config(const nlohmann::json &document, const std::filesystem::path &base_dir);
RunConfig load_run_config(const std::filesystem::path &path);

} // namespace ipvsim::cli
