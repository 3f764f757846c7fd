#include "run_config.h"

#include "ipvsim/errors.h"
#include "ipvsim/ingest.h"
#include "ipvsim/io.h"
#include "ipvsim/model_io.h"

#include <set>

namespace ipvsim::cli {

namespace {

const std::set<std::string> kKnownKeys{
    "model", "scenarios", "targets", "n_units", "n_reps", "n_bootstrap", "alpha",
    "seed",  "reference", "latent_diagnostic", "formats"};

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &path) {
    const std::filesystem::path p{path};
    return p.is_absolute() ? p : base / p;
}

template <typename T>
T positive_integer(const nlohmann::json &document, const char *key, T fallback) {
    if (!document.contains(key)) {
        return fallback;
    }
    const auto &node = document.at(key);
    if (!node.is_number_integer() || node.get<long long>() < 1) {
        throw ValidationError(std::string{"'"} + key + "' must be a positive integer");
    }
    return node.get<T>();
}

EffectScenario parse_scenario(const nlohmann::json &node) {
    if (node.is_string()) {
        return scenario_preset(node.get<std::string>());
    }
    if (!node.is_object()) {
        throw ValidationError("a scenario must be a preset name or an object");
    }
    EffectScenario scenario;
    if (node.contains("preset")) {
        scenario = scenario_preset(node.at("preset").get<std::string>());
    }
    scenario.name = node.value("name", scenario.name);
    if (node.contains("p_s")) {
        const auto p = node.at("p_s").get<std::vector<double>>();
        if (p.size() != 4) {
            throw ValidationError("scenario '" + scenario.name + "': p_s needs 4 entries");
        }
        std::copy(p.begin(), p.end(), scenario.p_s.begin());
    } else if (!node.contains("preset")) {
        throw ValidationError("scenario '" + scenario.name + "' needs 'p_s' or 'preset'");
    }
    scenario.x = node.value("x", scenario.x);
    const std::string floor = node.value("floor", std::string{"one"});
    if (floor == "one") {
        scenario.floor = ReductionFloor::one;
    } else if (floor == "zero") {
        scenario.floor = ReductionFloor::zero;
    } else {
        throw ValidationError("scenario '" + scenario.name + "': floor must be one or zero");
    }
    scenario.validate();
    return scenario;
}

ActTarget parse_target(const nlohmann::json &node) {
    if (node.is_string()) {
        return ActTarget::parse(node.get<std::string>());
    }
    if (!node.is_object() || !node.contains("acts")) {
        throw ValidationError("a target must be a preset name or an object with 'acts'");
    }
    return ActTarget::explicit_acts(node.at("acts").get<std::vector<int>>(),
                                    node.value("name", std::string{"custom"}));
}

void load_model(RunConfig &config, const nlohmann::json &node,
                const std::filesystem::path &base_dir) {
    if (!node.is_object() || node.size() != 1) {
        throw ValidationError("'model' must hold exactly one of 'file', 'inline' or 'survey'");
    }
    if (node.contains("file")) {
        const auto path = resolve(base_dir, node.at("file").get<std::string>());
        auto model = read_model_file(path);
        config.model_fingerprint = model_to_json(model);
        config.baseline = std::make_shared<JointSampler>(std::move(model));
    } else if (node.contains("inline")) {
        auto model = model_from_json(node.at("inline"));
        config.model_fingerprint = model_to_json(model);
        config.baseline = std::make_shared<JointSampler>(std::move(model));
    } else if (node.contains("survey")) {
        const auto &survey = node.at("survey");
        for (const char *key : {"data", "descriptor"}) {
            if (!survey.contains(key)) {
                throw ValidationError(std::string{"survey model source needs '"} + key + "'");
            }
        }
        const auto data = resolve(base_dir, survey.at("data").get<std::string>());
        const auto descriptor = read_descriptor(
            resolve(base_dir, survey.at("descriptor").get<std::string>()));
        const Family family = parse_family(survey.value("family", std::string{"zip"}));
        const std::string mode = survey.value("baseline", std::string{"parametric"});
        if (mode != "parametric" && mode != "resample") {
            throw ValidationError("survey baseline must be 'parametric' or 'resample'");
        }
        auto table = read_survey(data, descriptor);
        auto fitted = fit_model(table, family);
        config.model_fingerprint = {{"survey_sha", fnv1a_hex(read_text(data))},
                                    {"baseline", mode},
                                    {"model", model_to_json(fitted.model)}};
        if (mode == "parametric") {
            config.baseline = std::make_shared<JointSampler>(std::move(fitted.model));
        } else {
            config.baseline =
                std::make_shared<EmpiricalResampler>(std::move(table), fitted.model.margins);
        }
    } else {
        throw ValidationError("'model' must hold exactly one of 'file', 'inline' or 'survey'");
    }
}

} // namespace

std::vector<SimulationConfig> RunConfig::cells(unsigned threads) const {
    std::vector<SimulationConfig> result;
    for (const auto &scenario : scenarios) {
        for (const auto &target : targets) {
            SimulationConfig config;
            config.baseline = baseline;
            config.scenario = scenario;
            config.scenario.target = target;
            config.n_units = n_units;
            config.n_reps = n_reps;
            config.n_bootstrap = n_bootstrap;
            config.alpha = alpha;
            config.seed = seed;
            config.threads = threads;
            config.reference = reference;
            config.latent_diagnostic = latent_diagnostic;
            config.validate();
            result.push_back(std::move(config));
        }
    }
    return result;
}

nlohmann::ordered_json RunConfig::canonical() const {
    nlohmann::ordered_json document;
    document["model"] = model_fingerprint;
    auto &scenario_list = document["scenarios"] = nlohmann::ordered_json::array();
    for (const auto &s : scenarios) {
        scenario_list.push_back({{"name", s.name},
                                 {"p_s", s.p_s},
                                 {"x", s.x},
                                 {"floor", s.floor == ReductionFloor::one ? "one" : "zero"}});
    }
    auto &target_list = document["targets"] = nlohmann::ordered_json::array();
    for (const auto &t : targets) {
        target_list.push_back({{"name", t.name()}, {"acts", t.indices()}});
    }
    document["n_units"] = n_units;
    document["n_reps"] = n_reps;
    document["n_bootstrap"] = n_bootstrap;
    document["alpha"] = alpha;
    document["seed"] = seed;
    document["reference"] = reference == ReferenceDistribution::normal ? "normal" : "welch_t";
    document["latent_diagnostic"] = latent_diagnostic;
    return document;
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical().dump()); }

RunConfig parse_run_config(const nlohmann::json &document, const std::filesystem::path &base_dir) {
    if (!document.is_object()) {
        throw ValidationError("run config must be a JSON object");
    }
    for (const auto &item : document.items()) {
        if (!kKnownKeys.contains(item.key())) {
            throw ValidationError("unknown run config key '" + item.key() + "'");
        }
    }
    if (!document.contains("model")) {
        throw ValidationError("run config needs a 'model' source");
    }
    RunConfig config;
    try {
        load_model(config, document.at("model"), base_dir);

        if (document.contains("scenarios")) {
            for (const auto &node : document.at("scenarios")) {
                config.scenarios.push_back(parse_scenario(node));
            }
        } else {
            config.scenarios = scenario_presets();
        }
        if (document.contains("targets")) {
            for (const auto &node : document.at("targets")) {
                config.targets.push_back(parse_target(node));
            }
        } else {
            config.targets = {ActTarget::all()};
        }
        if (config.scenarios.empty() || config.targets.empty()) {
            throw ValidationError("run config needs at least one scenario and one target");
        }
        std::set<std::string> names;
        for (const auto &s : config.scenarios) {
            if (!names.insert(s.name).second) {
                throw ValidationError("duplicate scenario name '" + s.name + "'");
            }
        }
        names.clear();
        for (const auto &t : config.targets) {
            if (!names.insert(t.name()).second) {
                throw ValidationError("duplicate target name '" + t.name() + "'");
            }
        }

        config.n_units = positive_integer<std::size_t>(document, "n_units", config.n_units);
        config.n_reps = positive_integer<std::size_t>(document, "n_reps", config.n_reps);
        config.n_bootstrap =
            positive_integer<std::size_t>(document, "n_bootstrap", config.n_bootstrap);
        config.seed = document.contains("seed") ? document.at("seed").get<std::uint64_t>()
                                                : config.seed;
        config.alpha = document.value("alpha", config.alpha);
        const std::string reference = document.value("reference", std::string{"normal"});
        if (reference == "normal") {
            config.reference = ReferenceDistribution::normal;
        } else if (reference == "welch_t") {
            config.reference = ReferenceDistribution::welch_t;
        } else {
            throw ValidationError("reference must be 'normal' or 'welch_t'");
        }
        config.latent_diagnostic = document.value("latent_diagnostic", false);
        if (document.contains("formats")) {
            config.write_markdown = false;
            config.write_text = false;
            for (const auto &f : document.at("formats").get<std::vector<std::string>>()) {
                if (f == "md") {
                    config.write_markdown = true;
                } else if (f == "txt") {
                    config.write_text = true;
                } else if (f != "csv") {
                    throw ValidationError("unknown output format '" + f + "'");
                }
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string{"run config: "} + e.what());
    }
    // Builds and validates every cell once so that errors surface before computation.
    config.cells(1);
    return config;
}

RunConfig load_run_config(const std::filesystem::path &path) {
    nlohmann::json document;
    try {
        document = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError("run config '" + path.string() + "': " + e.what(), 1);
    }
    return parse_run_config(document, path.parent_path());
}

} // namespace ipvsim::cli
