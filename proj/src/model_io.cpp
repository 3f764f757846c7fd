#include "ipvsim/model_io.h"

#include "ipvsim/errors.h"
#include "ipvsim/io.h"

#include <cmath>
#include <limits>

namespace ipvsim {

namespace {

constexpr const char *kModelSchema = "ipvsim-model";

const nlohmann::json &require(const nlohmann::json &node, const char *key) {
    if (!node.is_object() || !node.contains(key)) {
        throw ValidationError(std::string{"model file: missing field '"} + key + "'");
    }
    return node.at(key);
}

double read_phi(const nlohmann::json &node) {
    if (node.is_string() && node.get<std::string>() == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    return node.get<double>();
}

} // namespace

nlohmann::ordered_json act_to_json(const ActSpec &act) {
    return {{"index", act.index},
            {"id", act.id},
            {"label", act.label},
            {"category", std::string{to_string(act.category)}},
            {"severity", std::string{to_string(act.severity)}}};
}

ActSpec act_from_json(const nlohmann::json &node, int index) {
    try {
        ActSpec act;
        act.index = node.contains("index") ? node.at("index").get<int>() : index;
        act.id = require(node, "id").get<std::string>();
        act.label = node.value("label", act.id);
        act.category = parse_act_category(require(node, "category").get<std::string>());
        act.severity = parse_severity(node.value("severity", std::string{"severe"}));
        return act;
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError("act " + std::to_string(index) + ": " + e.what());
    }
}

nlohmann::ordered_json model_to_json(const MultiActModel &model) {
    nlohmann::ordered_json document;
    document["schema"] = kModelSchema;
    document["version"] = kModelSchemaVersion;
    auto &acts = document["acts"] = nlohmann::ordered_json::array();
    for (const auto &act : model.acts) {
        acts.push_back(act_to_json(act));
    }
    auto &margins = document["margins"] = nlohmann::ordered_json::array();
    for (const auto &margin : model.margins) {
        nlohmann::ordered_json entry;
        entry["family"] = std::string{to_string(margin.family)};
        entry["lambda"] = margin.lambda;
        if (margin.family == Family::zinb) {
            // JSON has no infinity; the Poisson limit is spelled out.
            if (std::isinf(margin.phi)) {
                entry["phi"] = "inf";
            } else {
                entry["phi"] = margin.phi;
            }
        }
        entry["theta"] = margin.theta;
        margins.push_back(std::move(entry));
    }
    auto &sigma = document["sigma"] = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < model.sigma.rows(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < model.sigma.cols(); ++j) {
            row.push_back(model.sigma(i, j));
        }
        sigma.push_back(std::move(row));
    }
    return document;
}

MultiActModel model_from_json(const nlohmann::json &document) {
    if (!document.is_object() || document.value("schema", std::string{}) != kModelSchema) {
        throw SchemaVersionError("not an ipvsim model file (schema field missing or foreign)");
    }
    const int version = document.value("version", -1);
    if (version != kModelSchemaVersion) {
        throw SchemaVersionError("model file version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(kModelSchemaVersion) + ")");
    }
    MultiActModel model;
    try {
        const auto &acts = require(document, "acts");
        int index = 1;
        for (const auto &node : acts) {
            model.acts.push_back(act_from_json(node, index++));
        }
        for (const auto &node : require(document, "margins")) {
            const Family family = parse_family(require(node, "family").get<std::string>());
            const double lambda = require(node, "lambda").get<double>();
            const double theta = require(node, "theta").get<double>();
            model.margins.push_back(family == Family::zinb
                                        ? MarginalParams::zinb(lambda, read_phi(require(node, "phi")), theta)
                                        : MarginalParams::zip(lambda, theta));
        }
        const auto &sigma = require(document, "sigma");
        const auto k = static_cast<Eigen::Index>(sigma.size());
        model.sigma.resize(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto &row = sigma.at(static_cast<std::size_t>(i));
            if (static_cast<Eigen::Index>(row.size()) != k) {
                throw ValidationError("sigma row " + std::to_string(i + 1) + " has " +
                                      std::to_string(row.size()) + " entries");
            }
            for (Eigen::Index j = 0; j < k; ++j) {
                model.sigma(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string{"model file: "} + e.what());
    } catch (const DomainError &e) {
        throw ValidationError(std::string{"model file: "} + e.what());
    }
    model.validate();
    return model;
}

std::string serialize_model(const MultiActModel &model,
                            const std::optional<nlohmann::ordered_json> &fit_report) {
    auto document = model_to_json(model);
    if (fit_report) {
        document["fit_report"] = *fit_report;
    }
    return document.dump(2) + "\n";
}

void write_model_file(const std::filesystem::path &path, const MultiActModel &model,
                      const std::optional<nlohmann::ordered_json> &fit_report) {
    model.validate();
    write_text_atomic(path, serialize_model(model, fit_report));
}

MultiActModel read_model_file(const std::filesystem::path &path) {
    const std::string text = read_text(path);
    nlohmann::json document;
    try {
        document = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(std::string{"model file '"} + path.string() + "': " + e.what(), 1);
    }
    return model_from_json(document);
}

} // namespace ipvsim
