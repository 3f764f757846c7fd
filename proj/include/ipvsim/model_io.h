#pragma once

#include "ipvsim/multivariate.h"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace ipvsim {

/// Model file layout:
///
///   {
///     "schema": "ipvsim-model",
///     "version": 1,
///     "acts":    [{"index": 1, "id": "slapped", "label": "...", "category": "physical",
///                  "severity": "moderate"}, ...],
///     "margins": [{"family": "zip", "lambda": 2.36, "theta": 0.8},
///                 {"family": "zinb", "lambda": 2.0, "phi": 0.7, "theta": 0.9},
///                 {"family": "zinb", "lambda": 1.5, "phi": "inf", "theta": 0.8}, ...],
///     "sigma":   [[1, 0.6, ...], ...],
///     "fit_report": [...]            (optional, informational, ignored on read)
///   }
inline constexpr int kModelSchemaVersion = 1;

nlohmann::ordered_json model_to_json(const MultiActModel &model);

/// Throws SchemaVersionError for a foreign schema or version and ValidationError for
/// an invalid model.
MultiActModel model_from_json(const nlohmann::json &document);

std::string serialize_model(const MultiActModel &model,
                            const std::optional<nlohmann::ordered_json> &fit_report = {});

void write_model_file(const std::filesystem::path &path, const MultiActModel &model,
                      const std::optional<nlohmann::ordered_json> &fit_report = {});

MultiActModel read_model_file(const std::filesystem::path &path);

nlohmann::ordered_json act_to_json(const ActSpec &act);
ActSpec act_from_json(const nlohmann::json &node, int index);

} // namespace ipvsim
