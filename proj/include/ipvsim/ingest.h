#pragma once

#include "ipvsim/count_models.h"
#include "ipvsim/multivariate.h"
#include "ipvsim/types.h"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ipvsim {

/// Whether act columns hold survey categories (0..3) or raw episode counts.
enum class ResponseMode { category, count };

std::string_view to_string(ResponseMode mode) noexcept;
ResponseMode parse_response_mode(std::string_view text);

/// Sidecar describing a survey extract. Stored as JSON:
///
///   {
///     "format_version": 1,
///     "mode": "category",
///     "acts": [{"id": "slapped", "label": "...", "category": "physical",
///               "severity": "moderate"}, ...],
///     "weight_column": "wt",                 (optional)
///     "missing_tokens": ["", "NA", "NaN", "."] (optional)
///   }
struct SurveyDescriptor {
    ResponseMode mode = ResponseMode::category;
    std::vector<ActSpec> acts;
    std::optional<std::string> weight_column;
    std::vector<std::string> missing_tokens{"", "NA", "NaN", "."};

    void validate() const;
};

inline constexpr int kDescriptorFormatVersion = 1;

nlohmann::ordered_json descriptor_to_json(const SurveyDescriptor &descriptor);
SurveyDescriptor descriptor_from_json(const nlohmann::json &document);
SurveyDescriptor read_descriptor(const std::filesystem::path &path);
void write_descriptor(const std::filesystem::path &path, const SurveyDescriptor &descriptor);

struct SurveyTable {
    std::vector<ActSpec> acts;
    ResponseMode mode = ResponseMode::category;
    /// Rows are respondents, columns follow `acts`.
    CountMatrix values;
    /// One weight per row; all ones when the file has no weight column.
    std::vector<double> weights;
    std::optional<std::string> weight_column;
    /// Rows removed by listwise deletion because of a missing act value or weight.
    std::size_t dropped_rows = 0;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    /// Survey categories regardless of mode.
    CountMatrix categories() const;
    void validate() const;

    bool operator==(const SurveyTable &other) const;
};

/// Comma-separated text with a header row. Columns named after act ids are read; other
/// columns are ignored except the optional weight column. Throws ParseError (with the
/// 1-based file line) for malformed rows and ValidationError naming the line and column
/// for out-of-range values.
SurveyTable parse_survey(std::istream &in, const SurveyDescriptor &descriptor);
SurveyTable read_survey(const std::filesystem::path &path, const SurveyDescriptor &descriptor);

std::string format_survey(const SurveyTable &table);
void write_survey(const std::filesystem::path &path, const SurveyTable &table);

/// Fit diagnostics for one act.
struct ActFitReport {
    FitResult fit;
    CategoryHistogram observed{};
    CategoryHistogram expected{};
    double chi_square = 0.0;
    int df = 0;
    /// NaN when df is 0.
    double p_value = 0.0;
};

struct FittedModel {
    MultiActModel model;
    std::vector<ActFitReport> reports;
    /// Pairwise latent correlations before the positive semi-definite projection.
    Eigen::MatrixXd raw_sigma;
};

/// Per-act maximum likelihood marginals (censored for category data, exact for counts)
/// plus a latent correlation matrix. Throws DomainError for fewer than 2 acts.
FittedModel fit_model(const SurveyTable &table, Family family, const FitOptions &options = {});

nlohmann::ordered_json fit_report_to_json(const FittedModel &fitted);

/// Latent-normal correlation of two ordinal columns. Each column is scored by the normal
/// quantile of its mid-distribution rank; rho is then chosen so the correlation of those
/// scores under a discretized bivariate normal matches the observed weighted one. This
/// undoes most of the attenuation that raw score correlations suffer.
double latent_correlation(std::span<const int> a, std::span<const int> b,
                          std::span<const double> weights);

/// Estimated latent correlation matrix (unprojected).
Eigen::MatrixXd latent_correlation_matrix(const CountMatrix &categories,
                                          std::span<const double> weights);

/// Baseline generator that resamples whole respondent rows (with probability proportional
/// to weight) and, for category data, imputes a latent count inside each category's
/// interval from the fitted count component.
class EmpiricalResampler final : public BaselineGenerator {
  public:
    EmpiricalResampler(SurveyTable table, const std::vector<MarginalParams> &margins);

    const std::vector<ActSpec> &acts() const noexcept override { return table_.acts; }
    const SurveyTable &table() const noexcept { return table_; }

    CountMatrix draw(std::size_t n, RandomStream &rng) const override;

    /// Latent count for `category` of act `act`; category 0 maps to 0 and 1 to 1.
    int impute(std::size_t act, int category, RandomStream &rng) const;

  private:
    struct Interval {
        int first = 0;
        /// Normalized cumulative masses over first, first + 1, ...
        std::vector<double> cdf;
    };

    SurveyTable table_;
    std::vector<double> cumulative_weights_;
    /// Per act: conditional tables for categories 2 and 3.
    std::vector<std::array<Interval, 2>> intervals_;
};

} // namespace ipvsim
