#pragma once

#include "ipvsim/mc_harness.h"

#include <filesystem>
#include <string>
#include <vector>

namespace ipvsim::cli {

/// Version of the results.csv column layout. Bump on any incompatible change.
inline constexpr int kResultsSchemaVersion = 1;

/// One scenario x target x coding row of results.csv.
struct ResultRow {
    std::string scenario;
    std::string target;
    std::string coding;
    std::array<double, 4> p_s{};
    int x = 0;
    std::size_t n_units = 0;
    std::size_t n_reps = 0;
    std::size_t n_bootstrap = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    double mean_tau_true = 0.0;
    bool tau_true_zero = false;
    StatisticSet value;
    StatisticSet mc_se;
    /// Cell-level power(binary) - power(sum), repeated on each coding row.
    double power_diff = 0.0;
    double power_diff_mc_se = 0.0;
};

struct CellResult {
    SimulationConfig config;
    PerformanceStats stats;
};

std::vector<ResultRow> result_rows(const std::vector<CellResult> &cells);

std::string format_results_csv(const std::vector<ResultRow> &rows);

/// Throws SchemaVersionError when the file lacks the schema column or uses another version.
std::vector<ResultRow> parse_results_csv(const std::string &text, const std::string &source);
std::vector<ResultRow> read_results_csv(const std::filesystem::path &path);

/// Bias / RMSE / Power / Coverage per coding, grouped by target.
std::string format_table_markdown(const std::vector<ResultRow> &rows);
std::string format_table_text(const std::vector<ResultRow> &rows);

/// Long format for power plots: one row per cell and series (binary, sum, difference).
std::string format_power_long(const std::vector<ResultRow> &rows);

struct ResultSet {
    std::string label;
    std::vector<ResultRow> rows;
};

/// Power(binary) - power(sum) per cell with bootstrap SEs, one difference column per result
/// set. Cells whose true effect is identically zero for a coding carry a note.
std::string format_report(const std::vector<ResultSet> &sets, const std::string &format);

} // namespace ipvsim::cli
