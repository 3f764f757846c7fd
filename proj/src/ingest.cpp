#include "ipvsim/ingest.h"

#include "ipvsim/coding.h"
#include "ipvsim/errors.h"
#include "ipvsim/io.h"
#include "ipvsim/model_io.h"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace ipvsim {

namespace {

constexpr int kCategories = 4;

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t");
    return text.substr(first, last - first + 1);
}

/// Splits one CSV record. Double-quoted fields may contain commas; "" inside quotes is a
/// literal quote. Embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line, std::size_t line_number) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            if (!trim(field).empty()) {
                throw ParseError("stray quote inside an unquoted field", line_number);
            }
            field.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.emplace_back(was_quoted ? field : std::string{trim(field)});
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        throw ParseError("unterminated quoted field", line_number);
    }
    fields.emplace_back(was_quoted ? field : std::string{trim(field)});
    return fields;
}

std::string quote_if_needed(const std::string &text) {
    if (text.find_first_of(",\"") == std::string::npos) {
        return text;
    }
    std::string quoted = "\"";
    for (const char c : text) {
        if (c == '"') {
            quoted.push_back('"');
        }
        quoted.push_back(c);
    }
    quoted.push_back('"');
    return quoted;
}

double chi_square_p_value(double statistic, int df) {
    if (df <= 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return boost::math::cdf(
        boost::math::complement(boost::math::chi_squared_distribution<double>(df), statistic));
}

/// Weighted category masses of an ordinal column with values in 0..3.
std::array<double, kCategories> category_masses(std::span<const int> column,
                                                std::span<const double> weights) {
    std::array<double, kCategories> mass{};
    for (std::size_t i = 0; i < column.size(); ++i) {
        mass[static_cast<std::size_t>(column[i])] += weights[i];
    }
    return mass;
}

/// Mid-distribution normal scores and interior thresholds of one ordinal column, keeping
/// only levels that occur.
struct OrdinalMargin {
    std::array<int, kCategories> level_of{};
    std::vector<double> probability;
    std::vector<double> score;
    /// Size levels + 1, starting at -inf and ending at +inf.
    std::vector<double> threshold;
};

OrdinalMargin ordinal_margin(const std::array<double, kCategories> &mass) {
    double total = 0.0;
    for (const double m : mass) {
        total += m;
    }
    OrdinalMargin margin;
    margin.level_of.fill(-1);
    double cumulative = 0.0;
    margin.threshold.push_back(-std::numeric_limits<double>::infinity());
    for (int c = 0; c < kCategories; ++c) {
        const double p = mass[static_cast<std::size_t>(c)] / total;
        if (!(p > 0.0)) {
            continue;
        }
        margin.level_of[static_cast<std::size_t>(c)] = static_cast<int>(margin.probability.size());
        const double mid = std::clamp(cumulative + 0.5 * p, 1e-15, 1.0 - 1e-15);
        cumulative += p;
        margin.probability.push_back(p);
        margin.score.push_back(normal_quantile(mid));
        margin.threshold.push_back(cumulative < 1.0 - 1e-15
                                       ? normal_quantile(std::max(cumulative, 1e-15))
                                       : std::numeric_limits<double>::infinity());
    }
    margin.threshold.back() = std::numeric_limits<double>::infinity();
    return margin;
}

double mean_of(const OrdinalMargin &m) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.score.size(); ++i) {
        mean += m.probability[i] * m.score[i];
    }
    return mean;
}

double sd_of(const OrdinalMargin &m, double mean) {
    double variance = 0.0;
    for (std::size_t i = 0; i < m.score.size(); ++i) {
        variance += m.probability[i] * (m.score[i] - mean) * (m.score[i] - mean);
    }
    return std::sqrt(variance);
}

/// Correlation of the two score variables when the underlying normals have correlation rho.
double implied_score_correlation(const OrdinalMargin &a, const OrdinalMargin &b, double rho) {
    const std::size_t la = a.score.size();
    const std::size_t lb = b.score.size();
    std::vector<double> grid((la + 1) * (lb + 1));
    for (std::size_t i = 0; i <= la; ++i) {
        for (std::size_t j = 0; j <= lb; ++j) {
            grid[i * (lb + 1) + j] = bivariate_normal_cdf(a.threshold[i], b.threshold[j], rho);
        }
    }
    const auto at = [&](std::size_t i, std::size_t j) { return grid[i * (lb + 1) + j]; };
    double cross = 0.0;
    for (std::size_t i = 0; i < la; ++i) {
        for (std::size_t j = 0; j < lb; ++j) {
            const double p = at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j);
            cross += p * a.score[i] * b.score[j];
        }
    }
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    return (cross - ma * mb) / (sd_of(a, ma) * sd_of(b, mb));
}

} // namespace

std::string_view to_string(ResponseMode mode) noexcept {
    return mode == ResponseMode::category ? "category" : "count";
}

ResponseMode parse_response_mode(std::string_view text) {
    if (text == "category") {
        return ResponseMode::category;
    }
    if (text == "count") {
        return ResponseMode::count;
    }
    throw ValidationError("unknown response mode '" + std::string{text} +
                          "' (expected category or count)");
}

void SurveyDescriptor::validate() const {
    validate_acts(acts);
    if (weight_column) {
        if (weight_column->empty()) {
            throw ValidationError("weight column name is empty");
        }
        for (const auto &act : acts) {
            if (act.id == *weight_column) {
                throw ValidationError("weight column '" + *weight_column +
                                      "' is also an act column");
            }
        }
    }
}

nlohmann::ordered_json descriptor_to_json(const SurveyDescriptor &descriptor) {
    nlohmann::ordered_json document;
    document["format_version"] = kDescriptorFormatVersion;
    document["mode"] = std::string{to_string(descriptor.mode)};
    auto &acts = document["acts"] = nlohmann::ordered_json::array();
    for (const auto &act : descriptor.acts) {
        acts.push_back(act_to_json(act));
    }
    if (descriptor.weight_column) {
        document["weight_column"] = *descriptor.weight_column;
    }
    document["missing_tokens"] = descriptor.missing_tokens;
    return document;
}

SurveyDescriptor descriptor_from_json(const nlohmann::json &document) {
    if (!document.is_object()) {
        throw ValidationError("descriptor must be a JSON object");
    }
    const int version = document.value("format_version", kDescriptorFormatVersion);
    if (version != kDescriptorFormatVersion) {
        throw SchemaVersionError("descriptor format_version " + std::to_string(version) +
                                 " is not supported");
    }
    SurveyDescriptor descriptor;
    try {
        descriptor.mode = parse_response_mode(document.value("mode", std::string{"category"}));
        if (!document.contains("acts") || !document.at("acts").is_array()) {
            throw ValidationError("descriptor needs an 'acts' array");
        }
        int index = 1;
        for (const auto &node : document.at("acts")) {
            auto act = act_from_json(node, index);
            act.index = index++;
            descriptor.acts.push_back(std::move(act));
        }
        if (document.contains("weight_column") && !document.at("weight_column").is_null()) {
            descriptor.weight_column = document.at("weight_column").get<std::string>();
        }
        if (document.contains("missing_tokens")) {
            descriptor.missing_tokens =
                document.at("missing_tokens").get<std::vector<std::string>>();
        }
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string{"descriptor: "} + e.what());
    }
    descriptor.validate();
    return descriptor;
}

SurveyDescriptor read_descriptor(const std::filesystem::path &path) {
    const std::string text = read_text(path);
    try {
        return descriptor_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError("descriptor '" + path.string() + "': " + e.what(), 1);
    }
}

void write_descriptor(const std::filesystem::path &path, const SurveyDescriptor &descriptor) {
    descriptor.validate();
    write_text_atomic(path, descriptor_to_json(descriptor).dump(2) + "\n");
}

CountMatrix SurveyTable::categories() const {
    return mode == ResponseMode::category ? values : categorize(values);
}

void SurveyTable::validate() const {
    validate_acts(acts);
    if (values.cols() != static_cast<Eigen::Index>(acts.size())) {
        throw ValidationError("survey table has " + std::to_string(values.cols()) +
                              " columns for " + std::to_string(acts.size()) + " acts");
    }
    if (weights.size() != rows()) {
        throw ValidationError("survey table has " + std::to_string(weights.size()) +
                              " weights for " + std::to_string(rows()) + " rows");
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const int v = values(i, j);
            if (v < 0 || (mode == ResponseMode::category && v > 3)) {
                throw ValidationError("row " + std::to_string(i + 1) + ", column '" +
                                      acts[static_cast<std::size_t>(j)].id +
                                      "': value " + std::to_string(v) + " out of range");
            }
        }
        const double w = weights[static_cast<std::size_t>(i)];
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ValidationError("row " + std::to_string(i + 1) + ": weight must be positive");
        }
    }
}

bool SurveyTable::operator==(const SurveyTable &other) const {
    return acts == other.acts && mode == other.mode && values.rows() == other.values.rows() &&
           values.cols() == other.values.cols() && values == other.values &&
           weights == other.weights && weight_column == other.weight_column;
}

SurveyTable parse_survey(std::istream &in, const SurveyDescriptor &descriptor) {
    descriptor.validate();
    std::string line;
    std::size_t line_number = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_number == 1 && line.starts_with("\xEF\xBB\xBF")) {
            line.erase(0, 3);
        }
        if (!trim(line).empty()) {
            header = split_record(line, line_number);
            break;
        }
    }
    if (header.empty()) {
        throw ParseError("survey file has no header row", std::max<std::size_t>(line_number, 1));
    }

    std::map<std::string, std::size_t> column_of;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!column_of.emplace(header[c], c).second) {
            throw ParseError("duplicate column '" + header[c] + "' in header", line_number);
        }
    }
    const auto locate = [&](const std::string &name) {
        const auto it = column_of.find(name);
        if (it == column_of.end()) {
            throw ValidationError("survey header lacks column '" + name + "'");
        }
        return it->second;
    };
    std::vector<std::size_t> act_columns;
    for (const auto &act : descriptor.acts) {
        act_columns.push_back(locate(act.id));
    }
    std::optional<std::size_t> weight_position;
    if (descriptor.weight_column) {
        weight_position = locate(*descriptor.weight_column);
    }
    const auto is_missing = [&](const std::string &token) {
        return std::find(descriptor.missing_tokens.begin(), descriptor.missing_tokens.end(),
                         token) != descriptor.missing_tokens.end();
    };

    const std::size_t k = descriptor.acts.size();
    std::vector<int> cells;
    SurveyTable table;
    table.acts = descriptor.acts;
    table.mode = descriptor.mode;
    table.weight_column = descriptor.weight_column;
    std::vector<int> row(k);
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_record(line, line_number);
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_number);
        }
        bool missing = false;
        for (std::size_t j = 0; j < k; ++j) {
            const std::string &token = fields[act_columns[j]];
            if (is_missing(token)) {
                missing = true;
                continue;
            }
            int value = 0;
            const auto [end, ec] =
                std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc{} || end != token.data() + token.size()) {
                throw ParseError("column '" + descriptor.acts[j].id + "': '" + token +
                                     "' is not an integer",
                                 line_number);
            }
            if (value < 0) {
                throw ValidationError("line " + std::to_string(line_number) + ", column '" +
                                      descriptor.acts[j].id + "': negative value " + token);
            }
            if (descriptor.mode == ResponseMode::category && value > 3) {
                throw ValidationError("line " + std::to_string(line_number) + ", column '" +
                                      descriptor.acts[j].id + "': category " + token +
                                      " outside 0..3");
            }
            row[j] = value;
        }
        double weight = 1.0;
        if (weight_position) {
            const std::string &token = fields[*weight_position];
            if (is_missing(token)) {
                missing = true;
            } else {
                double parsed = 0.0;
                const auto [end, ec] =
                    std::from_chars(token.data(), token.data() + token.size(), parsed);
                if (ec != std::errc{} || end != token.data() + token.size()) {
                    throw ParseError("weight '" + token + "' is not a number", line_number);
                }
                if (!(parsed > 0.0) || !std::isfinite(parsed)) {
                    throw ValidationError("line " + std::to_string(line_number) +
                                          ": weight must be positive, got " + token);
                }
                weight = parsed;
            }
        }
        if (missing) {
            ++table.dropped_rows;
            continue;
        }
        cells.insert(cells.end(), row.begin(), row.end());
        table.weights.push_back(weight);
    }
    const auto n = static_cast<Eigen::Index>(table.weights.size());
    table.values = Eigen::Map<const CountMatrix>(cells.data(), n, static_cast<Eigen::Index>(k));
    return table;
}

SurveyTable read_survey(const std::filesystem::path &path, const SurveyDescriptor &descriptor) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open survey file '" + path.string() + "'");
    }
    return parse_survey(in, descriptor);
}

std::string format_survey(const SurveyTable &table) {
    table.validate();
    std::ostringstream out;
    for (std::size_t j = 0; j < table.acts.size(); ++j) {
        out << (j ? "," : "") << quote_if_needed(table.acts[j].id);
    }
    if (table.weight_column) {
        out << ',' << quote_if_needed(*table.weight_column);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            out << (j ? "," : "") << table.values(i, j);
        }
        if (table.weight_column) {
            out << ',' << format_double(table.weights[static_cast<std::size_t>(i)]);
        }
        out << '\n';
    }
    return out.str();
}

void write_survey(const std::filesystem::path &path, const SurveyTable &table) {
    write_text_atomic(path, format_survey(table));
}

double latent_correlation(std::span<const int> a, std::span<const int> b,
                          std::span<const double> weights) {
    if (a.size() != b.size() || a.size() != weights.size()) {
        throw ValidationError("latent_correlation: column lengths differ");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0 || a[i] > 3 || b[i] < 0 || b[i] > 3) {
            throw ValidationError("latent_correlation expects categories in 0..3");
        }
    }
    const auto ma = ordinal_margin(category_masses(a, weights));
    const auto mb = ordinal_margin(category_masses(b, weights));
    if (ma.score.size() < 2 || mb.score.size() < 2) {
        return 0.0;
    }

    double total = 0.0;
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        total += weights[i];
        sa += weights[i] * ma.score[static_cast<std::size_t>(ma.level_of[static_cast<std::size_t>(a[i])])];
        sb += weights[i] * mb.score[static_cast<std::size_t>(mb.level_of[static_cast<std::size_t>(b[i])])];
    }
    const double mean_a = sa / total;
    const double mean_b = sb / total;
    double cab = 0.0;
    double caa = 0.0;
    double cbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da =
            ma.score[static_cast<std::size_t>(ma.level_of[static_cast<std::size_t>(a[i])])] - mean_a;
        const double db =
            mb.score[static_cast<std::size_t>(mb.level_of[static_cast<std::size_t>(b[i])])] - mean_b;
        cab += weights[i] * da * db;
        caa += weights[i] * da * da;
        cbb += weights[i] * db * db;
    }
    const double observed = cab / std::sqrt(caa * cbb);

    // The implied correlation is increasing in rho, so bisection is safe.
    double lo = -0.999;
    double hi = 0.999;
    if (observed <= implied_score_correlation(ma, mb, lo)) {
        return lo;
    }
    if (observed >= implied_score_correlation(ma, mb, hi)) {
        return hi;
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (implied_score_correlation(ma, mb, mid) < observed) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Eigen::MatrixXd latent_correlation_matrix(const CountMatrix &categories,
                                          std::span<const double> weights) {
    const Eigen::Index k = categories.cols();
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(k, k);
    std::vector<std::vector<int>> columns(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        auto &column = columns[static_cast<std::size_t>(j)];
        column.resize(static_cast<std::size_t>(categories.rows()));
        for (Eigen::Index i = 0; i < categories.rows(); ++i) {
            column[static_cast<std::size_t>(i)] = categories(i, j);
        }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double rho = latent_correlation(columns[static_cast<std::size_t>(i)],
                                                  columns[static_cast<std::size_t>(j)], weights);
            sigma(i, j) = rho;
            sigma(j, i) = rho;
        }
    }
    return sigma;
}

FittedModel fit_model(const SurveyTable &table, Family family, const FitOptions &options) {
    table.validate();
    if (table.acts.size() < 2) {
        throw DomainError("fitting a joint model needs at least 2 acts, got " +
                          std::to_string(table.acts.size()));
    }
    if (table.rows() == 0) {
        throw DomainError("survey table has no complete rows");
    }
    const CountMatrix categories = table.categories();
    FittedModel fitted;
    fitted.model.acts = table.acts;
    for (std::size_t j = 0; j < table.acts.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        ActFitReport report;
        for (Eigen::Index i = 0; i < categories.rows(); ++i) {
            report.observed[static_cast<std::size_t>(categories(i, col))] +=
                table.weights[static_cast<std::size_t>(i)];
        }
        if (table.mode == ResponseMode::category) {
            report.fit = fit_mle_censored(report.observed, family, options);
        } else {
            CountHistogram histogram;
            for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
                histogram.add(table.values(i, col), table.weights[static_cast<std::size_t>(i)]);
            }
            report.fit = fit_mle_exact(histogram, family, options);
        }
        const double total =
            report.observed[0] + report.observed[1] + report.observed[2] + report.observed[3];
        const auto probabilities = category_probabilities(report.fit.params);
        for (int c = 0; c < kCategories; ++c) {
            const auto cell = static_cast<std::size_t>(c);
            report.expected[cell] = total * probabilities[cell];
            if (report.expected[cell] > 0.0) {
                const double gap = report.observed[cell] - report.expected[cell];
                report.chi_square += gap * gap / report.expected[cell];
            }
        }
        const int parameters = family == Family::zip ? 2 : 3;
        report.df = report.fit.status == FitStatus::degenerate ? 0 : (kCategories - 1) - parameters;
        report.p_value = chi_square_p_value(report.chi_square, report.df);
        fitted.model.margins.push_back(report.fit.params);
        fitted.reports.push_back(std::move(report));
    }
    fitted.raw_sigma = latent_correlation_matrix(categories, table.weights);
    fitted.model.sigma = nearest_psd(fitted.raw_sigma);
    fitted.model.validate();
    return fitted;
}

nlohmann::ordered_json fit_report_to_json(const FittedModel &fitted) {
    auto reports = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < fitted.reports.size(); ++j) {
        const auto &r = fitted.reports[j];
        nlohmann::ordered_json entry;
        entry["act"] = fitted.model.acts[j].id;
        entry["status"] = std::string{to_string(r.fit.status)};
        entry["log_likelihood"] = r.fit.log_likelihood;
        entry["iterations"] = r.fit.iterations;
        entry["weakly_identified"] = r.fit.weakly_identified;
        entry["std_errors"] = r.fit.std_errors;
        entry["observed"] = r.observed;
        entry["expected"] = r.expected;
        entry["chi_square"] = r.chi_square;
        entry["df"] = r.df;
        if (std::isnan(r.p_value)) {
            entry["p_value"] = nullptr;
        } else {
            entry["p_value"] = r.p_value;
        }
        reports.push_back(std::move(entry));
    }
    return reports;
}

EmpiricalResampler::EmpiricalResampler(SurveyTable table,
                                       const std::vector<MarginalParams> &margins)
    : table_{std::move(table)} {
    table_.validate();
    if (table_.rows() == 0) {
        throw DomainError("cannot resample an empty survey table");
    }
    if (margins.size() != table_.acts.size()) {
        throw ValidationError("resampler needs one marginal per act");
    }
    double running = 0.0;
    for (const double w : table_.weights) {
        running += w;
        cumulative_weights_.push_back(running);
    }
    for (const auto &margin : margins) {
        margin.validate();
        std::array<Interval, 2> tables;
        // A few times: 2..4.
        tables[0].first = 2;
        double mass = 0.0;
        for (int y = 2; y <= 4; ++y) {
            mass += count_pmf(margin, y);
            tables[0].cdf.push_back(mass);
        }
        // Many times: 5 and up, until the remaining tail is negligible.
        tables[1].first = 5;
        double below = 0.0;
        for (int y = 0; y < 5; ++y) {
            below += count_pmf(margin, y);
        }
        const double tail = std::max(0.0, 1.0 - below);
        double accumulated = 0.0;
        for (int y = 5; accumulated < tail * (1.0 - 1e-12) && y < 5 + 1000000; ++y) {
            const double p = count_pmf(margin, y);
            accumulated += p;
            tables[1].cdf.push_back(accumulated);
            if (p == 0.0 && y > 5 + 10 * static_cast<int>(margin.lambda)) {
                break;
            }
        }
        for (auto &interval : tables) {
            const double norm = interval.cdf.empty() ? 0.0 : interval.cdf.back();
            if (!(norm > 0.0)) {
                // Interval carries no model mass; fall back to its lower end.
                interval.cdf = {1.0};
                continue;
            }
            for (double &c : interval.cdf) {
                c /= norm;
            }
            interval.cdf.back() = 1.0;
        }
        intervals_.push_back(std::move(tables));
    }
}

int EmpiricalResampler::impute(std::size_t act, int category, RandomStream &rng) const {
    if (category <= 1) {
        return category;
    }
    const auto &interval = intervals_.at(act)[static_cast<std::size_t>(category - 2)];
    const double u = rng.uniform();
    const auto it = std::upper_bound(interval.cdf.begin(), interval.cdf.end(), u);
    const auto offset = std::min<std::ptrdiff_t>(it - interval.cdf.begin(),
                                                 static_cast<std::ptrdiff_t>(interval.cdf.size()) - 1);
    return interval.first + static_cast<int>(offset);
}

CountMatrix EmpiricalResampler::draw(std::size_t n, RandomStream &rng) const {
    const auto k = static_cast<Eigen::Index>(table_.acts.size());
    CountMatrix counts(static_cast<Eigen::Index>(n), k);
    const double total = cumulative_weights_.back();
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        const double target = rng.uniform() * total;
        const auto it =
            std::upper_bound(cumulative_weights_.begin(), cumulative_weights_.end(), target);
        const auto source = static_cast<Eigen::Index>(
            std::min<std::ptrdiff_t>(it - cumulative_weights_.begin(),
                                     static_cast<std::ptrdiff_t>(cumulative_weights_.size()) - 1));
        for (Eigen::Index j = 0; j < k; ++j) {
            const int value = table_.values(source, j);
            counts(i, j) = table_.mode == ResponseMode::count
                               ? value
                               : impute(static_cast<std::size_t>(j), value, rng);
        }
    }
    return counts;
}

} // namespace ipvsim
