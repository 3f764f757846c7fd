#include "results.h"

#include "ipvsim/errors.h"
#include "ipvsim/io.h"

#include <algorithm>
#include <map>
#include <sstream>

namespace ipvsim::cli {

namespace {

const std::vector<std::string> kColumns{
    "schema_version", "scenario",      "target",        "coding",
    "p_none",         "p_cessation",   "p_reduction",   "p_increase",
    "x",              "n_units",       "n_reps",        "n_bootstrap",
    "alpha",          "seed",          "mean_tau_true", "tau_true_zero",
    "bias",           "bias_mc_se",    "rmse",          "rmse_mc_se",
    "power",          "power_mc_se",   "coverage",      "coverage_mc_se",
    "power_diff",     "power_diff_mc_se"};

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

ResultRow make_row(const CellResult &cell, Coding coding) {
    const auto &performance = cell.stats.get(coding);
    ResultRow row;
    row.scenario = cell.config.scenario.name;
    row.target = cell.config.scenario.target.name();
    row.coding = std::string{to_string(coding)};
    row.p_s = cell.config.scenario.p_s;
    row.x = cell.config.scenario.x;
    row.n_units = cell.config.n_units;
    row.n_reps = cell.config.n_reps;
    row.n_bootstrap = cell.config.n_bootstrap;
    row.alpha = cell.config.alpha;
    row.seed = cell.config.seed;
    row.mean_tau_true = performance.mean_true_tau;
    row.tau_true_zero = performance.null_truth;
    row.value = performance.value;
    row.mc_se = performance.mc_se;
    row.power_diff = cell.stats.power_diff;
    row.power_diff_mc_se = cell.stats.power_diff_mc_se;
    return row;
}

/// Code points, so that multi-byte symbols do not skew alignment.
std::size_t display_width(const std::string &text) {
    return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

/// Text grid with right-aligned numeric columns.
class TextGrid {
  public:
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
    void left_align(std::size_t column) { left_.push_back(column); }

    std::string render_text() const {
        const auto widths = column_widths();
        std::ostringstream out;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            std::string line;
            for (std::size_t c = 0; c < rows_[r].size(); ++c) {
                const auto &cell = rows_[r][c];
                const std::string padding(widths[c] - display_width(cell), ' ');
                if (c > 0) {
                    line += "  ";
                }
                line += is_left(c) ? cell + padding : padding + cell;
            }
            line.erase(line.find_last_not_of(' ') + 1);
            out << line << '\n';
            if (r == 0) {
                std::size_t total = 0;
                for (const auto w : widths) {
                    total += w;
                }
                out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
            }
        }
        return out.str();
    }

    std::string render_markdown() const {
        std::ostringstream out;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            out << '|';
            for (const auto &cell : rows_[r]) {
                out << ' ' << cell << " |";
            }
            out << '\n';
            if (r == 0) {
                out << '|';
                for (std::size_t c = 0; c < rows_[r].size(); ++c) {
                    out << (is_left(c) ? " --- |" : " ---: |");
                }
                out << '\n';
            }
        }
        return out.str();
    }

  private:
    bool is_left(std::size_t column) const {
        return column < 2 || std::find(left_.begin(), left_.end(), column) != left_.end();
    }

    std::vector<std::size_t> column_widths() const {
        std::vector<std::size_t> widths;
        for (const auto &row : rows_) {
            widths.resize(std::max(widths.size(), row.size()), 0);
            for (std::size_t c = 0; c < row.size(); ++c) {
                widths[c] = std::max(widths[c], display_width(row[c]));
            }
        }
        return widths;
    }

    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> left_;
};

/// Ordered (target, scenario) cells with their rows by coding.
struct Cell {
    std::string scenario;
    std::string target;
    std::map<std::string, const ResultRow *> by_coding;
};

std::vector<Cell> group_cells(const std::vector<ResultRow> &rows) {
    std::vector<Cell> cells;
    for (const auto &row : rows) {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell &c) {
            return c.scenario == row.scenario && c.target == row.target;
        });
        if (it == cells.end()) {
            cells.push_back({row.scenario, row.target, {}});
            it = std::prev(cells.end());
        }
        it->by_coding[row.coding] = &row;
    }
    std::stable_sort(cells.begin(), cells.end(), [&](const Cell &a, const Cell &b) {
        const auto first = [&](const std::string &target) {
            return std::find_if(rows.begin(), rows.end(),
                                [&](const ResultRow &r) { return r.target == target; }) -
                   rows.begin();
        };
        return first(a.target) < first(b.target);
    });
    return cells;
}

TextGrid performance_grid(const std::vector<ResultRow> &rows) {
    TextGrid grid;
    std::vector<std::string> header{"Target", "Scenario"};
    std::vector<std::string> codings;
    for (const auto &row : rows) {
        if (std::find(codings.begin(), codings.end(), row.coding) == codings.end()) {
            codings.push_back(row.coding);
        }
    }
    for (const auto &coding : codings) {
        for (const char *stat : {"Bias", "RMSE", "Power", "Coverage"}) {
            header.push_back(coding + " " + stat);
        }
    }
    grid.add(header);
    for (const auto &cell : group_cells(rows)) {
        std::vector<std::string> line{cell.target, cell.scenario};
        for (const auto &coding : codings) {
            const auto it = cell.by_coding.find(coding);
            if (it == cell.by_coding.end()) {
                line.insert(line.end(), 4, "");
                continue;
            }
            const auto &v = it->second->value;
            line.push_back(format_fixed(v.bias, 4));
            line.push_back(format_fixed(v.rmse, 4));
            line.push_back(format_fixed(v.power, 3) +
                           (it->second->tau_true_zero ? "*" : ""));
            line.push_back(format_fixed(v.coverage, 3));
        }
        grid.add(line);
    }
    return grid;
}

const char *kNullFootnote = "* true effect is exactly zero for this coding, so power is a type-I error rate.\n";

} // namespace

std::vector<ResultRow> result_rows(const std::vector<CellResult> &cells) {
    std::vector<ResultRow> rows;
    for (const auto &cell : cells) {
        rows.push_back(make_row(cell, Coding::binary));
        rows.push_back(make_row(cell, Coding::sum));
        if (cell.stats.latent) {
            rows.push_back(make_row(cell, Coding::latent_total));
        }
    }
    return rows;
}

std::string format_results_csv(const std::vector<ResultRow> &rows) {
    std::ostringstream out;
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        out << (c ? "," : "") << kColumns[c];
    }
    out << '\n';
    for (const auto &r : rows) {
        out << kResultsSchemaVersion << ',' << r.scenario << ',' << r.target << ',' << r.coding;
        for (const double p : r.p_s) {
            out << ',' << format_double(p);
        }
        out << ',' << r.x << ',' << r.n_units << ',' << r.n_reps << ',' << r.n_bootstrap << ','
            << format_double(r.alpha) << ',' << r.seed << ',' << format_double(r.mean_tau_true)
            << ',' << (r.tau_true_zero ? 1 : 0);
        for (const auto &[value, se] :
             {std::pair{r.value.bias, r.mc_se.bias}, std::pair{r.value.rmse, r.mc_se.rmse},
              std::pair{r.value.power, r.mc_se.power},
              std::pair{r.value.coverage, r.mc_se.coverage}}) {
            out << ',' << format_double(value) << ',' << format_double(se);
        }
        out << ',' << format_double(r.power_diff) << ',' << format_double(r.power_diff_mc_se)
            << '\n';
    }
    return out.str();
}

std::vector<ResultRow> parse_results_csv(const std::string &text, const std::string &source) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaVersionError(source + ": empty results file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split(line);
    if (header.empty() || header.front() != "schema_version") {
        throw SchemaVersionError(source + ": not a results file (no schema_version column)");
    }
    std::vector<ResultRow> rows;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto f = split(line);
        if (f.front() != std::to_string(kResultsSchemaVersion)) {
            throw SchemaVersionError(source + ": results schema version " + f.front() +
                                     " is not supported (expected " +
                                     std::to_string(kResultsSchemaVersion) + ")");
        }
        if (header != kColumns) {
            throw SchemaVersionError(source + ": results columns do not match schema version " +
                                     std::to_string(kResultsSchemaVersion));
        }
        if (f.size() != kColumns.size()) {
            throw ParseError(source + ": expected " + std::to_string(kColumns.size()) +
                                 " fields",
                             line_number);
        }
        try {
            ResultRow r;
            r.scenario = f[1];
            r.target = f[2];
            r.coding = f[3];
            for (std::size_t k = 0; k < 4; ++k) {
                r.p_s[k] = parse_double(f[4 + k]);
            }
            r.x = std::stoi(f[8]);
            r.n_units = std::stoull(f[9]);
            r.n_reps = std::stoull(f[10]);
            r.n_bootstrap = std::stoull(f[11]);
            r.alpha = parse_double(f[12]);
            r.seed = std::stoull(f[13]);
            r.mean_tau_true = parse_double(f[14]);
            r.tau_true_zero = f[15] == "1";
            r.value.bias = parse_double(f[16]);
            r.mc_se.bias = parse_double(f[17]);
            r.value.rmse = parse_double(f[18]);
            r.mc_se.rmse = parse_double(f[19]);
            r.value.power = parse_double(f[20]);
            r.mc_se.power = parse_double(f[21]);
            r.value.coverage = parse_double(f[22]);
            r.mc_se.coverage = parse_double(f[23]);
            r.power_diff = parse_double(f[24]);
            r.power_diff_mc_se = parse_double(f[25]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error &e) {
            throw ParseError(source + ": " + e.what(), line_number);
        } catch (const ValidationError &e) {
            throw ParseError(source + ": " + e.what(), line_number);
        }
    }
    return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path &path) {
    return parse_results_csv(read_text(path), path.string());
}

std::string format_table_markdown(const std::vector<ResultRow> &rows) {
    return performance_grid(rows).render_markdown() + "\n" + kNullFootnote;
}

std::string format_table_text(const std::vector<ResultRow> &rows) {
    return performance_grid(rows).render_text() + "\n" + kNullFootnote;
}

std::string format_power_long(const std::vector<ResultRow> &rows) {
    std::ostringstream out;
    out << "schema_version,scenario,target,p_none,p_cessation,p_reduction,p_increase,x,series,"
           "value,mc_se\n";
    for (const auto &cell : group_cells(rows)) {
        const auto binary = cell.by_coding.find("binary");
        const auto sum = cell.by_coding.find("sum");
        if (binary == cell.by_coding.end() || sum == cell.by_coding.end()) {
            continue;
        }
        const ResultRow &b = *binary->second;
        const auto prefix = [&] {
            std::ostringstream p;
            p << kResultsSchemaVersion << ',' << cell.scenario << ',' << cell.target;
            for (const double v : b.p_s) {
                p << ',' << format_double(v);
            }
            p << ',' << b.x;
            return p.str();
        }();
        out << prefix << ",binary," << format_double(b.value.power) << ','
            << format_double(b.mc_se.power) << '\n';
        out << prefix << ",sum," << format_double(sum->second->value.power) << ','
            << format_double(sum->second->mc_se.power) << '\n';
        out << prefix << ",difference," << format_double(b.power_diff) << ','
            << format_double(b.power_diff_mc_se) << '\n';
    }
    return out.str();
}

std::string format_report(const std::vector<ResultSet> &sets, const std::string &format) {
    if (format != "csv" && format != "md" && format != "txt") {
        throw ValidationError("unknown report format '" + format + "'");
    }
    // Union of cells across sets, in first-seen order.
    std::vector<std::pair<std::string, std::string>> keys;
    std::vector<std::vector<Cell>> grouped;
    for (const auto &set : sets) {
        grouped.push_back(group_cells(set.rows));
        for (const auto &cell : grouped.back()) {
            const std::pair key{cell.target, cell.scenario};
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                keys.push_back(key);
            }
        }
    }
    const bool single = sets.size() == 1;
    const auto flags_of = [](const Cell &cell) {
        std::vector<std::string> flags;
        for (const char *coding : {"binary", "sum"}) {
            const auto it = cell.by_coding.find(coding);
            if (it != cell.by_coding.end() && it->second->tau_true_zero) {
                flags.push_back(std::string{coding} + " τ=0 (type-I rate)");
            }
        }
        return flags;
    };

    if (format == "csv") {
        std::ostringstream out;
        out << "source,target,scenario,power_binary,power_sum,power_diff,power_diff_mc_se,"
               "flag\n";
        for (std::size_t s = 0; s < sets.size(); ++s) {
            for (const auto &cell : grouped[s]) {
                const auto b = cell.by_coding.find("binary");
                const auto u = cell.by_coding.find("sum");
                if (b == cell.by_coding.end() || u == cell.by_coding.end()) {
                    continue;
                }
                std::string flag;
                for (const auto &f : flags_of(cell)) {
                    flag += (flag.empty() ? "" : "; ") + f;
                }
                out << sets[s].label << ',' << cell.target << ',' << cell.scenario << ','
                    << format_double(b->second->value.power) << ','
                    << format_double(u->second->value.power) << ','
                    << format_double(b->second->power_diff) << ','
                    << format_double(b->second->power_diff_mc_se) << ',' << flag << '\n';
            }
        }
        return out.str();
    }

    TextGrid grid;
    std::vector<std::string> header{"Target", "Scenario"};
    for (const auto &set : sets) {
        const std::string prefix = single ? "" : set.label + ": ";
        header.push_back(prefix + "Power binary");
        header.push_back(prefix + "Power sum");
        header.push_back(prefix + "Difference");
        header.push_back(prefix + "MC SE");
    }
    header.push_back("Note");
    grid.left_align(header.size() - 1);
    grid.add(header);
    for (const auto &[target, scenario] : keys) {
        std::vector<std::string> line{target, scenario};
        std::string note;
        for (std::size_t s = 0; s < sets.size(); ++s) {
            const auto it = std::find_if(grouped[s].begin(), grouped[s].end(), [&](const Cell &c) {
                return c.target == target && c.scenario == scenario;
            });
            const Cell *cell = it == grouped[s].end() ? nullptr : &*it;
            const ResultRow *b = nullptr;
            const ResultRow *u = nullptr;
            if (cell) {
                if (const auto f = cell->by_coding.find("binary"); f != cell->by_coding.end()) {
                    b = f->second;
                }
                if (const auto f = cell->by_coding.find("sum"); f != cell->by_coding.end()) {
                    u = f->second;
                }
            }
            if (!b || !u) {
                line.insert(line.end(), 4, "");
                continue;
            }
            line.push_back(format_fixed(b->value.power, 3));
            line.push_back(format_fixed(u->value.power, 3));
            line.push_back(format_fixed(b->power_diff, 3));
            line.push_back(format_fixed(b->power_diff_mc_se, 3));
            for (const auto &f : flags_of(*cell)) {
                const std::string entry = single ? f : sets[s].label + ": " + f;
                note += (note.empty() ? "" : "; ") + entry;
            }
        }
        line.push_back(note);
        grid.add(line);
    }
    return format == "md" ? grid.render_markdown() : grid.render_text();
}

} // namespace ipvsim::cli
