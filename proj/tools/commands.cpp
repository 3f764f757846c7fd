#include "commands.h"

#include "results.h"
#include "run_config.h"

#include "ipvsim/coding.h"
#include "ipvsim/errors.h"
#include "ipvsim/ingest.h"
#include "ipvsim/io.h"
#include "ipvsim/model_io.h"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#ifndef IPVSIM_VERSION
#define IPVSIM_VERSION "0.0.0"
#endif

namespace ipvsim::cli {

namespace {

/// Bad flags, missing inputs or an invalid run config.
class UsageError : public Error {
  public:
    using Error::Error;
};

void require_file(const std::string &path, const char *what) {
    if (!std::filesystem::is_regular_file(path)) {
        throw UsageError(std::string{what} + " '" + path + "' does not exist");
    }
}

unsigned default_threads() {
    if (const char *env = std::getenv("IPVSIM_THREADS"); env && *env) {
        char *end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (*end != '\0' || value < 1) {
            throw UsageError(std::string{"IPVSIM_THREADS must be a positive integer, got '"} +
                             env + "'");
        }
        return static_cast<unsigned>(value);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

/// Fixed notation for moderate values, scientific once a dispersion is effectively Poisson.
std::string compact(double value) {
    if (value < 1e4) {
        return format_fixed(value, 3);
    }
    std::ostringstream out;
    out << std::setprecision(2) << std::scientific << value;
    return out.str();
}

struct FitArgs {
    std::string data;
    std::string descriptor;
    std::string family = "zip";
    std::string out;
};

int cmd_fit(const FitArgs &args, std::ostream &out) {
    require_file(args.descriptor, "descriptor");
    require_file(args.data, "data file");
    const Family family = parse_family(args.family);
    const auto descriptor = read_descriptor(args.descriptor);
    const auto table = read_survey(args.data, descriptor);
    const auto fitted = fit_model(table, family);
    write_model_file(args.out, fitted.model, fit_report_to_json(fitted));

    out << "rows used: " << table.rows() << ", dropped (missing): " << table.dropped_rows
        << "\n\n";
    out << std::left << std::setw(14) << "act" << std::right << std::setw(9) << "lambda"
        << std::setw(10) << "phi" << std::setw(8) << "theta" << std::setw(14) << "loglik"
        << std::setw(10) << "chi2" << std::setw(4) << "df" << std::setw(8) << "p"
        << "  status\n";
    for (std::size_t j = 0; j < fitted.reports.size(); ++j) {
        const auto &r = fitted.reports[j];
        const auto &p = r.fit.params;
        out << std::left << std::setw(14) << fitted.model.acts[j].id << std::right
            << std::setw(9) << format_fixed(p.lambda, 3) << std::setw(10)
            << (p.family == Family::zinb ? compact(p.phi) : std::string{"-"})
            << std::setw(8) << format_fixed(p.theta, 4) << std::setw(14)
            << format_fixed(r.fit.log_likelihood, 2) << std::setw(10)
            << format_fixed(r.chi_square, 2) << std::setw(4) << r.df << std::setw(8)
            << (std::isnan(r.p_value) ? std::string{"-"} : format_fixed(r.p_value, 3)) << "  "
            << to_string(r.fit.status) << (r.fit.weakly_identified ? " (weak)" : "") << '\n';
    }
    out << "\nmodel written to " << args.out << '\n';
    return kSuccess;
}

struct SimulateArgs {
    std::string config;
    std::string out_dir;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs &args, std::ostream &out, std::ostream &err) {
    const auto started = std::chrono::steady_clock::now();
    require_file(args.config, "config");
    RunConfig config;
    try {
        config = load_run_config(args.config);
    } catch (const Error &e) {
        throw UsageError(std::string{"invalid config: "} + e.what());
    }
    if (args.seed) {
        config.seed = *args.seed;
    }
    const unsigned threads = args.threads ? *args.threads : default_threads();
    if (threads < 1) {
        throw UsageError("--threads must be at least 1");
    }
    std::vector<SimulationConfig> cells;
    try {
        cells = config.cells(threads);
    } catch (const Error &e) {
        throw UsageError(std::string{"invalid config: "} + e.what());
    }
    const std::filesystem::path out_dir{args.out_dir};
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw UsageError("cannot create output directory '" + args.out_dir + "'");
    }

    std::vector<CellResult> results;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        err << "[" << c + 1 << "/" << cells.size() << "] " << cells[c].scenario.name << " / "
            << cells[c].scenario.target.name() << '\n';
        results.push_back({cells[c], evaluate(cells[c])});
    }
    const auto rows = result_rows(results);
    write_text_atomic(out_dir / "results.csv", format_results_csv(rows));
    write_text_atomic(out_dir / "power_long.csv", format_power_long(rows));
    if (config.write_markdown) {
        write_text_atomic(out_dir / "table.md", format_table_markdown(rows));
    }
    if (config.write_text) {
        write_text_atomic(out_dir / "table.txt", format_table_text(rows));
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::ostringstream log;
    log << "version: " << IPVSIM_VERSION << '\n'
        << "config: " << args.config << '\n'
        << "config_hash: " << config.hash() << '\n'
        << "seed: " << config.seed << '\n'
        << "threads: " << threads << '\n'
        << "cells: " << cells.size() << '\n'
        << "n_reps: " << config.n_reps << '\n'
        << "started_utc: " << utc_timestamp() << '\n'
        << "wall_clock_seconds: " << format_fixed(seconds, 3) << '\n';
    write_text_atomic(out_dir / "run.log", log.str());
    out << format_table_text(rows) << "\nresults written to " << out_dir.string()
        << " (config hash " << config.hash() << ", " << format_fixed(seconds, 1) << " s)\n";
    return kSuccess;
}

struct ReportArgs {
    std::vector<std::string> results;
    std::string format = "txt";
};

int cmd_report(const ReportArgs &args, std::ostream &out) {
    std::vector<ResultSet> sets;
    for (const auto &path : args.results) {
        require_file(path, "results file");
        sets.push_back({path, read_results_csv(path)});
    }
    out << format_report(sets, args.format);
    return kSuccess;
}

struct GenerateArgs {
    std::string model;
    std::size_t rows = 10000;
    std::uint64_t seed = 1;
    std::string mode = "category";
    std::string out_dir;
};

int cmd_generate(const GenerateArgs &args, std::ostream &out) {
    MultiActModel model = default_model();
    if (!args.model.empty()) {
        require_file(args.model, "model file");
        model = read_model_file(args.model);
    }
    const std::filesystem::path out_dir{args.out_dir};
    std::filesystem::create_directories(out_dir);

    RandomStream rng = RandomStream::substream(args.seed, 0, StreamPurpose::baseline);
    SurveyTable table;
    table.acts = model.acts;
    table.mode = parse_response_mode(args.mode);
    const CountMatrix counts = sample_joint(model, args.rows, rng);
    table.values = table.mode == ResponseMode::category ? categorize(counts) : counts;
    table.weights.assign(args.rows, 1.0);

    SurveyDescriptor descriptor;
    descriptor.mode = table.mode;
    descriptor.acts = model.acts;
    write_survey(out_dir / "survey.csv", table);
    write_descriptor(out_dir / "survey.json", descriptor);
    write_model_file(out_dir / "generating_model.json", model);
    out << "wrote " << args.rows << " rows to " << (out_dir / "survey.csv").string() << '\n';
    return kSuccess;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Monte Carlo power and bias simulator for binary versus summed coding of "
                 "multi-item violence outcomes in randomized trials",
                 "ipvsim"};
    app.set_version_flag("--version", IPVSIM_VERSION);
    app.require_subcommand(1);

    FitArgs fit;
    auto *fit_cmd = app.add_subcommand("fit", "Fit per-act marginals and the latent correlation "
                                              "matrix to survey data and write a model file");
    fit_cmd->add_option("--data", fit.data, "Comma-separated survey file")->required();
    fit_cmd->add_option("--descriptor", fit.descriptor, "JSON survey descriptor")->required();
    fit_cmd->add_option("--family", fit.family, "Count family")
        ->check(CLI::IsMember({"zip", "zinb"}))
        ->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "Model file to write")->required();

    SimulateArgs simulate;
    auto *simulate_cmd =
        app.add_subcommand("simulate", "Run a scenario x target grid described by a run config");
    simulate_cmd->add_option("--config", simulate.config, "JSON run config")->required();
    simulate_cmd->add_option("--out-dir", simulate.out_dir, "Directory for outputs")->required();
    simulate_cmd->add_option("--threads", simulate.threads,
                             "Worker threads (default: $IPVSIM_THREADS, else all cores)");
    simulate_cmd->add_option("--seed", simulate.seed, "Override the config's seed");

    ReportArgs report;
    auto *report_cmd = app.add_subcommand(
        "report", "Tabulate power(binary) - power(sum) from one or more results.csv files");
    report_cmd->add_option("--results", report.results, "results.csv paths")
        ->required()
        ->expected(1, -1);
    report_cmd->add_option("--format", report.format, "Output format")
        ->check(CLI::IsMember({"csv", "md", "txt"}))
        ->capture_default_str();

    GenerateArgs generate;
    auto *generate_cmd = app.add_subcommand(
        "generate", "Write a synthetic survey drawn from a model (default: built-in model)");
    generate_cmd->add_option("--model", generate.model, "Model file (default: built-in)");
    generate_cmd->add_option("--rows", generate.rows, "Respondents")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    generate_cmd->add_option("--seed", generate.seed, "Random seed")->capture_default_str();
    generate_cmd->add_option("--mode", generate.mode, "Column type")
        ->check(CLI::IsMember({"category", "count"}))
        ->capture_default_str();
    generate_cmd->add_option("--out-dir", generate.out_dir, "Output directory")->required();

    app.footer("Exit codes: 0 success, 1 runtime failure, 2 usage or config error.\n"
               "Environment: IPVSIM_THREADS sets the default thread count for simulate.");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        if (*fit_cmd) {
            return cmd_fit(fit, out);
        }
        if (*simulate_cmd) {
            return cmd_simulate(simulate, out, err);
        }
        if (*report_cmd) {
            return cmd_report(report, out);
        }
        if (*generate_cmd) {
            return cmd_generate(generate, out);
        }
    } catch (const UsageError &e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kUsageError;
}

} // namespace ipvsim::cli
