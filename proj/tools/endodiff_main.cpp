#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "endodiff/eventsplit.hpp"
#include "endodiff/json_io.hpp"
#include "endodiff/report.hpp"
#include "endodiff/version.hpp"

namespace {

using namespace endodiff;

// Exit codes: 0 success, 1 statistical failure in a report, 2 configuration
// or data error, 3 I/O error.
constexpr int kExitOk = 0;
constexpr int kExitStatistical = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    if (!file.good() && !file.eof()) throw IoError("failed reading '" + path + "'");
    return buffer.str();
}

struct RunOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<std::string> format;
    std::optional<std::string> out;
};

int command_run(const RunOptions& options) {
    ExperimentConfig config;
    try {
        const std::string text = options.config_path.empty() ? default_experiment_config_text()
                                                             : read_file(options.config_path);
        config = parse_config(text);
        if (options.format) config.output.format = report_format_from_string(*options.format);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (options.seed) config.master_seed = *options.seed;
    if (options.reps) {
        if (*options.reps < 2) {
            std::cerr << "error: --reps must be at least 2\n";
            return kExitConfig;
        }
        for (auto& scenario : config.scenarios) scenario.pair.reps = *options.reps;
    }
    if (options.out) config.output.path = *options.out;

    const RunReport report = run_experiment(config);
    for (const auto& outcome : report.scenarios) {
        if (!outcome.ok()) {
            std::cout << outcome.name << ": ERROR (" << outcome.error << ")\n";
            continue;
        }
        std::cout << outcome.name << ": criterion "
                  << (outcome.report->verdict == CriterionVerdict::holds ? "holds" : "violated");
        if (!outcome.report->identity_holds) std::cout << " [identity residual out of tolerance]";
        if (!outcome.report->mc_valid) std::cout << " [>1% replications skipped]";
        std::cout << "\n";
    }

    try {
        write_report(report, config.output.format, config.output.path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    std::cout << "report written to " << config.output.path << "\n";
    std::cerr << "completed " << report.scenarios.size() << " scenario(s) in "
              << report.duration_seconds << " s\n";
    return report.clean() ? kExitOk : kExitStatistical;
}

OrderedJson fit_to_json(const FitResult& fit) {
    OrderedJson j;
    j["n"] = fit.n;
    j["coefficients"] = std::vector<double>(fit.beta_hat.begin(), fit.beta_hat.end());
    std::vector<double> se;
    for (Index i = 0; i < fit.p; ++i) se.push_back(std::sqrt(std::max(0.0, fit.cov_hat(i, i))));
    j["std_errors"] = se;
    j["sigma2"] = fit.sigma2_hat;
    j["condition_number"] = fit.condition_number;
    return j;
}

int command_fit(const std::string& data_path, const std::string& response, std::int64_t event,
                std::int64_t window) {
    try {
        const TimeSeriesDataset data = read_csv_dataset(data_path, response);
        const SplitSpec split{static_cast<Index>(event), static_cast<Index>(window)};
        const ComparativeStudy study = comparative_study(data, split);

        OrderedJson j;
        j["data"] = data_path;
        j["response"] = response;
        j["labels"] = data.labels;
        j["event_index"] = event;
        j["exclusion_window"] = window;
        j["before"] = fit_to_json(study.before_fit);
        j["after"] = fit_to_json(study.after_fit);
        j["diff"] = std::vector<double>(study.diff.diff.begin(), study.diff.diff.end());
        std::vector<double> diff_se;
        for (Index i = 0; i < study.diff.diff.size(); ++i) {
            diff_se.push_back(std::sqrt(std::max(0.0, study.diff.cov(i, i))));
        }
        j["diff_se"] = diff_se;
        j["z_scores"] = std::vector<double>(study.diff.z_scores.begin(), study.diff.z_scores.end());
        j["gram_inverse_discrepancy"] = study.gram_inverse_discrepancy;
        std::cout << dump_json(j);
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int command_validate(const std::string& config_path) {
    try {
        const ExperimentConfig config = parse_config(read_file(config_path));
        std::cout << "OK: " << config.scenarios.size() << " scenario(s), master_seed "
                  << config.master_seed << ", output " << to_string(config.output.format) << " -> "
                  << config.output.path << "\n";
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo toolkit for endogeneity bias in comparative regression studies"};
    app.set_version_flag("--version", endodiff::version_string());
    app.require_subcommand(0, 1);

    RunOptions run_options;
    auto* run = app.add_subcommand("run", "execute an experiment and write its report");
    run->add_option("--config", run_options.config_path,
                    "experiment file (defaults to the built-in study)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = run->add_option("--seed", seed_value, "override the master seed");
    int reps_value = 0;
    auto* reps_opt = run->add_option("--reps", reps_value, "override every scenario's replication count");
    std::string format_value;
    auto* format_opt =
        run->add_option("--format", format_value, "report format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    std::string out_value;
    auto* out_opt = run->add_option("--out", out_value, "report path");

    std::string fit_data;
    std::string fit_response;
    std::int64_t fit_event = 0;
    std::int64_t fit_window = 0;
    auto* fit = app.add_subcommand("fit", "before/after comparative fit of a CSV dataset");
    fit->add_option("--data", fit_data, "CSV file with a header line")->required();
    fit->add_option("--response", fit_response, "name of the response column")->required();
    fit->add_option("--event", fit_event, "first row index of the after period")->required();
    fit->add_option("--window", fit_window, "rows dropped on each side of the event");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "parse and validate an experiment file");
    validate->add_option("--config", validate_path, "experiment file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (run->parsed()) {
        if (seed_opt->count() > 0) run_options.seed = seed_value;
        if (reps_opt->count() > 0) run_options.reps = reps_value;
        if (format_opt->count() > 0) run_options.format = format_value;
        if (out_opt->count() > 0) run_options.out = out_value;
        return command_run(run_options);
    }
    if (fit->parsed()) return command_fit(fit_data, fit_response, fit_event, fit_window);
    if (validate->parsed()) return command_validate(validate_path);

    std::cout << app.help();
    return kExitOk;
}
