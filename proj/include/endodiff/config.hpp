#pragma once

#include <string>
#include <vector>

#include "endodiff/bias.hpp"
#include "endodiff/json_io.hpp"

namespace endodiff {

enum class ReportFormat { json, csv };

std::string to_string(ReportFormat format);
ReportFormat report_format_from_string(const std::string& text);

/// One named scenario: the pair's master_seed is filled in at run time from
/// the experiment seed and the scenario name.
struct ScenarioConfig {
    std::string name;
    ScenarioPair pair;
};

struct OutputConfig {
    ReportFormat format = ReportFormat::json;
    std::string path = "report.json";
};

struct ExperimentConfig {
    Seed master_seed = 0;
    double tol_multiplier = 4.0;
    OutputConfig output;
    std::vector<ScenarioConfig> scenarios;
};

bool operator==(const ScenarioConfig& lhs, const ScenarioConfig& rhs);
bool operator==(const ExperimentConfig& lhs, const ExperimentConfig& rhs);

/// Parses and validates a configuration document. Every semantic failure is
/// a ValidationError naming the offending path; syntax failures are
/// ParseErrors with the location nlohmann reports.
ExperimentConfig parse_config(const std::string& text);

/// Resolved-config echo (defaults applied), in the documented key order.
OrderedJson config_to_json(const ExperimentConfig& config);

/// Inverse of config_to_json; used when reports are re-read.
ExperimentConfig config_from_json(const OrderedJson& json);

OrderedJson dgp_spec_to_json(const DgpSpec& spec);

/// The experiment shipped with the toolkit; `run` uses it when no --config
/// is given. configs/default_experiment.json holds the same bytes.
const std::string& default_experiment_config_text();

} // namespace endodiff
