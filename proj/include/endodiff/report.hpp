#pragma once

#include <optional>
#include <string>
#include <vector>

#include "endodiff/config.hpp"

namespace endodiff {

/// Result of one scenario: either a full PropositionReport or the error that
/// stopped it. `seed` is the derived per-scenario seed actually used.
struct ScenarioOutcome {
    std::string name;
    Seed seed = 0;
    std::string error;
    std::optional<PropositionReport> report;

    bool ok() const { return error.empty(); }
};

/// Everything one `run` produces. Scenarios are sorted by name, so assembly
/// order never depends on execution order. duration_seconds is a diagnostic:
/// it is not serialized and does not participate in equality, keeping report
/// files byte-identical across reruns.
struct RunReport {
    std::string version;
    ExperimentConfig config;
    std::vector<ScenarioOutcome> scenarios;
    int identity_breaches = 0;      // scenarios whose decomposition residual broke tolerance
    int scenario_errors = 0;
    long long skipped_replications = 0;
    double duration_seconds = 0.0;  // diagnostic only

    bool clean() const { return identity_breaches == 0 && scenario_errors == 0; }
};

bool operator==(const ScenarioOutcome& lhs, const ScenarioOutcome& rhs);
bool operator==(const RunReport& lhs, const RunReport& rhs);

OrderedJson report_to_json(const RunReport& report);
RunReport report_from_json(const OrderedJson& json);

/// Byte-stable JSON serialization (fixed key order, 17-significant-digit
/// numbers). parse_report(serialize_report(r)) == r.
std::string serialize_report(const RunReport& report);
RunReport parse_report(const std::string& text);

/// CSV projection: header + one row per (scenario, coefficient index) with
/// columns scenario, coef, true_diff, measured_diff, mc_se_diff, bias_b,
/// bias_a, gap, gap_mc_se, verdict. Errored scenarios contribute no rows.
std::string report_to_csv(const RunReport& report);

/// Writes the report in the requested format. Throws IoError.
void write_report(const RunReport& report, ReportFormat format, const std::string& path);

/// Executes every scenario of the config (per-scenario seeds derived from
/// the master seed and the scenario NAME) and assembles the report. One
/// scenario failing does not stop the others.
RunReport run_experiment(const ExperimentConfig& config);

} // namespace endodiff
