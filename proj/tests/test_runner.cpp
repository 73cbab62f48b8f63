#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "endodiff/report.hpp"
#include "endodiff/version.hpp"
#include "support/schema_check.hpp"

using namespace endodiff;

namespace {

const char* kMinimalConfig = R"({
  "scenarios": [
    {
      "name": "baseline",
      "n_b": 60, "n_a": 60, "reps": 50,
      "spec_b": { "beta": [1.0], "x_cov": [[1.0]], "mechanism": { "type": "exogenous" } },
      "spec_a": { "beta": [1.0], "x_cov": [[1.0]], "mechanism": { "type": "exogenous" } }
    }
  ]
})";

std::string small_two_scenario_config(bool swapped) {
    const std::string cancellation = R"(    {
      "name": "cancellation",
      "n_b": 200, "n_a": 200, "reps": 300,
      "spec_b": { "beta": [1.0], "x_cov": [[1.0]],
                  "mechanism": { "type": "linear_error_correlation", "gamma": [0.5] } },
      "spec_a": { "beta": [1.5], "x_cov": [[1.0]],
                  "mechanism": { "type": "linear_error_correlation", "gamma": [0.5] } }
    })";
    const std::string violation = R"(    {
      "name": "violation",
      "n_b": 200, "n_a": 200, "reps": 300,
      "spec_b": { "beta": [1.0], "x_cov": [[1.0]],
                  "mechanism": { "type": "linear_error_correlation", "gamma": [0.5] } },
      "spec_a": { "beta": [1.5], "x_cov": [[1.0]],
                  "mechanism": { "type": "linear_error_correlation", "gamma": [0.8] } }
    })";
    std::string text = "{\n  \"master_seed\": 424242,\n  \"scenarios\": [\n";
    text += swapped ? violation + ",\n" + cancellation : cancellation + ",\n" + violation;
    text += "\n  ]\n}\n";
    return text;
}

std::string read_repo_file(const std::string& relative) {
    const std::string path = std::string(ENDODIFF_REPO_DIR) + "/" + relative;
    std::ifstream file(path, std::ios::binary);
    REQUIRE(file.good());
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

} // namespace

TEST_SUITE("runner") {

TEST_CASE("minimal config gets the documented defaults") {
    const ExperimentConfig config = parse_config(kMinimalConfig);
    CHECK(config.master_seed == 0);
    CHECK(config.tol_multiplier == 4.0);
    CHECK(config.output.format == ReportFormat::json);
    CHECK(config.output.path == "report.json");
    REQUIRE(config.scenarios.size() == 1);
    CHECK(config.scenarios[0].name == "baseline");
    CHECK(config.scenarios[0].pair.reps == 50);
}

TEST_CASE("validation failures name the offending path") {
    SUBCASE("non-positive-definite covariance") {
        std::string text = kMinimalConfig;
        const auto pos = text.find("[[1.0]]");
        text.replace(pos, 7, "[[-1.0]]");
        CHECK_THROWS_WITH_AS(parse_config(text),
                             doctest::Contains("scenarios[0].spec_b.x_cov"), ValidationError);
    }
    SUBCASE("duplicate scenario names") {
        const std::string scenario = R"({
      "name": "baseline",
      "n_b": 60, "n_a": 60, "reps": 50,
      "spec_b": { "beta": [1.0], "x_cov": [[1.0]], "mechanism": { "type": "exogenous" } },
      "spec_a": { "beta": [1.0], "x_cov": [[1.0]], "mechanism": { "type": "exogenous" } }
    })";
        const std::string doubled =
            R"({ "scenarios": [)" + scenario + ",\n" + scenario + "]}";
        CHECK_THROWS_WITH_AS(parse_config(doubled), doctest::Contains("duplicate"), ValidationError);
    }
    SUBCASE("unknown field") {
        std::string text = R"({ "scenarios": [], "typo_field": 1 })";
        CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("typo_field"), ValidationError);
    }
    SUBCASE("bad mechanism type") {
        std::string text = kMinimalConfig;
        const auto pos = text.find("exogenous");
        text.replace(pos, 9, "exogenios");
        CHECK_THROWS_WITH_AS(parse_config(text),
                             doctest::Contains("scenarios[0].spec_b.mechanism.type"),
                             ValidationError);
    }
    SUBCASE("missing required field") {
        CHECK_THROWS_WITH_AS(parse_config(R"({})"), doctest::Contains("scenarios"), ValidationError);
    }
    SUBCASE("syntax errors are parse errors") {
        CHECK_THROWS_AS(parse_config("{ not json"), ParseError);
    }
}

TEST_CASE("run_experiment end to end") {
    ExperimentConfig config = parse_config(small_two_scenario_config(false));
    const RunReport report = run_experiment(config);

    REQUIRE(report.scenarios.size() == 2);
    CHECK(report.version == version_string());
    // Sorted by name: cancellation before violation.
    CHECK(report.scenarios[0].name == "cancellation");
    CHECK(report.scenarios[1].name == "violation");

    REQUIRE(report.scenarios[0].ok());
    REQUIRE(report.scenarios[1].ok());
    const PropositionReport& cancel = *report.scenarios[0].report;
    const PropositionReport& violate = *report.scenarios[1].report;
    CHECK(cancel.verdict == CriterionVerdict::holds);
    CHECK(violate.verdict == CriterionVerdict::violated);
    CHECK(std::abs(violate.criterion_gap(0) - 0.3) <= 4.0 * violate.criterion_gap_mc_se(0));
    CHECK(report.identity_breaches == 0);
    CHECK(report.scenario_errors == 0);
    CHECK(report.clean());
}

TEST_CASE("scenario seeds follow names, not list positions") {
    const RunReport first = run_experiment(parse_config(small_two_scenario_config(false)));
    const RunReport swapped = run_experiment(parse_config(small_two_scenario_config(true)));
    REQUIRE(first.scenarios.size() == 2);
    REQUIRE(swapped.scenarios.size() == 2);
    // After the name sort the outcomes must be identical bit for bit.
    CHECK(first.scenarios[0] == swapped.scenarios[0]);
    CHECK(first.scenarios[1] == swapped.scenarios[1]);
}

TEST_CASE("reruns and worker counts give byte-identical serialized reports") {
    const ExperimentConfig config = parse_config(small_two_scenario_config(false));
    setenv("ENDODIFF_WORKERS", "1", 1);
    const std::string serial = serialize_report(run_experiment(config));
    setenv("ENDODIFF_WORKERS", "3", 1);
    const std::string threaded = serialize_report(run_experiment(config));
    unsetenv("ENDODIFF_WORKERS");
    const std::string rerun = serialize_report(run_experiment(config));
    CHECK(serial == threaded);
    CHECK(serial == rerun);
}

TEST_CASE("partial scenario failure is recorded while others proceed") {
    // Built by hand: parse_config would reject a 2-row sample for p = 2.
    ExperimentConfig config = parse_config(kMinimalConfig);
    ScenarioConfig broken;
    broken.name = "broken";
    broken.pair = config.scenarios[0].pair;
    broken.pair.spec_b.beta = Vector::Constant(2, 1.0);
    broken.pair.spec_b.x_cov = Matrix::Identity(2, 2);
    broken.pair.spec_a = broken.pair.spec_b;
    broken.pair.n_b = 2;
    config.scenarios.push_back(broken);

    const RunReport report = run_experiment(config);
    REQUIRE(report.scenarios.size() == 2);
    CHECK(report.scenarios[0].name == "baseline");
    CHECK(report.scenarios[0].ok());
    CHECK_FALSE(report.scenarios[1].ok());
    CHECK(report.scenarios[1].error.find("must exceed") != std::string::npos);
    CHECK(report.scenario_errors == 1);
    CHECK_FALSE(report.clean());
}

TEST_CASE("error outcomes survive the serialization round trip") {
    RunReport report = run_experiment(parse_config(kMinimalConfig));
    ScenarioOutcome failed;
    failed.name = "zfailed";
    failed.seed = 12345;
    failed.error = "design condition number 1e+13 exceeds 1e+12";
    report.scenarios.push_back(failed);
    report.scenario_errors = 1;

    const RunReport reparsed = parse_report(serialize_report(report));
    CHECK(reparsed == report);
}

TEST_CASE("report serialization round-trips losslessly") {
    const RunReport report = run_experiment(parse_config(small_two_scenario_config(false)));
    const std::string text = serialize_report(report);
    const RunReport reparsed = parse_report(text);
    CHECK(reparsed == report);
    // And the round trip is textually stable as well.
    CHECK(serialize_report(reparsed) == text);
}

TEST_CASE("csv projection shape") {
    SUBCASE("no scenarios: header only") {
        ExperimentConfig config;
        config.scenarios.clear();
        const RunReport report = run_experiment(config);
        CHECK(report_to_csv(report) ==
              "scenario,coef,true_diff,measured_diff,mc_se_diff,bias_b,bias_a,gap,gap_mc_se,verdict\n");
    }
    SUBCASE("one scalar scenario: one data row with ten columns") {
        const RunReport report = run_experiment(parse_config(kMinimalConfig));
        const std::string csv = report_to_csv(report);
        std::istringstream lines(csv);
        std::string header;
        std::string row;
        std::string extra;
        REQUIRE(std::getline(lines, header));
        REQUIRE(std::getline(lines, row));
        CHECK_FALSE(std::getline(lines, extra));
        CHECK(std::count(row.begin(), row.end(), ',') == 9);
        CHECK(row.rfind("baseline,0,", 0) == 0);
    }
}

TEST_CASE("doubles survive the 17-digit formatting") {
    for (const double v : {0.1, 1.0 / 3.0, 2.0, -1.2345678901234567e-300, 6.02214076e23,
                           0.30000000000000004}) {
        const std::string text = format_double(v);
        CHECK(std::strtod(text.c_str(), nullptr) == v);
    }
}

TEST_CASE("emitted reports validate against the shipped schema") {
    const nlohmann::json schema = nlohmann::json::parse(read_repo_file("schemas/report.schema.json"));
    const testsupport::SchemaChecker checker(schema);

    const RunReport report = run_experiment(parse_config(small_two_scenario_config(false)));
    // Include an error outcome so both scenario shapes are covered. The
    // failure has to be a run-time one (n too small for p) so the echoed
    // config itself stays schema-valid.
    ExperimentConfig config = parse_config(kMinimalConfig);
    ScenarioConfig broken;
    broken.name = "broken";
    broken.pair = config.scenarios[0].pair;
    broken.pair.spec_b.beta = Vector::Constant(2, 1.0);
    broken.pair.spec_b.x_cov = Matrix::Identity(2, 2);
    broken.pair.spec_a = broken.pair.spec_b;
    broken.pair.n_b = 2;
    config.scenarios.push_back(broken);
    const RunReport with_error = run_experiment(config);
    REQUIRE(with_error.scenario_errors == 1);

    for (const RunReport* r : {&report, &with_error}) {
        const auto errors = checker.validate(nlohmann::json::parse(serialize_report(*r)));
        for (const auto& e : errors) MESSAGE(e);
        CHECK(errors.empty());
    }
}

TEST_CASE("shipped configs validate against the config schema") {
    const nlohmann::json schema = nlohmann::json::parse(read_repo_file("schemas/config.schema.json"));
    const testsupport::SchemaChecker checker(schema);
    const auto errors =
        checker.validate(nlohmann::json::parse(default_experiment_config_text()));
    for (const auto& e : errors) MESSAGE(e);
    CHECK(errors.empty());
}

TEST_CASE("built-in experiment matches the shipped file and covers every mechanism") {
    CHECK(default_experiment_config_text() == read_repo_file("configs/default_experiment.json"));

    const ExperimentConfig config = parse_config(default_experiment_config_text());
    CHECK(config.scenarios.size() >= 6);
    std::set<std::string> mechanisms;
    std::set<std::string> names;
    bool has_equal_betas = false;
    bool has_changed_betas = false;
    for (const auto& s : config.scenarios) {
        names.insert(s.name);
        mechanisms.insert(mechanism_name(s.pair.spec_b.mechanism));
        mechanisms.insert(mechanism_name(s.pair.spec_a.mechanism));
        if ((s.pair.spec_b.beta.array() == s.pair.spec_a.beta.array()).all()) {
            has_equal_betas = true;
        } else {
            has_changed_betas = true;
        }
    }
    CHECK(names.size() == config.scenarios.size());
    CHECK(mechanisms.size() == 5);
    CHECK(has_equal_betas);
    CHECK(has_changed_betas);
}

TEST_CASE("config echo in the report equals the resolved input config") {
    const ExperimentConfig config = parse_config(kMinimalConfig);
    const RunReport report = run_experiment(config);
    CHECK(report.config == config);
    const ExperimentConfig echoed =
        config_from_json(report_to_json(report).at("config"));
    CHECK(echoed == config);
}

TEST_CASE("write_report creates files and reports I/O failures") {
    const RunReport report = run_experiment(parse_config(kMinimalConfig));
    const std::string path =
        (std::filesystem::temp_directory_path() / "endodiff_report_test.json").string();
    write_report(report, ReportFormat::json, path);
    std::ifstream file(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << file.rdbuf();
    CHECK(buffer.str() == serialize_report(report));
    std::filesystem::remove(path);

    CHECK_THROWS_AS(write_report(report, ReportFormat::json, "/nonexistent_dir/x.json"), IoError);
}

} // TEST_SUITE
