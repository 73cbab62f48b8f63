#include "endodiff/report.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "endodiff/rng.hpp"
#include "endodiff/version.hpp"

namespace endodiff {

namespace {

OrderedJson vector_to_json(const Vector& v) {
    return std::vector<double>(v.begin(), v.end());
}

Vector vector_from_json(const OrderedJson& j, const char* key) {
    const auto& arr = j.at(key);
    Vector v(static_cast<Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Index>(i)) = arr[i].get<double>();
    return v;
}

OrderedJson bias_term_to_json(const BiasTerm& term) {
    OrderedJson j;
    j["finite_sample"] = vector_to_json(term.finite_sample);
    j["asymptotic"] = vector_to_json(term.asymptotic);
    j["mc_se"] = vector_to_json(term.mc_se);
    j["reps_used"] = term.reps_used;
    j["skipped"] = term.skipped;
    return j;
}

BiasTerm bias_term_from_json(const OrderedJson& j) {
    BiasTerm term;
    term.finite_sample = vector_from_json(j, "finite_sample");
    term.asymptotic = vector_from_json(j, "asymptotic");
    term.mc_se = vector_from_json(j, "mc_se");
    term.reps_used = j.at("reps_used").get<int>();
    term.skipped = j.at("skipped").get<int>();
    return term;
}

OrderedJson proposition_to_json(const PropositionReport& r) {
    OrderedJson j;
    j["verdict"] = r.verdict == CriterionVerdict::holds ? "holds" : "violated";
    j["identity_holds"] = r.identity_holds;
    j["mc_valid"] = r.mc_valid;
    j["tol_multiplier"] = r.tol_multiplier;
    j["true_diff"] = vector_to_json(r.true_diff);
    j["measured_diff"] = vector_to_json(r.measured_diff);
    j["mc_se_diff"] = vector_to_json(r.mc_se_diff);
    j["mean_beta_b"] = vector_to_json(r.mean_beta_b);
    j["mc_se_beta_b"] = vector_to_json(r.mc_se_beta_b);
    j["mean_beta_a"] = vector_to_json(r.mean_beta_a);
    j["mc_se_beta_a"] = vector_to_json(r.mc_se_beta_a);
    j["bias_b"] = bias_term_to_json(r.bias_b);
    j["bias_a"] = bias_term_to_json(r.bias_a);
    j["criterion_gap"] = vector_to_json(r.criterion_gap);
    j["criterion_gap_mc_se"] = vector_to_json(r.criterion_gap_mc_se);
    j["asymptotic_gap"] = vector_to_json(r.asymptotic_gap);
    j["identity_residual"] = vector_to_json(r.identity_residual);
    return j;
}

PropositionReport proposition_from_json(const OrderedJson& j) {
    PropositionReport r;
    r.verdict = j.at("verdict").get<std::string>() == "holds" ? CriterionVerdict::holds
                                                              : CriterionVerdict::violated;
    r.identity_holds = j.at("identity_holds").get<bool>();
    r.mc_valid = j.at("mc_valid").get<bool>();
    r.tol_multiplier = j.at("tol_multiplier").get<double>();
    r.true_diff = vector_from_json(j, "true_diff");
    r.measured_diff = vector_from_json(j, "measured_diff");
    r.mc_se_diff = vector_from_json(j, "mc_se_diff");
    r.mean_beta_b = vector_from_json(j, "mean_beta_b");
    r.mc_se_beta_b = vector_from_json(j, "mc_se_beta_b");
    r.mean_beta_a = vector_from_json(j, "mean_beta_a");
    r.mc_se_beta_a = vector_from_json(j, "mc_se_beta_a");
    r.bias_b = bias_term_from_json(j.at("bias_b"));
    r.bias_a = bias_term_from_json(j.at("bias_a"));
    r.criterion_gap = vector_from_json(j, "criterion_gap");
    r.criterion_gap_mc_se = vector_from_json(j, "criterion_gap_mc_se");
    r.asymptotic_gap = vector_from_json(j, "asymptotic_gap");
    r.identity_residual = vector_from_json(j, "identity_residual");
    return r;
}

bool same(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

bool same_bias(const BiasTerm& a, const BiasTerm& b) {
    return same(a.finite_sample, b.finite_sample) && same(a.asymptotic, b.asymptotic) &&
           same(a.mc_se, b.mc_se) && a.reps_used == b.reps_used && a.skipped == b.skipped;
}

bool same_proposition(const PropositionReport& a, const PropositionReport& b) {
    return a.verdict == b.verdict && a.identity_holds == b.identity_holds &&
           a.mc_valid == b.mc_valid && a.tol_multiplier == b.tol_multiplier &&
           same(a.true_diff, b.true_diff) && same(a.measured_diff, b.measured_diff) &&
           same(a.mc_se_diff, b.mc_se_diff) && same(a.mean_beta_b, b.mean_beta_b) &&
           same(a.mc_se_beta_b, b.mc_se_beta_b) && same(a.mean_beta_a, b.mean_beta_a) &&
           same(a.mc_se_beta_a, b.mc_se_beta_a) && same_bias(a.bias_b, b.bias_b) &&
           same_bias(a.bias_a, b.bias_a) && same(a.criterion_gap, b.criterion_gap) &&
           same(a.criterion_gap_mc_se, b.criterion_gap_mc_se) &&
           same(a.asymptotic_gap, b.asymptotic_gap) &&
           same(a.identity_residual, b.identity_residual);
}

} // namespace

bool operator==(const ScenarioOutcome& lhs, const ScenarioOutcome& rhs) {
    if (lhs.name != rhs.name || lhs.seed != rhs.seed || lhs.error != rhs.error) return false;
    if (lhs.report.has_value() != rhs.report.has_value()) return false;
    return !lhs.report || same_proposition(*lhs.report, *rhs.report);
}

bool operator==(const RunReport& lhs, const RunReport& rhs) {
    return lhs.version == rhs.version && lhs.config == rhs.config &&
           lhs.scenarios == rhs.scenarios && lhs.identity_breaches == rhs.identity_breaches &&
           lhs.scenario_errors == rhs.scenario_errors &&
           lhs.skipped_replications == rhs.skipped_replications;
}

OrderedJson report_to_json(const RunReport& report) {
    OrderedJson j;
    j["version"] = report.version;
    j["config"] = config_to_json(report.config);
    j["summary"] = OrderedJson{{"scenario_count", report.scenarios.size()},
                               {"identity_breaches", report.identity_breaches},
                               {"scenario_errors", report.scenario_errors},
                               {"skipped_replications", report.skipped_replications}};
    OrderedJson scenarios = OrderedJson::array();
    for (const auto& outcome : report.scenarios) {
        OrderedJson s;
        s["name"] = outcome.name;
        s["seed"] = outcome.seed;
        s["status"] = outcome.ok() ? "ok" : "error";
        if (outcome.ok()) {
            s["report"] = proposition_to_json(*outcome.report);
        } else {
            s["error"] = outcome.error;
        }
        scenarios.push_back(std::move(s));
    }
    j["scenarios"] = std::move(scenarios);
    return j;
}

RunReport report_from_json(const OrderedJson& j) {
    RunReport report;
    report.version = j.at("version").get<std::string>();
    report.config = config_from_json(j.at("config"));
    report.identity_breaches = j.at("summary").at("identity_breaches").get<int>();
    report.scenario_errors = j.at("summary").at("scenario_errors").get<int>();
    report.skipped_replications = j.at("summary").at("skipped_replications").get<long long>();
    for (const auto& s : j.at("scenarios")) {
        ScenarioOutcome outcome;
        outcome.name = s.at("name").get<std::string>();
        outcome.seed = s.at("seed").get<Seed>();
        if (s.at("status").get<std::string>() == "ok") {
            outcome.report = proposition_from_json(s.at("report"));
        } else {
            outcome.error = s.at("error").get<std::string>();
        }
        report.scenarios.push_back(std::move(outcome));
    }
    return report;
}

std::string serialize_report(const RunReport& report) {
    return dump_json(report_to_json(report));
}

RunReport parse_report(const std::string& text) {
    OrderedJson j;
    try {
        j = OrderedJson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    try {
        return report_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

std::string report_to_csv(const RunReport& report) {
    std::string out = "scenario,coef,true_diff,measured_diff,mc_se_diff,bias_b,bias_a,gap,gap_mc_se,verdict\n";
    for (const auto& outcome : report.scenarios) {
        if (!outcome.ok()) continue;
        const PropositionReport& r = *outcome.report;
        for (Index c = 0; c < r.true_diff.size(); ++c) {
            out += outcome.name;
            out += ',' + std::to_string(c);
            out += ',' + format_double(r.true_diff(c));
            out += ',' + format_double(r.measured_diff(c));
            out += ',' + format_double(r.mc_se_diff(c));
            out += ',' + format_double(r.bias_b.finite_sample(c));
            out += ',' + format_double(r.bias_a.finite_sample(c));
            out += ',' + format_double(r.criterion_gap(c));
            out += ',' + format_double(r.criterion_gap_mc_se(c));
            out += ',';
            out += r.verdict == CriterionVerdict::holds ? "holds" : "violated";
            out += '\n';
        }
    }
    return out;
}

void write_report(const RunReport& report, ReportFormat format, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    file << (format == ReportFormat::json ? serialize_report(report) : report_to_csv(report));
    if (!file.good()) throw IoError("failed writing '" + path + "'");
}

RunReport run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();

    RunReport report;
    report.version = version_string();
    report.config = config;
    report.scenarios.reserve(config.scenarios.size());
    for (const auto& scenario : config.scenarios) {
        ScenarioOutcome outcome;
        outcome.name = scenario.name;
        ScenarioPair pair = scenario.pair;
        pair.master_seed = derive_seed(config.master_seed, scenario.name);
        outcome.seed = pair.master_seed;
        try {
            outcome.report = proposition_check(pair, config.tol_multiplier);
        } catch (const Error& e) {
            outcome.error = e.what();
        }
        report.scenarios.push_back(std::move(outcome));
    }
    std::sort(report.scenarios.begin(), report.scenarios.end(),
              [](const ScenarioOutcome& a, const ScenarioOutcome& b) { return a.name < b.name; });

    for (const auto& outcome : report.scenarios) {
        if (!outcome.ok()) {
            ++report.scenario_errors;
            continue;
        }
        if (!outcome.report->identity_holds) ++report.identity_breaches;
        report.skipped_replications +=
            outcome.report->bias_b.skipped + outcome.report->bias_a.skipped;
    }

    report.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace endodiff
