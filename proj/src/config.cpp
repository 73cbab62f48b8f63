#include "endodiff/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "endodiff/rng.hpp"

namespace endodiff {

std::string to_string(ReportFormat format) {
    return format == ReportFormat::json ? "json" : "csv";
}

ReportFormat report_format_from_string(const std::string& text) {
    if (text == "json") return ReportFormat::json;
    if (text == "csv") return ReportFormat::csv;
    throw ValidationError("output.format must be \"json\" or \"csv\", got \"" + text + "\"");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError(path + ": " + message);
}

const OrderedJson& member(const OrderedJson& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing required field \"") + key + "\"");
    return *it;
}

void check_keys(const OrderedJson& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; }) == allowed.end()) {
            fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
        }
    }
}

void expect_object(const OrderedJson& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

double as_number(const OrderedJson& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

std::int64_t as_integer(const OrderedJson& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
    return j.get<std::int64_t>();
}

Seed as_seed(const OrderedJson& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
    fail(path, "expected a non-negative integer");
}

std::string as_string(const OrderedJson& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

Vector as_vector(const OrderedJson& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Index>(i)) = as_number(j[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
}

Matrix as_matrix(const OrderedJson& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    Matrix m;
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string row_path = path + "[" + std::to_string(i) + "]";
        const Vector row = as_vector(j[i], row_path);
        if (i == 0) {
            m.resize(static_cast<Index>(rows), row.size());
        } else if (row.size() != m.cols()) {
            fail(row_path, "rows must all have the same length");
        }
        m.row(static_cast<Index>(i)) = row.transpose();
    }
    return m;
}

EndogeneityMechanism parse_mechanism(const OrderedJson& j, const std::string& path) {
    expect_object(j, path);
    const std::string type = as_string(member(j, "type", path), path + ".type");
    if (type == "exogenous") {
        check_keys(j, path, {"type"});
        return Exogenous{};
    }
    if (type == "linear_error_correlation") {
        check_keys(j, path, {"type", "gamma"});
        return LinearErrorCorrelation{as_vector(member(j, "gamma", path), path + ".gamma")};
    }
    if (type == "omitted_variable") {
        check_keys(j, path, {"type", "delta", "loading"});
        return OmittedVariable{as_number(member(j, "delta", path), path + ".delta"),
                               as_vector(member(j, "loading", path), path + ".loading")};
    }
    if (type == "measurement_error") {
        check_keys(j, path, {"type", "eta_sd"});
        return MeasurementError{as_vector(member(j, "eta_sd", path), path + ".eta_sd")};
    }
    if (type == "simultaneity") {
        check_keys(j, path, {"type", "alpha"});
        return Simultaneity{as_number(member(j, "alpha", path), path + ".alpha")};
    }
    fail(path + ".type", "unknown mechanism \"" + type + "\"");
}

DgpSpec parse_spec(const OrderedJson& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"beta", "x_cov", "noise_sd", "mechanism"});
    DgpSpec spec;
    spec.beta = as_vector(member(j, "beta", path), path + ".beta");
    spec.x_cov = as_matrix(member(j, "x_cov", path), path + ".x_cov");
    if (const auto it = j.find("noise_sd"); it != j.end()) {
        spec.noise_sd = as_number(*it, path + ".noise_sd");
    }
    spec.mechanism = parse_mechanism(member(j, "mechanism", path), path + ".mechanism");
    try {
        spec.validate();
    } catch (const InvalidSpec& e) {
        throw ValidationError(path + "." + e.what());
    }
    return spec;
}

ScenarioConfig parse_scenario(const OrderedJson& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"name", "n_b", "n_a", "reps", "spec_b", "spec_a"});
    ScenarioConfig scenario;
    scenario.name = as_string(member(j, "name", path), path + ".name");
    if (scenario.name.empty()) fail(path + ".name", "must not be empty");
    scenario.pair.n_b = as_integer(member(j, "n_b", path), path + ".n_b");
    scenario.pair.n_a = as_integer(member(j, "n_a", path), path + ".n_a");
    const std::int64_t reps = as_integer(member(j, "reps", path), path + ".reps");
    if (reps < 2) fail(path + ".reps", "must be at least 2");
    scenario.pair.reps = static_cast<int>(reps);
    scenario.pair.spec_b = parse_spec(member(j, "spec_b", path), path + ".spec_b");
    scenario.pair.spec_a = parse_spec(member(j, "spec_a", path), path + ".spec_a");
    if (scenario.pair.spec_b.p() != scenario.pair.spec_a.p()) {
        fail(path, "spec_b and spec_a have different coefficient counts");
    }
    if (scenario.pair.n_b <= scenario.pair.spec_b.p()) fail(path + ".n_b", "must exceed p");
    if (scenario.pair.n_a <= scenario.pair.spec_a.p()) fail(path + ".n_a", "must exceed p");
    return scenario;
}

} // namespace

ExperimentConfig config_from_json(const OrderedJson& j) {
    expect_object(j, "(root)");
    check_keys(j, "", {"master_seed", "tol_multiplier", "output", "scenarios"});

    ExperimentConfig config;
    if (const auto it = j.find("master_seed"); it != j.end()) {
        config.master_seed = as_seed(*it, "master_seed");
    }
    if (const auto it = j.find("tol_multiplier"); it != j.end()) {
        config.tol_multiplier = as_number(*it, "tol_multiplier");
        if (!(config.tol_multiplier > 0.0)) fail("tol_multiplier", "must be positive");
    }
    if (const auto it = j.find("output"); it != j.end()) {
        expect_object(*it, "output");
        check_keys(*it, "output", {"format", "path"});
        if (const auto f = it->find("format"); f != it->end()) {
            config.output.format = report_format_from_string(as_string(*f, "output.format"));
        }
        if (const auto p = it->find("path"); p != it->end()) {
            config.output.path = as_string(*p, "output.path");
            if (config.output.path.empty()) fail("output.path", "must not be empty");
        }
    }

    const OrderedJson& scenarios = member(j, "scenarios", "(root)");
    if (!scenarios.is_array()) fail("scenarios", "expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const std::string path = "scenarios[" + std::to_string(i) + "]";
        ScenarioConfig scenario = parse_scenario(scenarios[i], path);
        if (!names.insert(scenario.name).second) {
            fail(path + ".name", "duplicate scenario name \"" + scenario.name + "\"");
        }
        config.scenarios.push_back(std::move(scenario));
    }
    return config;
}

ExperimentConfig parse_config(const std::string& text) {
    OrderedJson j;
    try {
        j = OrderedJson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    return config_from_json(j);
}

OrderedJson dgp_spec_to_json(const DgpSpec& spec) {
    OrderedJson j;
    j["beta"] = std::vector<double>(spec.beta.begin(), spec.beta.end());
    OrderedJson cov = OrderedJson::array();
    for (Index i = 0; i < spec.x_cov.rows(); ++i) {
        cov.push_back(std::vector<double>(spec.x_cov.row(i).begin(), spec.x_cov.row(i).end()));
    }
    j["x_cov"] = std::move(cov);
    j["noise_sd"] = spec.noise_sd;
    OrderedJson mech;
    mech["type"] = mechanism_name(spec.mechanism);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearErrorCorrelation>) {
                mech["gamma"] = std::vector<double>(m.gamma.begin(), m.gamma.end());
            } else if constexpr (std::is_same_v<T, OmittedVariable>) {
                mech["delta"] = m.delta;
                mech["loading"] = std::vector<double>(m.loading.begin(), m.loading.end());
            } else if constexpr (std::is_same_v<T, MeasurementError>) {
                mech["eta_sd"] = std::vector<double>(m.eta_sd.begin(), m.eta_sd.end());
            } else if constexpr (std::is_same_v<T, Simultaneity>) {
                mech["alpha"] = m.alpha;
            }
        },
        spec.mechanism);
    j["mechanism"] = std::move(mech);
    return j;
}

OrderedJson config_to_json(const ExperimentConfig& config) {
    OrderedJson j;
    j["master_seed"] = config.master_seed;
    j["tol_multiplier"] = config.tol_multiplier;
    j["output"] = OrderedJson{{"format", to_string(config.output.format)},
                              {"path", config.output.path}};
    OrderedJson scenarios = OrderedJson::array();
    for (const auto& scenario : config.scenarios) {
        OrderedJson s;
        s["name"] = scenario.name;
        s["n_b"] = scenario.pair.n_b;
        s["n_a"] = scenario.pair.n_a;
        s["reps"] = scenario.pair.reps;
        s["spec_b"] = dgp_spec_to_json(scenario.pair.spec_b);
        s["spec_a"] = dgp_spec_to_json(scenario.pair.spec_a);
        scenarios.push_back(std::move(s));
    }
    j["scenarios"] = std::move(scenarios);
    return j;
}

namespace {

bool same(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

bool same(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_mechanism(const EndogeneityMechanism& lhs, const EndogeneityMechanism& rhs) {
    if (lhs.index() != rhs.index()) return false;
    return std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            const auto& b = std::get<T>(rhs);
            if constexpr (std::is_same_v<T, LinearErrorCorrelation>) {
                return same(a.gamma, b.gamma);
            } else if constexpr (std::is_same_v<T, OmittedVariable>) {
                return a.delta == b.delta && same(a.loading, b.loading);
            } else if constexpr (std::is_same_v<T, MeasurementError>) {
                return same(a.eta_sd, b.eta_sd);
            } else if constexpr (std::is_same_v<T, Simultaneity>) {
                return a.alpha == b.alpha;
            } else {
                return true;
            }
        },
        lhs);
}

bool same_spec(const DgpSpec& a, const DgpSpec& b) {
    return same(a.beta, b.beta) && same(a.x_cov, b.x_cov) && a.noise_sd == b.noise_sd &&
           same_mechanism(a.mechanism, b.mechanism);
}

} // namespace

bool operator==(const ScenarioConfig& lhs, const ScenarioConfig& rhs) {
    return lhs.name == rhs.name && lhs.pair.n_b == rhs.pair.n_b && lhs.pair.n_a == rhs.pair.n_a &&
           lhs.pair.reps == rhs.pair.reps && same_spec(lhs.pair.spec_b, rhs.pair.spec_b) &&
           same_spec(lhs.pair.spec_a, rhs.pair.spec_a);
}

bool operator==(const ExperimentConfig& lhs, const ExperimentConfig& rhs) {
    return lhs.master_seed == rhs.master_seed && lhs.tol_multiplier == rhs.tol_multiplier &&
           lhs.output.format == rhs.output.format && lhs.output.path == rhs.output.path &&
           lhs.scenarios == rhs.scenarios;
}

} // namespace endodiff
