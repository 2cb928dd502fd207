#pragma once

#include "wgeom/chart.hpp"
#include "wgeom/settings.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wgeom {

/// Process exit codes of `run`.
enum ExitCode : int {
    exit_pass = 0,
    exit_fail = 1,
    exit_hypothesis_unmet = 2,
    exit_numerical_error = 3,
    exit_invalid_spec = 4,
};

struct ExperimentSpec {
    std::string name;
    nlohmann::json manifold;  // catalog call text, {"catalog", "params"} or an inline metric
    std::optional<std::string> density;
    std::optional<std::string> potential;
    std::string task;
    nlohmann::json args = nlohmann::json::object();
    std::string output_path;  // empty: standard output
    std::string format = "csv";
    std::uint64_t seed = 20240611;
    nlohmann::json tolerances = nlohmann::json::object();
    std::optional<std::string> expect;  // pass, fail or hypothesis-unmet
};

/// Validates field by field; SchemaError carries a JSON-pointer path.
ExperimentSpec parse_spec(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);

const std::vector<std::string>& task_names();
/// Settings with the spec's seed and tolerance overrides applied.
Settings spec_settings(const ExperimentSpec& spec);
Chart build_manifold(const ExperimentSpec& spec);

struct RunResult {
    int exit_code = exit_pass;
    std::string status = "pass";  // pass, fail, hypothesis-unmet, error
    std::string csv;
    std::vector<std::string> summary;
    std::vector<std::string> log;
};

/// Runs the task. Library errors become exit code 3 with the originating module in the summary.
RunResult run_experiment(const ExperimentSpec& spec);
/// CSV text, or an aligned table for format "pretty-table".
std::string render(const RunResult& result, const std::string& format);

struct BundleEntry {
    std::string name;
    std::string description;
    std::string expected;  // pass, fail or hypothesis-unmet
    nlohmann::json spec;
};
const std::vector<BundleEntry>& reproduction_bundle();

/// Constant expressions such as "pi/2" or plain numbers.
double spec_number(const nlohmann::json& j, const std::string& path);

} // namespace wgeom
