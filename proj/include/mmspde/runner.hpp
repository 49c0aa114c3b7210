#pragma once

// Batch driver: config parsing, the basis -> noise -> solve -> analyze pipeline,
// seeds, artifacts and the named scenarios.

#include "mmspde/mild_solver.hpp"
#include "mmspde/noise.hpp"
#include "mmspde/regularity.hpp"
#include "mmspde/serialization.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmspde {

// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct SpaceConfig {
    SpaceKind kind = SpaceKind::Interval;
    int n_modes = 16;
    int n_nodes = 64;
    int level = 2;
};

struct NoiseConfig {
    bool enabled = true;
    SeriesNoiseSpec spec;
    int n_paths = 1;
    std::uint64_t master_seed = 1;
};

struct ChecksConfig {
    std::optional<double> gamma_target;  // median gamma_hat >= gamma_target - margin
    bool gamma_target_theory = false;    // use the gamma bound of the admissible case instead
    double margin = 0.05;
    double min_geometric_fraction = 0.95;
    bool refinement_check = false;       // uniform bound at 2 N_time within refinement_tolerance
    double refinement_tolerance = 0.2;
    double oracle_tolerance = 1e-6;
    std::optional<std::pair<double, double>> alternate;  // (gamma', delta') for the uniqueness check
};

struct RunConfig {
    std::string scenario;
    SpaceConfig space;
    ParamSet params;
    bool d_S_from_basis = true;
    NoiseConfig noise;
    Nonlinearity nonlinearity;
    std::vector<std::pair<int, double>> initial_modes = {{0, 1.0}};
    SolverOptions solver;
    std::string output_dir = "mmspde_out";
    bool write_noise = false;
    bool write_solutions = true;
    ChecksConfig checks;
};

RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);
json config_to_json(const RunConfig& c);

struct ScenarioInfo {
    std::string name;
    std::string description;
};

// Fixed order.
std::vector<ScenarioInfo> list_scenarios();
bool has_scenario(const std::string& name);
// Built-in configuration of a named scenario; throws ConfigError for unknown names.
RunConfig scenario_config(const std::string& name);

BasisPtr build_basis(const SpaceConfig& s);

struct PathSummary {
    int index = 0;
    std::uint64_t seed = 0;
    bool converged = false;
    int iterations = 0;
    double contraction_ratio = 0.0;
    bool geometric = false;
    RegularityReport report;
    double uniform_bound_refined = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
};

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct RunResult {
    int exit_code = 0;
    std::string message;
    std::string directory;
    std::vector<PathSummary> paths;
    std::vector<CheckResult> checks;
    std::vector<std::string> artifacts;  // relative to directory
    double median_gamma_hat = std::numeric_limits<double>::quiet_NaN();

    bool all_checks_passed() const;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;       // overrides noise.master_seed
    std::optional<std::string> output_dir;   // overrides outputs.directory
    int threads = 1;
    bool write_artifacts = true;
};

// Exit codes: 0 ok, 2 inadmissible parameters, 3 non-convergence.
RunResult run(const RunConfig& config, const RunOptions& options = {});

}  // namespace mmspde
