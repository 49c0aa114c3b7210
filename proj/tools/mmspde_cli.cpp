#include "mmspde/errors.hpp"
#include "mmspde/runner.hpp"
#include "mmspde/serialization.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <string>

namespace {

constexpr int kUsage = 4;

int export_basis(const std::string& spec, const std::string& file) {
    mmspde::SpaceConfig s;
    const auto p1 = spec.find(':');
    const std::string kind = spec.substr(0, p1);
    try {
        if (kind == "interval") {
            const auto p2 = spec.find(':', p1 + 1);
            if (p1 == std::string::npos) throw std::invalid_argument("missing n_modes");
            s.n_modes = std::stoi(spec.substr(p1 + 1, p2 - p1 - 1));
            s.n_nodes = p2 == std::string::npos ? 4 * s.n_modes : std::stoi(spec.substr(p2 + 1));
        } else if (kind == "gasket") {
            s.kind = mmspde::SpaceKind::Gasket;
            if (p1 != std::string::npos) s.level = std::stoi(spec.substr(p1 + 1));
        } else {
            throw std::invalid_argument("unknown space '" + kind + "'");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: bad basis spec '" << spec << "' (" << e.what()
                  << "); use interval:<n_modes>[:<n_nodes>] or gasket:<level>\n";
        return kUsage;
    }
    const auto basis = mmspde::build_basis(s);
    mmspde::write_basis_json(file, *basis);
    std::cout << "wrote " << file << " (" << basis->n_modes() << " modes, " << basis->n_nodes() << " nodes)\n";
    return 0;
}

int run_command(const std::string& config_path, const std::string& scenario, const std::optional<std::uint64_t>& seed,
                const std::string& out, int threads) {
    mmspde::RunConfig cfg;
    if (!scenario.empty()) {
        if (!config_path.empty()) {
            std::cerr << "error: give either a config file or --scenario, not both\n";
            return kUsage;
        }
        if (!mmspde::has_scenario(scenario)) {
            std::cerr << "error: unknown scenario '" << scenario << "'; see list-scenarios\n";
            return kUsage;
        }
        cfg = mmspde::scenario_config(scenario);
    } else if (!config_path.empty()) {
        cfg = mmspde::load_config(config_path);
    } else {
        std::cerr << "error: run needs a config file or --scenario\n";
        return kUsage;
    }
    mmspde::RunOptions opts;
    opts.seed = seed;
    if (!out.empty()) opts.output_dir = out;
    opts.threads = threads;

    const mmspde::RunResult r = mmspde::run(cfg, opts);
    if (r.exit_code == 2) {
        std::cerr << r.message << '\n';
        return r.exit_code;
    }
    std::cout << std::setprecision(6);
    for (const auto& p : r.paths) {
        std::cout << "path " << p.index << ": " << (p.converged ? "converged" : "NOT converged") << " in "
                  << p.iterations << " iterations, ratio " << p.contraction_ratio << ", gamma_hat "
                  << p.report.holder_slope << '\n';
    }
    if (!r.paths.empty()) std::cout << "median gamma_hat " << r.median_gamma_hat << '\n';
    for (const auto& c : r.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.value << " (threshold " << c.threshold
                  << ")\n";
    }
    if (!r.directory.empty()) std::cout << "artifacts in " << r.directory << '\n';
    if (!r.message.empty()) std::cerr << r.message;
    if (r.exit_code != 0) return r.exit_code;
    return r.all_checks_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mild solutions of fractional-noise SPDEs on the interval and the Sierpinski gasket"};
    app.require_subcommand(1);

    std::string config_path, scenario, out;
    std::uint64_t seed_value = 0;
    int threads = 1;
    auto* run = app.add_subcommand("run", "run a config file or a built-in scenario");
    run->add_option("config", config_path, "JSON config")->check(CLI::ExistingFile);
    run->add_option("--scenario", scenario, "built-in scenario name");
    auto* seed_opt = run->add_option("--seed", seed_value, "master seed override");
    run->add_option("--out", out, "output directory override");
    run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand("list-scenarios", "list the built-in scenarios");

    std::string basis_spec, basis_file;
    auto* exp = app.add_subcommand("export-basis", "write a basis as JSON");
    exp->add_option("space", basis_spec, "interval:<n_modes>[:<n_nodes>] or gasket:<level>")->required();
    exp->add_option("file", basis_file, "output JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*list) {
            for (const auto& s : mmspde::list_scenarios()) std::cout << s.name << "\t" << s.description << '\n';
            return 0;
        }
        if (*exp) return export_basis(basis_spec, basis_file);
        std::optional<std::uint64_t> seed;
        if (*seed_opt) seed = seed_value;
        return run_command(config_path, scenario, seed, out, threads);
    } catch (const mmspde::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const mmspde::AdmissibilityError& e) {
        std::cerr << "inadmissible: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
