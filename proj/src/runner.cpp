#include "mmspde/runner.hpp"

#include "mmspde/errors.hpp"
#include "mmspde/numerics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace mmspde {

namespace {

// Field-path aware reader over one JSON object.
class Reader {
public:
    Reader(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        for (const auto& [key, value] : j_.items()) {
            (void)value;
            if (!allowed.count(key)) throw ConfigError(child(key), "unknown field");
        }
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }
    const json& at(const std::string& key) const { return j_.at(key); }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        if (!j_[key].is_number()) throw ConfigError(child(key), "expected a number");
        const double v = j_[key].get<double>();
        if (!std::isfinite(v)) throw ConfigError(child(key), "must be finite");
        return v;
    }
    int integer(const std::string& key, int fallback, int lo = std::numeric_limits<int>::min()) const {
        if (!has(key)) return fallback;
        if (!j_[key].is_number_integer()) throw ConfigError(child(key), "expected an integer");
        const int v = j_[key].get<int>();
        if (v < lo) throw ConfigError(child(key), "must be >= " + std::to_string(lo));
        return v;
    }
    std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        if (!j_[key].is_number_unsigned() && !(j_[key].is_number_integer() && j_[key].get<long long>() >= 0)) {
            throw ConfigError(child(key), "expected a non-negative integer");
        }
        return j_[key].get<std::uint64_t>();
    }
    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        if (!j_[key].is_boolean()) throw ConfigError(child(key), "expected true or false");
        return j_[key].get<bool>();
    }
    std::string string(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        if (!j_[key].is_string()) throw ConfigError(child(key), "expected a string");
        return j_[key].get<std::string>();
    }

private:
    const json& j_;
    std::string path_;
};

ScalarMap parse_map(const json& j, const std::string& path) {
    Reader r(j, path, {"kind", "slope", "scale"});
    ScalarMap m;
    try {
        m.kind = nonlinearity_kind_from_string(r.string("kind", "zero"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(r.child("kind"), e.what());
    }
    m.slope = r.number("slope", m.kind == NonlinearityKind::Zero ? 0.0 : 1.0);
    m.scale = r.number("scale", 1.0);
    if (!(m.scale > 0.0)) throw ConfigError(r.child("scale"), "must be positive");
    return m;
}

json map_to_json(const ScalarMap& m) {
    return {{"kind", to_string(m.kind)}, {"slope", m.slope}, {"scale", m.scale}};
}

}  // namespace

RunConfig parse_config(const json& j) {
    RunConfig c;
    Reader root(j, "", {"scenario", "space", "params", "noise", "nonlinearity", "initial_condition", "solver",
                        "outputs", "checks"});
    c.scenario = root.string("scenario", "");

    if (root.has("space")) {
        Reader s(root.at("space"), "space", {"kind", "n_modes", "n_nodes", "level"});
        const std::string kind = s.string("kind", "interval");
        if (kind == "interval") {
            c.space.kind = SpaceKind::Interval;
        } else if (kind == "gasket") {
            c.space.kind = SpaceKind::Gasket;
        } else {
            throw ConfigError("space.kind", "expected 'interval' or 'gasket'");
        }
        c.space.n_modes = s.integer("n_modes", c.space.n_modes, 1);
        c.space.n_nodes = s.integer("n_nodes", 4 * c.space.n_modes, 3);
        c.space.level = s.integer("level", c.space.level, 0);
        if (c.space.kind == SpaceKind::Interval && c.space.n_nodes < 4 * c.space.n_modes) {
            throw ConfigError("space.n_nodes", "must be at least 4 * n_modes");
        }
        if (c.space.kind == SpaceKind::Gasket && c.space.level > 6) {
            throw ConfigError("space.level", "levels above 6 are not supported");
        }
    }

    if (root.has("params")) {
        Reader p(root.at("params"), "params",
                 {"alpha", "beta", "gamma", "delta", "d_S", "q", "hurst", "theta", "t0", "epsilon"});
        ParamSet& q = c.params;
        q.alpha = p.number("alpha", q.alpha);
        q.beta = p.number("beta", q.beta);
        q.gamma = p.number("gamma", q.gamma);
        q.delta = p.number("delta", q.delta);
        c.d_S_from_basis = !p.has("d_S");
        q.d_S = p.number("d_S", q.d_S);
        q.q = p.number("q", q.q);
        q.hurst = p.number("hurst", q.hurst);
        q.theta = p.number("theta", q.theta);
        q.t0 = p.number("t0", q.t0);
        q.epsilon = p.number("epsilon", q.epsilon);
        if (!(q.t0 > 0.0)) throw ConfigError("params.t0", "must be positive");
        if (!(q.theta > 0.0 && q.theta <= 1.0)) throw ConfigError("params.theta", "must be in (0, 1]");
        if (!(q.hurst > 0.0 && q.hurst < 1.0)) throw ConfigError("params.hurst", "must be in (0, 1)");
    }

    if (root.has("noise")) {
        Reader n(root.at("noise"), "noise",
                 {"enabled", "c_q", "rho", "beta_star", "a1", "a2", "b", "n_terms", "hurst", "n_paths",
                  "master_seed"});
        SeriesNoiseSpec& s = c.noise.spec;
        c.noise.enabled = n.boolean("enabled", true);
        s.c_q = n.number("c_q", s.c_q);
        s.rho = n.number("rho", s.rho);
        s.beta_star = n.number("beta_star", s.beta_star);
        s.a1 = n.number("a1", s.a1);
        s.a2 = n.number("a2", s.a2);
        s.b = n.number("b", s.b);
        s.n_terms = n.integer("n_terms", s.n_terms, 0);
        s.hurst = n.number("hurst", c.params.hurst);
        if (!(s.hurst > 0.5 && s.hurst < 1.0) && c.noise.enabled) {
            throw ConfigError("noise.hurst", "the solver needs H in (1/2, 1)");
        }
        c.noise.n_paths = n.integer("n_paths", c.noise.n_paths, 1);
        c.noise.master_seed = n.seed("master_seed", c.noise.master_seed);
        c.params.hurst = s.hurst;
    } else {
        c.noise.spec.hurst = c.params.hurst;
    }

    if (root.has("nonlinearity")) {
        Reader n(root.at("nonlinearity"), "nonlinearity", {"F", "G", "G_extra"});
        if (n.has("F")) c.nonlinearity.F = parse_map(n.at("F"), "nonlinearity.F");
        if (n.has("G")) c.nonlinearity.G = parse_map(n.at("G"), "nonlinearity.G");
        if (n.has("G_extra")) {
            const json& arr = n.at("G_extra");
            if (!arr.is_array()) throw ConfigError("nonlinearity.G_extra", "expected an array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                c.nonlinearity.G_extra.push_back(parse_map(arr[i], "nonlinearity.G_extra[" + std::to_string(i) + "]"));
            }
        }
    }

    if (root.has("initial_condition")) {
        Reader ic(root.at("initial_condition"), "initial_condition", {"modes"});
        if (ic.has("modes")) {
            const json& arr = ic.at("modes");
            if (!arr.is_array()) throw ConfigError("initial_condition.modes", "expected an array of [index, amplitude]");
            c.initial_modes.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string path = "initial_condition.modes[" + std::to_string(i) + "]";
                if (!arr[i].is_array() || arr[i].size() != 2 || !arr[i][0].is_number_integer() ||
                    !arr[i][1].is_number()) {
                    throw ConfigError(path, "expected [index, amplitude]");
                }
                c.initial_modes.emplace_back(arr[i][0].get<int>(), arr[i][1].get<double>());
            }
        }
    }

    if (root.has("solver")) {
        Reader s(root.at("solver"), "solver",
                 {"N_time", "tol", "max_iter", "integral_route", "eta", "constant_initialization", "allow_windowing"});
        SolverOptions& o = c.solver;
        o.N_time = s.integer("N_time", o.N_time, 2);
        o.tol = s.number("tol", o.tol);
        if (!(o.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
        o.max_iter = s.integer("max_iter", o.max_iter, 1);
        const std::string route = s.string("integral_route", "definitional");
        if (route == "definitional") {
            o.route = IntegralRoute::Definitional;
        } else if (route == "young") {
            o.route = IntegralRoute::Young;
        } else {
            throw ConfigError("solver.integral_route", "expected 'definitional' or 'young'");
        }
        if (s.has("eta")) o.eta = s.number("eta", 0.0);
        o.constant_initialization = s.boolean("constant_initialization", false);
        o.allow_windowing = s.boolean("allow_windowing", true);
    }
    c.solver.theta = c.params.theta;

    if (root.has("outputs")) {
        Reader o(root.at("outputs"), "outputs", {"directory", "write_noise", "write_solutions"});
        c.output_dir = o.string("directory", c.output_dir);
        c.write_noise = o.boolean("write_noise", c.write_noise);
        c.write_solutions = o.boolean("write_solutions", c.write_solutions);
    }

    if (root.has("checks")) {
        Reader k(root.at("checks"), "checks",
                 {"gamma_target", "margin", "min_geometric_fraction", "refinement_check", "refinement_tolerance",
                  "oracle_tolerance", "alternate"});
        ChecksConfig& ch = c.checks;
        if (k.has("gamma_target")) {
            const json& g = k.at("gamma_target");
            if (g.is_string() && g.get<std::string>() == "theory") {
                ch.gamma_target_theory = true;
            } else if (g.is_number()) {
                ch.gamma_target = g.get<double>();
            } else {
                throw ConfigError("checks.gamma_target", "expected a number or \"theory\"");
            }
        }
        ch.margin = k.number("margin", ch.margin);
        ch.min_geometric_fraction = k.number("min_geometric_fraction", ch.min_geometric_fraction);
        ch.refinement_check = k.boolean("refinement_check", ch.refinement_check);
        ch.refinement_tolerance = k.number("refinement_tolerance", ch.refinement_tolerance);
        ch.oracle_tolerance = k.number("oracle_tolerance", ch.oracle_tolerance);
        if (k.has("alternate")) {
            Reader a(k.at("alternate"), "checks.alternate", {"gamma", "delta"});
            if (!a.has("gamma") || !a.has("delta")) throw ConfigError("checks.alternate", "needs gamma and delta");
            ch.alternate = std::make_pair(a.number("gamma", 0.0), a.number("delta", 0.0));
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    json j;
    try {
        j = read_json(path);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

json config_to_json(const RunConfig& c) {
    json space = {{"kind", to_string(c.space.kind)}};
    if (c.space.kind == SpaceKind::Interval) {
        space["n_modes"] = c.space.n_modes;
        space["n_nodes"] = c.space.n_nodes;
    } else {
        space["level"] = c.space.level;
    }
    json params = params_to_json(c.params);
    if (c.d_S_from_basis) params.erase("d_S");
    params.erase("w");
    json noise = noise_spec_to_json(c.noise.spec);
    noise["enabled"] = c.noise.enabled;
    noise["n_paths"] = c.noise.n_paths;
    noise["master_seed"] = c.noise.master_seed;
    json nl = {{"F", map_to_json(c.nonlinearity.F)}, {"G", map_to_json(c.nonlinearity.G)}};
    if (!c.nonlinearity.G_extra.empty()) {
        json arr = json::array();
        for (const auto& g : c.nonlinearity.G_extra) arr.push_back(map_to_json(g));
        nl["G_extra"] = arr;
    }
    json modes = json::array();
    for (const auto& [i, a] : c.initial_modes) modes.push_back({i, a});
    json solver = {{"N_time", c.solver.N_time},
                   {"tol", c.solver.tol},
                   {"max_iter", c.solver.max_iter},
                   {"integral_route", to_string(c.solver.route)},
                   {"constant_initialization", c.solver.constant_initialization},
                   {"allow_windowing", c.solver.allow_windowing}};
    if (!std::isnan(c.solver.eta)) solver["eta"] = c.solver.eta;
    json checks = {{"margin", c.checks.margin},
                   {"min_geometric_fraction", c.checks.min_geometric_fraction},
                   {"refinement_check", c.checks.refinement_check},
                   {"refinement_tolerance", c.checks.refinement_tolerance},
                   {"oracle_tolerance", c.checks.oracle_tolerance}};
    if (c.checks.gamma_target_theory) {
        checks["gamma_target"] = "theory";
    } else if (c.checks.gamma_target) {
        checks["gamma_target"] = *c.checks.gamma_target;
    }
    if (c.checks.alternate) {
        checks["alternate"] = {{"gamma", c.checks.alternate->first}, {"delta", c.checks.alternate->second}};
    }
    json out = {{"space", space},
                {"params", params},
                {"noise", noise},
                {"nonlinearity", nl},
                {"initial_condition", {{"modes", modes}}},
                {"solver", solver},
                {"outputs",
                 {{"directory", c.output_dir}, {"write_noise", c.write_noise}, {"write_solutions", c.write_solutions}}},
                {"checks", checks}};
    if (!c.scenario.empty()) out["scenario"] = c.scenario;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct ScenarioDef {
    const char* name;
    const char* description;
    const char* config;
};

const ScenarioDef kScenarios[] = {
    {"heat-zero-noise", "F = G = 0: the solution is the heat semigroup applied to f",
     R"({
       "space": {"kind": "interval", "n_modes": 16, "n_nodes": 64},
       "noise": {"enabled": false, "hurst": 0.8},
       "initial_condition": {"modes": [[0, 1.0], [1, 0.5], [4, 0.25]]},
       "solver": {"N_time": 256, "tol": 1e-10},
       "checks": {"oracle_tolerance": 1e-12}
     })"},
    {"linear-mode-oracle", "F linear, G = 0: per-mode closed form exp((k - lambda_i) t)",
     R"({
       "space": {"kind": "interval", "n_modes": 16, "n_nodes": 64},
       "noise": {"enabled": false, "hurst": 0.8},
       "nonlinearity": {"F": {"kind": "linear", "slope": 1.0}},
       "initial_condition": {"modes": [[0, 1.0], [2, 0.3]]},
       "solver": {"N_time": 512, "tol": 1e-12},
       "checks": {"oracle_tolerance": 1e-6}
     })"},
    {"thm34-interval-H08", "interval, H = 0.8 series noise: median time-Hoelder exponent in H^0.45 over 50 seeds",
     R"({
       "space": {"kind": "interval", "n_modes": 16, "n_nodes": 64},
       "params": {"alpha": 0.21, "beta": 0.35, "gamma": 0.3, "delta": 0.45, "t0": 1.0},
       "noise": {"c_q": 1.0, "rho": 1.5, "beta_star": 0.3, "a1": 0.0, "a2": 1.0, "b": 1.0,
                 "hurst": 0.8, "n_paths": 50, "master_seed": 2024},
       "nonlinearity": {"F": {"kind": "smooth-saturating", "slope": 0.5, "scale": 1.0},
                        "G": {"kind": "smooth-saturating", "slope": 1.0, "scale": 1.0}},
       "initial_condition": {"modes": [[0, 1.0], [1, 0.5]]},
       "solver": {"N_time": 256, "tol": 1e-8, "max_iter": 100},
       "checks": {"gamma_target": "theory", "margin": 0.05, "min_geometric_fraction": 0.95,
                  "refinement_check": true, "refinement_tolerance": 0.2}
     })"},
    {"lowdim-white", "interval, flat-spectrum (white in space) noise with beta = delta = 1/2, H = 0.85",
     R"({
       "space": {"kind": "interval", "n_modes": 16, "n_nodes": 64},
       "params": {"alpha": 0.2, "beta": 0.5, "gamma": 0.25, "delta": 0.5, "t0": 1.0},
       "noise": {"c_q": 0.5, "rho": 0.0, "beta_star": 0.5, "a1": 0.0, "a2": 1.0, "b": 1.0,
                 "hurst": 0.85, "n_paths": 50, "master_seed": 3036},
       "nonlinearity": {"F": {"kind": "smooth-saturating", "slope": 0.5, "scale": 1.0},
                        "G": {"kind": "smooth-saturating", "slope": 1.0, "scale": 1.0}},
       "initial_condition": {"modes": [[0, 1.0], [1, 0.5]]},
       "solver": {"N_time": 256, "tol": 1e-8, "max_iter": 100},
       "checks": {"gamma_target": "theory", "margin": 0.05}
     })"},
    {"cor35-uniqueness", "two admissible (gamma, delta) pairs solved from identical noise agree within 10 tol",
     R"({
       "space": {"kind": "interval", "n_modes": 16, "n_nodes": 64},
       "params": {"alpha": 0.21, "beta": 0.35, "gamma": 0.3, "delta": 0.45, "t0": 1.0},
       "noise": {"c_q": 1.0, "rho": 1.5, "beta_star": 0.3, "a1": 0.0, "a2": 1.0, "b": 1.0,
                 "hurst": 0.8, "n_paths": 4, "master_seed": 5050},
       "nonlinearity": {"F": {"kind": "smooth-saturating", "slope": 0.5, "scale": 1.0},
                        "G": {"kind": "smooth-saturating", "slope": 1.0, "scale": 1.0}},
       "initial_condition": {"modes": [[0, 1.0], [1, 0.5]]},
       "solver": {"N_time": 256, "tol": 1e-8, "max_iter": 100},
       "checks": {"alternate": {"gamma": 0.25, "delta": 0.4}}
     })"},
    {"gasket-e2e", "level-2 Sierpinski gasket, full pipeline with series noise",
     R"({
       "space": {"kind": "gasket", "level": 2},
       "params": {"alpha": 0.2, "beta": 0.3, "gamma": 0.25, "delta": 0.4, "t0": 1.0},
       "noise": {"c_q": 1.0, "rho": 2.0, "beta_star": 0.3, "a1": 0.0, "a2": 0.0, "b": 0.0,
                 "hurst": 0.8, "n_paths": 10, "master_seed": 7070},
       "nonlinearity": {"F": {"kind": "smooth-saturating", "slope": 0.5, "scale": 1.0},
                        "G": {"kind": "smooth-saturating", "slope": 1.0, "scale": 1.0}},
       "initial_condition": {"modes": [[0, 0.5], [1, 1.0]]},
       "solver": {"N_time": 256, "tol": 1e-8, "max_iter": 100},
       "checks": {"gamma_target": "theory", "margin": 0.05}
     })"},
};

}  // namespace

std::vector<ScenarioInfo> list_scenarios() {
    std::vector<ScenarioInfo> out;
    for (const auto& s : kScenarios) out.push_back({s.name, s.description});
    return out;
}

bool has_scenario(const std::string& name) {
    for (const auto& s : kScenarios) {
        if (name == s.name) return true;
    }
    return false;
}

RunConfig scenario_config(const std::string& name) {
    for (const auto& s : kScenarios) {
        if (name == s.name) {
            RunConfig c = parse_config(json::parse(s.config));
            c.scenario = name;
            c.output_dir = "mmspde_out/" + name;
            return c;
        }
    }
    throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

BasisPtr build_basis(const SpaceConfig& s) {
    return s.kind == SpaceKind::Interval ? build_interval_basis(s.n_modes, s.n_nodes) : build_gasket_basis(s.level);
}

bool RunResult::all_checks_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

// ---------------------------------------------------------------------------

namespace {

struct PathWork {
    PathSummary summary;
    double oracle_error = 0.0;
    double alternate_diff = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> history;
    std::string error;
    MildSolution solution;
    NoisePath noise;
};

double sup_coeff_diff(const TimePath& a, const TimePath& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        m = std::max(m, (a.values[k].coeffs() - b.values[k].coeffs()).cwiseAbs().maxCoeff());
    }
    return m;
}

void run_path(const RunConfig& c, const BasisPtr& basis, const ParamSet& params, const Field& f, int index,
              std::uint64_t master, PathWork& w) {
    const auto start = std::chrono::steady_clock::now();
    PathSummary& s = w.summary;
    s.index = index;
    s.seed = derive_seed(master, static_cast<std::uint64_t>(index));
    const int N = c.solver.N_time;
    const int N_gen = c.checks.refinement_check ? 2 * N : N;
    w.noise = c.noise.enabled ? gen_series_noise(c.noise.spec, basis, N_gen, params.t0, s.seed)
                              : NoisePath::zero(basis, N_gen, params.t0);
    const std::vector<NoisePath> noise{w.noise};

    w.solution = solve_mild(f, c.nonlinearity, noise, params, c.solver);
    const MildSolution& u = w.solution;
    s.converged = u.converged;
    s.iterations = u.picard_iterations;
    s.contraction_ratio = u.contraction_ratio();
    s.geometric = u.converged && u.geometric();
    w.history = u.contraction_history;

    const NoisePath zN = w.noise.n_steps() == N ? w.noise : subsample(w.noise, w.noise.n_steps() / N);
    s.report = analyze_regularity(u, c.nonlinearity, std::vector<NoisePath>{zN});

    if (c.checks.refinement_check) {
        SolverOptions fine = c.solver;
        fine.N_time = 2 * N;
        const MildSolution u2 = solve_mild(f, c.nonlinearity, noise, params, fine);
        s.uniform_bound_refined = uniform_bound(u2.path, params.delta + 2.0 * params.gamma);
    }

    const Eigen::VectorXd& lam = basis->eigenvalues;
    if (c.scenario == "heat-zero-noise" || c.scenario == "linear-mode-oracle") {
        const double kappa = c.nonlinearity.F.kind == NonlinearityKind::Linear ? c.nonlinearity.F.slope : 0.0;
        for (std::size_t k = 0; k < u.path.times.size(); ++k) {
            const double t = u.path.times[k];
            Eigen::VectorXd exact = f.coeffs();
            for (Eigen::Index i = 0; i < exact.size(); ++i) {
                const double L = params.theta == 1.0 ? lam(i) : std::pow(lam(i), params.theta);
                exact(i) *= std::exp((kappa - L) * t);
            }
            w.oracle_error = std::max(w.oracle_error, (u.path.values[k].coeffs() - exact).cwiseAbs().maxCoeff());
        }
    }
    if (c.checks.alternate) {
        ParamSet alt = params;
        alt.gamma = c.checks.alternate->first;
        alt.delta = c.checks.alternate->second;
        const MildSolution u2 = solve_mild(f, c.nonlinearity, noise, alt, c.solver);
        w.alternate_diff = sup_coeff_diff(u.path, u2.path);
    }
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

RunResult run(const RunConfig& config, const RunOptions& options) {
    RunResult res;
    RunConfig c = config;
    if (options.output_dir) c.output_dir = *options.output_dir;
    const std::uint64_t master = options.seed ? *options.seed : c.noise.master_seed;

    const BasisPtr basis = build_basis(c.space);
    ParamSet params = c.params;
    if (c.d_S_from_basis) params.d_S = basis->spectral_dim;
    params.w = basis->walk_dim;
    c.solver.theta = params.theta;

    // admissibility before any compute
    const double eta = std::isnan(c.solver.eta) ? params.default_eta() : c.solver.eta;
    std::vector<ParamSet> to_check{params};
    if (c.checks.alternate) {
        ParamSet alt = params;
        alt.gamma = c.checks.alternate->first;
        alt.delta = c.checks.alternate->second;
        to_check.push_back(alt);
    }
    for (const ParamSet& p : to_check) {
        const double e = std::isnan(c.solver.eta) ? p.default_eta() : c.solver.eta;
        std::string why;
        if (!p.admissible()) why = p.diagnose();
        else if (c.solver.route == IntegralRoute::Definitional && !p.eta_admissible(e)) why = "eta outside the admissible window";
        if (!why.empty()) {
            const AdmissibleRegion region = admissible_region(p.d_S, p.alpha, p.beta);
            res.exit_code = 2;
            res.message = "inadmissible parameters (gamma=" + fmt(p.gamma) + ", delta=" + fmt(p.delta) + "): " + why +
                          "\nadmissible region: " + region.description;
            return res;
        }
    }
    (void)eta;
    if (c.noise.enabled) {
        const SummabilityReport sr = check_summability(c.noise.spec, *basis);
        if (!sr.ok && !sr.flat_waiver) {
            res.exit_code = 2;
            res.message = "noise coefficients fail the summability check: " + sr.message;
            return res;
        }
    }

    Eigen::VectorXd fc = Eigen::VectorXd::Zero(basis->n_modes());
    for (const auto& [i, a] : c.initial_modes) {
        if (i < 0 || i >= basis->n_modes()) throw ConfigError("initial_condition.modes", "mode index out of range");
        fc(i) += a;
    }
    const Field f(basis, fc);

    const int n_paths = c.noise.n_paths;
    std::vector<PathWork> work(static_cast<std::size_t>(n_paths));
    const int threads = std::max(1, std::min(options.threads, n_paths));
    auto worker = [&](int tid) {
        for (int i = tid; i < n_paths; i += threads) {
            try {
                run_path(c, basis, params, f, i, master, work[i]);
            } catch (const std::exception& e) {
                work[i].error = e.what();
            }
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& t : pool) t.join();
    }

    for (const PathWork& w : work) {
        if (!w.error.empty()) {
            res.exit_code = 3;
            res.message += "path " + std::to_string(w.summary.index) + ": " + w.error + "\n";
        }
        res.paths.push_back(w.summary);
    }

    // aggregate checks
    std::vector<double> gh;
    int geometric = 0, converged = 0;
    double ref_dev = 0.0, oracle = 0.0, alt = 0.0;
    for (const PathWork& w : work) {
        if (w.summary.report.holder_defined) gh.push_back(w.summary.report.holder_slope);
        geometric += w.summary.geometric ? 1 : 0;
        converged += w.summary.converged ? 1 : 0;
        if (c.checks.refinement_check) {
            const double ub = w.summary.report.uniform_bound;
            const double dev = std::abs(w.summary.uniform_bound_refined / ub - 1.0);
            ref_dev = std::max(ref_dev, std::isfinite(dev) ? dev : std::numeric_limits<double>::infinity());
        }
        oracle = std::max(oracle, w.oracle_error);
        if (!std::isnan(w.alternate_diff)) alt = std::max(alt, w.alternate_diff);
    }
    res.median_gamma_hat = median(gh);
    res.checks.push_back({"converged fraction", static_cast<double>(converged) / n_paths, 1.0, converged == n_paths});
    if (c.checks.gamma_target || c.checks.gamma_target_theory) {
        const double target = c.checks.gamma_target_theory
                                  ? (params.admissible_P() ? params.gamma_max_P() : params.gamma_max_lowdim())
                                  : *c.checks.gamma_target;
        const double thr = target - c.checks.margin;
        res.checks.push_back({"median gamma_hat", res.median_gamma_hat, thr, res.median_gamma_hat >= thr});
        res.checks.push_back({"geometric contraction fraction", static_cast<double>(geometric) / n_paths,
                              c.checks.min_geometric_fraction,
                              static_cast<double>(geometric) / n_paths >= c.checks.min_geometric_fraction});
    }
    if (c.checks.refinement_check) {
        res.checks.push_back({"uniform bound refinement deviation", ref_dev, c.checks.refinement_tolerance,
                              ref_dev <= c.checks.refinement_tolerance});
    }
    if (c.scenario == "heat-zero-noise" || c.scenario == "linear-mode-oracle") {
        res.checks.push_back({"closed-form max error", oracle, c.checks.oracle_tolerance, oracle <= c.checks.oracle_tolerance});
    }
    if (c.checks.alternate) {
        const double thr = 10.0 * c.solver.tol;
        res.checks.push_back({"uniqueness max path difference", alt, thr, alt <= thr});
    }
    if (res.exit_code == 0 && converged < n_paths) {
        res.exit_code = 3;
        for (const PathWork& w : work) {
            if (w.summary.converged) continue;
            res.message += "path " + std::to_string(w.summary.index) + " did not converge; history:";
            for (double h : w.history) res.message += " " + fmt(h);
            res.message += "\n";
        }
    }

    if (!options.write_artifacts) return res;

    namespace fs = std::filesystem;
    const fs::path dir(c.output_dir);
    fs::create_directories(dir);
    res.directory = dir.string();

    json paths = json::array();
    for (std::size_t i = 0; i < work.size(); ++i) {
        const PathWork& w = work[i];
        json entry = {{"index", w.summary.index}, {"seed", w.summary.seed}, {"wall_seconds", w.summary.wall_seconds}};
        if (!w.error.empty()) {
            entry["error"] = w.error;
            paths.push_back(entry);
            continue;
        }
        entry["solution"] = solution_manifest(w.solution);
        json files = json::array();
        if (c.write_solutions) {
            const std::string name = "solution_" + std::to_string(i) + ".csv";
            write_solution_csv((dir / name).string(), w.solution);
            files.push_back(name);
            res.artifacts.push_back(name);
        }
        const std::string rname = "regularity_" + std::to_string(i) + ".json";
        write_json((dir / rname).string(), regularity_to_json(w.summary.report));
        files.push_back(rname);
        res.artifacts.push_back(rname);
        if (c.write_noise && c.noise.enabled) {
            const std::string nname = "noise_" + std::to_string(i) + ".csv";
            write_noise((dir / nname).string(), w.noise);
            files.push_back(nname);
            files.push_back(nname + ".json");
            res.artifacts.push_back(nname);
            res.artifacts.push_back(nname + ".json");
        }
        entry["files"] = files;
        paths.push_back(entry);
    }

    {
        std::ofstream out(dir / "summary.csv");
        out << "path,seed,converged,iterations,contraction_ratio,geometric,gamma_hat,gamma_lo,gamma_hi,r2,"
               "wgamma,uniform_bound,uniform_bound_2N,lemma_drift,lemma_epsilon,lemma_stochastic\n";
        for (const PathSummary& s : res.paths) {
            const RegularityReport& r = s.report;
            out << s.index << ',' << s.seed << ',' << (s.converged ? 1 : 0) << ',' << s.iterations << ','
                << fmt(s.contraction_ratio) << ',' << (s.geometric ? 1 : 0) << ',' << fmt(r.holder_slope) << ','
                << fmt(r.holder_lo) << ',' << fmt(r.holder_hi) << ',' << fmt(r.holder_r2) << ',' << fmt(r.wgamma)
                << ',' << fmt(r.uniform_bound) << ',' << fmt(s.uniform_bound_refined) << ',' << fmt(r.lemmas.drift)
                << ',' << fmt(r.lemmas.epsilon) << ',' << fmt(r.lemmas.stochastic) << '\n';
        }
        out << "# median gamma_hat," << fmt(res.median_gamma_hat) << '\n';
        for (const CheckResult& ch : res.checks) {
            out << "# check," << ch.name << ',' << fmt(ch.value) << ',' << fmt(ch.threshold) << ','
                << (ch.passed ? "pass" : "FAIL") << '\n';
        }
    }
    res.artifacts.push_back("summary.csv");

    const AdmissibleRegion region = admissible_region(params.d_S, params.alpha, params.beta);
    write_region_csv((dir / "region.csv").string(), region);
    res.artifacts.push_back("region.csv");

    json checks = json::array();
    for (const CheckResult& ch : res.checks) {
        checks.push_back({{"name", ch.name}, {"value", ch.value}, {"threshold", ch.threshold}, {"passed", ch.passed}});
    }
    json manifest = {{"config", config_to_json(c)},
                     {"master_seed", master},
                     {"basis", {{"kind", to_string(basis->kind)},
                                {"n_modes", basis->n_modes()},
                                {"n_nodes", basis->n_nodes()},
                                {"spectral_dim", basis->spectral_dim},
                                {"walk_dim", basis->walk_dim}}},
                     {"effective_params", params_to_json(params)},
                     {"region", region.description},
                     {"paths", paths},
                     {"median_gamma_hat", res.median_gamma_hat},
                     {"checks", checks},
                     {"exit_code", res.exit_code},
                     {"artifacts", res.artifacts}};
    write_json((dir / "manifest.json").string(), manifest);
    return res;
}

}  // namespace mmspde
