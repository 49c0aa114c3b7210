#include "mmspde/serialization.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mmspde {

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string hex_id(std::uint64_t id) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << id;
    return os.str();
}

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

json basis_to_json(const SpectralBasis& b) {
    json j;
    j["kind"] = to_string(b.kind);
    j["level_or_nmodes"] = b.level_or_nmodes;
    j["n_modes"] = b.n_modes();
    j["n_nodes"] = b.n_nodes();
    j["hausdorff_dim"] = b.hausdorff_dim;
    j["walk_dim"] = b.walk_dim;
    j["spectral_dim"] = b.spectral_dim;
    j["metric_convention"] = b.metric_convention;
    j["eigenvalues"] = vector_to_json(b.eigenvalues);
    j["weights"] = vector_to_json(b.weights);
    j["nodes"] = matrix_to_json(b.nodes);
    j["eigenvectors"] = matrix_to_json(b.eigenvectors);
    if (b.generator.size() > 0) j["generator"] = matrix_to_json(b.generator);
    j["id"] = hex_id(b.id());
    return j;
}

BasisPtr basis_from_json(const json& j) {
    auto b = std::make_shared<SpectralBasis>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "interval") {
        b->kind = SpaceKind::Interval;
    } else if (kind == "gasket") {
        b->kind = SpaceKind::Gasket;
    } else {
        throw std::invalid_argument("basis_from_json: unknown kind '" + kind + "'");
    }
    b->level_or_nmodes = j.at("level_or_nmodes").get<int>();
    b->hausdorff_dim = j.at("hausdorff_dim").get<double>();
    b->walk_dim = j.at("walk_dim").get<double>();
    b->spectral_dim = j.at("spectral_dim").get<double>();
    b->metric_convention = j.at("metric_convention").get<std::string>();
    b->eigenvalues = vector_from_json(j.at("eigenvalues"));
    b->weights = vector_from_json(j.at("weights"));
    b->nodes = matrix_from_json(j.at("nodes"));
    b->eigenvectors = matrix_from_json(j.at("eigenvectors"));
    if (j.contains("generator")) b->generator = matrix_from_json(j.at("generator"));
    if (j.contains("id") && j["id"].get<std::string>() != hex_id(b->id())) {
        throw std::runtime_error("basis_from_json: id mismatch after import");
    }
    return b;
}

void write_basis_json(const std::string& path, const SpectralBasis& basis) {
    write_json(path, basis_to_json(basis));
}

json field_to_json(const Field& f) {
    return {{"basis_id", hex_id(f.basis().id())}, {"coeffs", vector_to_json(f.coeffs())}};
}

Field field_from_json(const json& j, BasisPtr basis) {
    if (j.at("basis_id").get<std::string>() != hex_id(basis->id())) {
        throw std::invalid_argument("field_from_json: field belongs to a different basis");
    }
    return Field(std::move(basis), vector_from_json(j.at("coeffs")));
}

json params_to_json(const ParamSet& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta},   {"gamma", p.gamma}, {"delta", p.delta},
            {"d_S", p.d_S},     {"w", p.w},         {"q", p.q},         {"hurst", p.hurst},
            {"theta", p.theta}, {"t0", p.t0},       {"epsilon", p.epsilon}};
}

json noise_spec_to_json(const SeriesNoiseSpec& s) {
    return {{"c_q", s.c_q}, {"rho", s.rho}, {"beta_star", s.beta_star}, {"a1", s.a1},
            {"a2", s.a2},   {"b", s.b},     {"n_terms", s.n_terms},     {"hurst", s.hurst}};
}

void write_noise(const std::string& csv_path, const NoisePath& z) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open " + csv_path);
    out << std::setprecision(17);
    out << 't';
    for (int i = 1; i <= z.basis->n_modes(); ++i) out << ",coeff_" << i;
    out << '\n';
    for (std::size_t k = 0; k < z.times.size(); ++k) {
        out << z.times[k];
        const Eigen::VectorXd& c = z.fields[k].coeffs();
        for (Eigen::Index i = 0; i < c.size(); ++i) out << ',' << c(i);
        out << '\n';
    }
    json side = {{"spec", noise_spec_to_json(z.spec)},
                 {"seed", z.seed},
                 {"basis_id", hex_id(z.basis->id())},
                 {"n_modes", z.basis->n_modes()},
                 {"n_steps", z.n_steps()}};
    write_json(csv_path + ".json", side);
}

NoisePath read_noise(const std::string& csv_path, BasisPtr basis) {
    const json side = read_json(csv_path + ".json");
    if (side.at("basis_id").get<std::string>() != hex_id(basis->id())) {
        throw std::invalid_argument("read_noise: noise belongs to a different basis");
    }
    const auto rows = read_csv_rows(csv_path);
    const int m = basis->n_modes();
    std::vector<double> times;
    Eigen::MatrixXd c(static_cast<Eigen::Index>(rows.size()), m);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (static_cast<int>(rows[k].size()) != m + 1) throw std::runtime_error("read_noise: bad row width");
        times.push_back(rows[k][0]);
        for (int i = 0; i < m; ++i) c(static_cast<Eigen::Index>(k), i) = rows[k][i + 1];
    }
    NoisePath z = NoisePath::from_coefficients(std::move(basis), std::move(times), c);
    const json& s = side.at("spec");
    z.spec.c_q = s.at("c_q");
    z.spec.rho = s.at("rho");
    z.spec.beta_star = s.at("beta_star");
    z.spec.a1 = s.at("a1");
    z.spec.a2 = s.at("a2");
    z.spec.b = s.at("b");
    z.spec.n_terms = s.at("n_terms");
    z.spec.hurst = s.at("hurst");
    z.seed = side.at("seed").get<std::uint64_t>();
    return z;
}

void write_solution_csv(const std::string& path, const MildSolution& u) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << std::setprecision(17);
    out << 't';
    for (int i = 1; i <= u.n_modes; ++i) out << ",coeff_" << i;
    out << '\n';
    for (std::size_t k = 0; k < u.path.times.size(); ++k) {
        out << u.path.times[k];
        const Eigen::VectorXd& c = u.path.values[k].coeffs();
        for (Eigen::Index i = 0; i < c.size(); ++i) out << ',' << c(i);
        out << '\n';
    }
}

json solution_manifest(const MildSolution& u) {
    return {{"params", params_to_json(u.params)},
            {"grids", {{"N_time", u.N_time}, {"n_modes", u.n_modes}, {"n_nodes", u.n_nodes}}},
            {"picard_iterations", u.picard_iterations},
            {"contraction_history", u.contraction_history},
            {"contraction_ratio", u.contraction_ratio()},
            {"converged", u.converged},
            {"windows", u.windows},
            {"eta", u.eta},
            {"theta", u.theta},
            {"integral_route", to_string(u.route)},
            {"initial_condition_norm", u.initial_norm},
            {"wall_seconds", u.wall_seconds},
            {"message", u.message}};
}

json lemma_to_json(const LemmaConstants& l) {
    return {{"drift", l.drift},   {"epsilon", l.epsilon}, {"stochastic", l.stochastic},
            {"nu", l.nu},         {"w_norm", l.w_norm},   {"pairs", l.pairs}};
}

json regularity_to_json(const RegularityReport& r) {
    return {{"holder_slope", r.holder_slope},
            {"holder_band", {r.holder_lo, r.holder_hi}},
            {"holder_r2", r.holder_r2},
            {"holder_defined", r.holder_defined},
            {"wgamma_seminorm", r.wgamma},
            {"wgamma_diverging", r.wgamma_diverging},
            {"uniform_bound", r.uniform_bound},
            {"lemma_constants", lemma_to_json(r.lemmas)},
            {"params", params_to_json(r.params)},
            {"dual_norm", r.q2_proxy ? "q=2 spectral proxy" : "exact"}};
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

}  // namespace mmspde
