#include "mmspde/spectral_space.hpp"

#include "mmspde/errors.hpp"
#include "mmspde/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numbers>

namespace mmspde {

std::string to_string(SpaceKind kind) {
    return kind == SpaceKind::Interval ? "interval" : "gasket";
}

Eigen::VectorXd SpectralBasis::synthesize(const Eigen::VectorXd& coeffs) const {
    return eigenvectors * coeffs;
}

Eigen::VectorXd SpectralBasis::analyze(const Eigen::VectorXd& nodal) const {
    return eigenvectors.transpose() * weights.cwiseProduct(nodal);
}

double SpectralBasis::distance(int i, int j) const {
    return (nodes.row(i) - nodes.row(j)).norm();
}

std::uint64_t SpectralBasis::id() const {
    // FNV-1a over kind, sizes and the spectrum.
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    const int k = kind == SpaceKind::Interval ? 0 : 1;
    const int nm = n_modes();
    const int nn = n_nodes();
    feed(&k, sizeof k);
    feed(&level_or_nmodes, sizeof level_or_nmodes);
    feed(&nm, sizeof nm);
    feed(&nn, sizeof nn);
    feed(eigenvalues.data(), sizeof(double) * static_cast<std::size_t>(nm));
    return h;
}

BasisPtr build_interval_basis(int n_modes, int n_nodes) {
    if (n_modes < 1) throw std::invalid_argument("build_interval_basis: n_modes must be >= 1");
    if (n_nodes < 4 * n_modes) {
        throw AliasingError("build_interval_basis: n_nodes=" + std::to_string(n_nodes) +
                            " cannot resolve " + std::to_string(n_modes) +
                            " modes (need n_nodes >= 4 n_modes)");
    }
    auto b = std::make_shared<SpectralBasis>();
    b->kind = SpaceKind::Interval;
    b->level_or_nmodes = n_modes;
    const double h = 1.0 / (n_nodes - 1);
    b->nodes.resize(n_nodes, 1);
    b->weights.resize(n_nodes);
    for (int j = 0; j < n_nodes; ++j) {
        b->nodes(j, 0) = j * h;
        b->weights(j) = (j == 0 || j == n_nodes - 1) ? 0.5 * h : h;
    }
    b->eigenvalues.resize(n_modes);
    b->eigenvectors.resize(n_nodes, n_modes);
    const double pi = std::numbers::pi;
    for (int i = 0; i < n_modes; ++i) {
        const int k = i + 1;
        b->eigenvalues(i) = (k * pi) * (k * pi);
        for (int j = 0; j < n_nodes; ++j) {
            // sin(k pi j / M) with the exact zeros at both ends
            const bool end = (j == 0 || j == n_nodes - 1);
            b->eigenvectors(j, i) = end ? 0.0 : std::sqrt(2.0) * std::sin(k * pi * j * h);
        }
    }
    b->hausdorff_dim = 1.0;
    b->walk_dim = 2.0;
    b->spectral_dim = 2.0 * b->hausdorff_dim / b->walk_dim;
    b->metric_convention = "euclidean";
    return b;
}

int gasket_vertex_count(int level) {
    int p = 1;
    for (int i = 0; i < level; ++i) p *= 3;
    return 3 * (p + 1) / 2;
}

namespace {

struct GasketGraph {
    std::vector<std::array<double, 2>> coords;
    std::vector<std::array<int, 2>> edges;
};

GasketGraph gasket_graph(int level) {
    const int scale = 1 << level;
    std::map<long, int> index;
    GasketGraph g;
    auto vertex = [&](int a, int b) {
        const long key = static_cast<long>(a) * (scale + 1) + b;
        auto [it, inserted] = index.try_emplace(key, static_cast<int>(g.coords.size()));
        if (inserted) {
            const double x = (a + 0.5 * b) / scale;
            const double y = (std::sqrt(3.0) / 2.0) * b / scale;
            g.coords.push_back({x, y});
        }
        return it->second;
    };
    using Tri = std::array<std::array<int, 2>, 3>;
    std::vector<Tri> cells{{{{0, 0}, {scale, 0}, {0, scale}}}};
    for (const auto& v : cells.front()) vertex(v[0], v[1]);
    for (int l = 0; l < level; ++l) {
        std::vector<Tri> next;
        next.reserve(cells.size() * 3);
        for (const auto& t : cells) {
            auto mid = [](const std::array<int, 2>& p, const std::array<int, 2>& q) {
                return std::array<int, 2>{(p[0] + q[0]) / 2, (p[1] + q[1]) / 2};
            };
            const auto ab = mid(t[0], t[1]);
            const auto bc = mid(t[1], t[2]);
            const auto ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({ab, t[1], bc});
            next.push_back({ca, bc, t[2]});
        }
        cells = std::move(next);
    }
    for (const auto& t : cells) {
        const int a = vertex(t[0][0], t[0][1]);
        const int b = vertex(t[1][0], t[1][1]);
        const int c = vertex(t[2][0], t[2][1]);
        g.edges.push_back({a, b});
        g.edges.push_back({b, c});
        g.edges.push_back({c, a});
    }
    return g;
}

}  // namespace

BasisPtr build_gasket_basis(int level) {
    if (level < 0) throw std::invalid_argument("build_gasket_basis: level must be >= 0");
    if (level > 6) {
        throw ResourceLimitError("build_gasket_basis: level " + std::to_string(level) +
                                 " exceeds the dense eigensolve limit (6)");
    }
    const GasketGraph g = gasket_graph(level);
    const int n = static_cast<int>(g.coords.size());

    const double renorm = std::pow(5.0, level);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges) {
        L(e[0], e[1]) -= renorm;
        L(e[1], e[0]) -= renorm;
        L(e[0], e[0]) += renorm;
        L(e[1], e[1]) += renorm;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("build_gasket_basis: eigen decomposition failed");
    }

    auto b = std::make_shared<SpectralBasis>();
    b->kind = SpaceKind::Gasket;
    b->level_or_nmodes = level;
    b->generator = L;
    b->eigenvalues = solver.eigenvalues();
    // The zero eigenvalue comes out at round-off level; pin it.
    for (int i = 0; i < n; ++i) {
        if (std::abs(b->eigenvalues(i)) < 1e-10 * renorm) b->eigenvalues(i) = 0.0;
    }
    // Counting measure normalised to mu(X) = 1; e_i = sqrt(n) v_i is mu-orthonormal.
    b->weights = Eigen::VectorXd::Constant(n, 1.0 / n);
    b->eigenvectors = solver.eigenvectors() * std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        b->eigenvectors.col(i).cwiseAbs().maxCoeff(&arg);
        if (b->eigenvectors(arg, i) < 0.0) b->eigenvectors.col(i) *= -1.0;
    }
    b->nodes.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        b->nodes(i, 0) = g.coords[i][0];
        b->nodes(i, 1) = g.coords[i][1];
    }
    // Euclidean-metric convention: d_H = log 3 / log 2, d_W = log 5 / log 2,
    // so that d_S = 2 log 3 / log 5.
    b->hausdorff_dim = std::log(3.0) / std::log(2.0);
    b->walk_dim = std::log(5.0) / std::log(2.0);
    b->spectral_dim = 2.0 * b->hausdorff_dim / b->walk_dim;
    b->metric_convention = "euclidean (d_H = log3/log2, w = log5/log2)";
    return b;
}

double eigen_residual(const SpectralBasis& basis, int mode) {
    const Eigen::VectorXd e = basis.eigenvectors.col(mode);
    const double lambda = basis.eigenvalues(mode);
    if (basis.kind == SpaceKind::Gasket) {
        return (basis.generator * e - lambda * e).cwiseAbs().maxCoeff();
    }
    const int n = basis.n_nodes();
    const double h = basis.nodes(1, 0) - basis.nodes(0, 0);
    double worst = 0.0;
    for (int j = 1; j + 1 < n; ++j) {
        const double minus_lap = -(e(j + 1) - 2.0 * e(j) + e(j - 1)) / (h * h);
        worst = std::max(worst, std::abs(minus_lap - lambda * e(j)));
    }
    return worst;
}

double orthonormality_defect(const SpectralBasis& basis) {
    const Eigen::MatrixXd gram =
        basis.eigenvectors.transpose() * basis.weights.asDiagonal() * basis.eigenvectors;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(basis.n_modes(), basis.n_modes());
    return (gram - id).cwiseAbs().maxCoeff();
}

WeylFit fit_weyl_law(const SpectralBasis& basis) {
    std::vector<double> logl, logn;
    const int n = basis.n_modes();
    const double scale = std::max(1.0, basis.eigenvalues.cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
        const double lam = basis.eigenvalues(i);
        if (lam <= 0.0) continue;
        // last index of the cluster of (numerically) equal eigenvalues
        int j = i;
        while (j + 1 < n && basis.eigenvalues(j + 1) - lam <= 1e-9 * scale) ++j;
        logl.push_back(std::log(lam));
        logn.push_back(std::log(static_cast<double>(j + 1)));
        i = j;
    }
    const LineFit f = fit_line(logl, logn);
    return {f.slope, 2.0 * f.slope, f.r2};
}

// ---------------------------------------------------------------------------

double SubGaussianProfile::operator()(double s) const {
    return c * std::exp(-kappa * std::pow(s, exponent));
}

HeatKernelModel make_heat_kernel_model(BasisPtr basis, double R0) {
    if (!basis) throw std::invalid_argument("make_heat_kernel_model: null basis");
    if (!(R0 > 0.0)) throw DomainError("make_heat_kernel_model: R0 must be positive");
    HeatKernelModel m;
    const double a = basis->walk_dim / (basis->walk_dim - 1.0);
    m.phi_lower.exponent = a;
    m.phi_upper.exponent = a;
    m.R0 = R0;
    m.basis = std::move(basis);
    return m;
}

bool truncation_ok(const SpectralBasis& basis, double t) {
    if (basis.kind == SpaceKind::Gasket) return true;  // complete finite basis
    return std::exp(-basis.eigenvalues.maxCoeff() * t) < 1e-12;
}

double heat_kernel(const SpectralBasis& basis, double t, int xi, int xj) {
    if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
    double p = 0.0;
    for (int k = 0; k < basis.n_modes(); ++k) {
        p += std::exp(-basis.eigenvalues(k) * t) * basis.eigenvectors(xi, k) *
             basis.eigenvectors(xj, k);
    }
    return p;
}

double heat_kernel(const HeatKernelModel& model, double t, int xi, int xj) {
    return heat_kernel(*model.basis, t, xi, xj);
}

Eigen::VectorXd heat_kernel_row(const SpectralBasis& basis, double t, int xi) {
    if (!(t > 0.0)) throw DomainError("heat_kernel_row: t must be positive");
    Eigen::VectorXd decay(basis.n_modes());
    for (int k = 0; k < basis.n_modes(); ++k) {
        decay(k) = std::exp(-basis.eigenvalues(k) * t) * basis.eigenvectors(xi, k);
    }
    return basis.eigenvectors * decay;
}

namespace {

std::vector<int> default_fit_nodes(const SpectralBasis& basis, int max_nodes) {
    std::vector<int> candidates;
    for (int j = 0; j < basis.n_nodes(); ++j) {
        if (basis.kind == SpaceKind::Interval) {
            // The Dirichlet kernel vanishes at the boundary, so the lower
            // bound is only fitted on the middle half.
            const double x = basis.nodes(j, 0);
            if (x < 0.25 || x > 0.75) continue;
        }
        candidates.push_back(j);
    }
    if (static_cast<int>(candidates.size()) <= max_nodes) return candidates;
    std::vector<int> out;
    const double stride = static_cast<double>(candidates.size() - 1) / (max_nodes - 1);
    for (int k = 0; k < max_nodes; ++k) {
        out.push_back(candidates[static_cast<std::size_t>(std::lround(k * stride))]);
    }
    return out;
}

std::vector<int> default_diagonal_nodes(const SpectralBasis& basis) {
    if (basis.kind == SpaceKind::Gasket) {
        std::vector<int> all(static_cast<std::size_t>(basis.n_nodes()));
        for (int j = 0; j < basis.n_nodes(); ++j) all[static_cast<std::size_t>(j)] = j;
        return all;
    }
    int best = 0;
    for (int j = 0; j < basis.n_nodes(); ++j) {
        if (std::abs(basis.nodes(j, 0) - 0.5) < std::abs(basis.nodes(best, 0) - 0.5)) best = j;
    }
    return {best};
}

}  // namespace

HkeFitReport fit_hke_bounds(const HeatKernelModel& model, std::span<const double> t_grid,
                            double beta, const HkeFitOptions& options) {
    const SpectralBasis& basis = *model.basis;
    HkeFitReport rep;
    rep.beta = beta;
    if (!(beta > 0.0)) throw DomainError("fit_hke_bounds: beta must be positive");
    if (t_grid.size() < 2) throw std::invalid_argument("fit_hke_bounds: need >= 2 times");
    for (double t : t_grid) {
        if (!(t > 0.0) || !(t < model.R0)) {
            throw DomainError("fit_hke_bounds: t_grid must lie in (0, R0)");
        }
        if (!truncation_ok(basis, t)) rep.truncation_warning = true;
    }

    const double dH = basis.hausdorff_dim;
    const double w = basis.walk_dim;
    const double a = w / (w - 1.0);
    rep.phi_lower.exponent = a;
    rep.phi_upper.exponent = a;

    // On-diagonal scaling.
    const std::vector<int> diag =
        options.diagonal_nodes.empty() ? default_diagonal_nodes(basis) : options.diagonal_nodes;
    std::vector<double> logt, logp;
    for (double t : t_grid) {
        double num = 0.0, den = 0.0;
        for (int j : diag) {
            num += basis.weights(j) * heat_kernel(basis, t, j, j);
            den += basis.weights(j);
        }
        logt.push_back(std::log(t));
        logp.push_back(std::log(num / den));
    }
    const LineFit diag_fit = fit_line(logt, logp);
    rep.diagonal_slope = diag_fit.slope;
    rep.diagonal_r2 = diag_fit.r2;
    {
        // p_t = C t^{-d_S/2}: C as the geometric mean of p t^{d_S/2}.
        double acc = 0.0;
        for (std::size_t k = 0; k < logt.size(); ++k) {
            acc += logp[k] + 0.5 * basis.spectral_dim * logt[k];
        }
        rep.pt_constant = std::exp(acc / static_cast<double>(logt.size()));
    }

    // Sample (s, R) with s = t^{-1/w} d(x,y), R = t^{d_H/w} p(t,x,y).
    const std::vector<int> nodes =
        options.fit_nodes.empty() ? default_fit_nodes(basis, options.max_fit_nodes)
                                  : options.fit_nodes;
    std::vector<double> svals, rvals;
    for (double t : t_grid) {
        const double tscale = std::pow(t, dH / w);
        for (int i : nodes) {
            const Eigen::VectorXd row = heat_kernel_row(basis, t, i);
            for (int j : nodes) {
                svals.push_back(std::pow(t, -1.0 / w) * basis.distance(i, j));
                rvals.push_back(tscale * row(j));
            }
        }
    }
    for (double r : rvals) {
        if (!(r > 0.0)) {
            rep.success = false;
            rep.message = "kernel not positive on the fit nodes; no lower profile exists";
            return rep;
        }
    }

    // kappa scanned on a log grid; c is then the tightest admissible constant.
    // Upper: minimise c * kappa^{-d_H/a} (mass of the profile); lower: maximise it.
    std::vector<double> kappas;
    for (int k = 0; k <= 120; ++k) kappas.push_back(std::pow(10.0, -4.0 + 7.0 * k / 120.0));
    auto upper_c = [&](double kappa) {
        double c = 0.0;
        for (std::size_t k = 0; k < svals.size(); ++k) {
            c = std::max(c, rvals[k] * std::exp(kappa * std::pow(svals[k], a)));
        }
        return c;
    };
    auto lower_c = [&](double kappa) {
        double c = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < svals.size(); ++k) {
            c = std::min(c, rvals[k] * std::exp(kappa * std::pow(svals[k], a)));
        }
        return c;
    };
    double best_upper = std::numeric_limits<double>::infinity();
    for (double kappa : kappas) {
        const double c = upper_c(kappa);
        const double mass = c * std::pow(kappa, -dH / a);
        if (std::isfinite(c) && mass < best_upper) {
            best_upper = mass;
            rep.phi_upper.c = c;
            rep.phi_upper.kappa = kappa;
        }
    }
    double best_lower = 0.0;
    for (double kappa : kappas) {
        if (kappa < rep.phi_upper.kappa) continue;  // keeps Phi_lower <= Phi_upper for all s
        const double c = std::min(lower_c(kappa), rep.phi_upper.c);
        const double mass = c * std::pow(kappa, -dH / a);
        if (std::isfinite(c) && c > 0.0 && mass > best_lower) {
            best_lower = mass;
            rep.phi_lower.c = c;
            rep.phi_lower.kappa = kappa;
        }
    }
    if (!(rep.phi_upper.c > 0.0) || !std::isfinite(rep.phi_upper.c) || !(rep.phi_lower.c > 0.0)) {
        rep.success = false;
        rep.message = "no sub-Gaussian sandwich found on the grid";
        return rep;
    }
    rep.phi_upper.c *= 1.0 + 1e-12;
    rep.phi_lower.c *= 1.0 - 1e-12;

    for (std::size_t k = 0; k < svals.size(); ++k) {
        const double r = rvals[k];
        const double over = std::max(0.0, r - rep.phi_upper(svals[k])) / r;
        const double under = std::max(0.0, rep.phi_lower(svals[k]) - r) / r;
        rep.max_violation = std::max({rep.max_violation, over, under});
    }

    // int_0^inf s^{p-1} c exp(-kappa s^a) ds = c Gamma(p/a) / (a kappa^{p/a})
    const double p = dH + beta * w / 2.0;
    rep.integrability_integral = rep.phi_upper.c * std::tgamma(p / a) /
                                 (a * std::pow(rep.phi_upper.kappa, p / a));
    rep.integrable = std::isfinite(rep.integrability_integral);
    rep.success = rep.max_violation == 0.0 && rep.integrable;
    rep.message = rep.success ? "ok" : "sandwich violated or integral not finite";
    return rep;
}

HeatKernelModel with_fit(HeatKernelModel model, const HkeFitReport& report) {
    model.phi_lower = report.phi_lower;
    model.phi_upper = report.phi_upper;
    model.pt_constant = report.pt_constant;
    return model;
}

}  // namespace mmspde
