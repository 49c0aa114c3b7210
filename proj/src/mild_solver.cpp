#include "mmspde/mild_solver.hpp"

#include "mmspde/errors.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <sstream>

namespace mmspde {

std::string to_string(NonlinearityKind k) {
    switch (k) {
        case NonlinearityKind::Zero: return "zero";
        case NonlinearityKind::Linear: return "linear";
        case NonlinearityKind::SmoothSaturating: return "smooth-saturating";
    }
    return "zero";
}

NonlinearityKind nonlinearity_kind_from_string(const std::string& s) {
    if (s == "zero") return NonlinearityKind::Zero;
    if (s == "linear") return NonlinearityKind::Linear;
    if (s == "smooth-saturating" || s == "saturating") return NonlinearityKind::SmoothSaturating;
    throw std::invalid_argument("unknown nonlinearity kind '" + s + "'");
}

double ScalarMap::operator()(double s) const {
    switch (kind) {
        case NonlinearityKind::Zero: return 0.0;
        case NonlinearityKind::Linear: return slope * s;
        case NonlinearityKind::SmoothSaturating: return slope * scale * std::tanh(s / scale);
    }
    return 0.0;
}

double ScalarMap::d1(double s) const {
    switch (kind) {
        case NonlinearityKind::Zero: return 0.0;
        case NonlinearityKind::Linear: return slope;
        case NonlinearityKind::SmoothSaturating: {
            const double c = 1.0 / std::cosh(s / scale);
            return slope * c * c;
        }
    }
    return 0.0;
}

double ScalarMap::d2(double s) const {
    if (kind != NonlinearityKind::SmoothSaturating) return 0.0;
    const double c = 1.0 / std::cosh(s / scale);
    return -2.0 * slope / scale * c * c * std::tanh(s / scale);
}

double ScalarMap::bound_d1() const { return kind == NonlinearityKind::Zero ? 0.0 : std::abs(slope); }

double ScalarMap::bound_d2() const {
    if (kind != NonlinearityKind::SmoothSaturating) return 0.0;
    return std::abs(slope) * 4.0 / (3.0 * std::sqrt(3.0) * scale);
}

double ScalarMap::bound_d3() const {
    if (kind != NonlinearityKind::SmoothSaturating) return 0.0;
    return 2.0 * std::abs(slope) / (scale * scale);
}

const ScalarMap& Nonlinearity::G_for(std::size_t i) const {
    if (i == 0 || i > G_extra.size()) return G;
    return G_extra[i - 1];
}

namespace {

Eigen::VectorXd nodal_map(const ScalarMap& phi, const Eigen::VectorXd& nodal) {
    Eigen::VectorXd out(nodal.size());
    for (Eigen::Index j = 0; j < nodal.size(); ++j) {
        const double v = phi(nodal(j));
        if (!std::isfinite(v)) {
            throw PropagationError("non-finite nonlinearity value at node " + std::to_string(j),
                                   static_cast<int>(j));
        }
        out(j) = v;
    }
    return out;
}

}  // namespace

Field apply_nonlinearity(const ScalarMap& phi, const Field& u) {
    if (phi.kind == NonlinearityKind::Zero) return Field::zero(u.basis_ptr());
    return Field::from_nodal(u.basis_ptr(), nodal_map(phi, u.nodal()));
}

Field apply_nonlinearity(const Nonlinearity& nl, const Field& u, Which which) {
    return apply_nonlinearity(which == Which::F ? nl.F : nl.G, u);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd TimePath::coefficient_matrix() const {
    const int m = values.empty() ? 0 : values.front().size();
    Eigen::MatrixXd c(static_cast<Eigen::Index>(values.size()), m);
    for (std::size_t k = 0; k < values.size(); ++k) c.row(k) = values[k].coeffs().transpose();
    return c;
}

TimePath TimePath::from_coefficients(BasisPtr basis, std::vector<double> times,
                                     const Eigen::MatrixXd& coeffs) {
    TimePath p;
    p.times = std::move(times);
    p.values.reserve(coeffs.rows());
    for (Eigen::Index k = 0; k < coeffs.rows(); ++k) p.values.emplace_back(basis, coeffs.row(k).transpose());
    return p;
}

namespace {

// E_n = int_0^h exp(-L r) r^n dr, n = 0, 1, 2
std::array<double, 3> exp_moments(double L, double h) {
    const double z = L * h;
    std::array<double, 3> E{};
    if (z < 1.0) {
        for (int n = 0; n < 3; ++n) {
            double term = 1.0, acc = 0.0;
            for (int k = 0; k < 30; ++k) {
                acc += term / (n + k + 1);
                term *= -z / (k + 1);
            }
            E[n] = std::pow(h, n + 1) * acc;
        }
    } else {
        const double e = std::exp(-z);
        E[0] = (1.0 - e) / L;
        E[1] = (1.0 - e * (1.0 + z)) / (L * L);
        E[2] = (2.0 - e * (2.0 + 2.0 * z + z * z)) / (L * L * L);
    }
    return E;
}

}  // namespace

Eigen::MatrixXd deterministic_convolution_path(const Eigen::VectorXd& eigenvalues, double h,
                                               const Eigen::MatrixXd& Fc, double theta) {
    const int N = static_cast<int>(Fc.rows()) - 1;
    const int m = static_cast<int>(eigenvalues.size());
    // per-cell weights against the quadratic through three consecutive nodes:
    // backward stencil (k-2, k-1, k), forward stencil (0, 1, 2) on the first cell,
    // and the linear interpolant when the grid has a single cell.
    Eigen::VectorXd decay(m), bm(m), b0(m), bp(m), f0(m), f1(m), f2(m), la(m), lb(m);
    for (int i = 0; i < m; ++i) {
        const double L = theta == 1.0 ? eigenvalues(i) : std::pow(eigenvalues(i), theta);
        const auto E = exp_moments(L, h);
        // mu_n = int_0^h exp(-L (h - s)) s^n ds
        const double mu0 = E[0];
        const double mu1 = h * E[0] - E[1];
        const double mu2 = h * h * E[0] - 2.0 * h * E[1] + E[2];
        const double h2 = h * h;
        bm(i) = (mu2 - h * mu1) / (2.0 * h2);
        b0(i) = (h2 * mu0 - mu2) / h2;
        bp(i) = (mu2 + h * mu1) / (2.0 * h2);
        f0(i) = (mu2 - 3.0 * h * mu1 + 2.0 * h2 * mu0) / (2.0 * h2);
        f1(i) = (2.0 * h * mu1 - mu2) / h2;
        f2(i) = (mu2 - h * mu1) / (2.0 * h2);
        lb(i) = mu1 / h;
        la(i) = mu0 - lb(i);
        decay(i) = std::exp(-L * h);
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N + 1, m);
    auto row = [&](int k) { return Fc.row(k).transpose(); };
    for (int k = 1; k <= N; ++k) {
        Eigen::VectorXd cell;
        if (N == 1) {
            cell = la.cwiseProduct(row(0)) + lb.cwiseProduct(row(1));
        } else if (k == 1) {
            cell = f0.cwiseProduct(row(0)) + f1.cwiseProduct(row(1)) + f2.cwiseProduct(row(2));
        } else {
            cell = bm.cwiseProduct(row(k - 2)) + b0.cwiseProduct(row(k - 1)) + bp.cwiseProduct(row(k));
        }
        J.row(k) = (decay.cwiseProduct(J.row(k - 1).transpose()) + cell).transpose();
    }
    return J;
}

Field deterministic_convolution(const TimePath& u, const ScalarMap& F, double t, double theta) {
    if (u.values.empty()) throw std::invalid_argument("deterministic_convolution: empty path");
    const BasisPtr& basis = u.values.front().basis_ptr();
    int kt = -1;
    for (std::size_t k = 0; k < u.times.size(); ++k) {
        if (std::abs(u.times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) kt = static_cast<int>(k);
    }
    if (kt < 0) throw std::invalid_argument("deterministic_convolution: t is not a grid time");
    if (kt == 0) return Field::zero(basis);
    const double h = u.times[1] - u.times[0];
    Eigen::MatrixXd Fc(kt + 1, basis->n_modes());
    for (int k = 0; k <= kt; ++k) Fc.row(k) = apply_nonlinearity(F, u.values[k]).coeffs().transpose();
    const Eigen::MatrixXd J = deterministic_convolution_path(basis->eigenvalues, h, Fc, theta);
    return Field(basis, J.row(kt).transpose());
}

// ---------------------------------------------------------------------------

double MildSolution::contraction_ratio() const {
    double r = 0.0;
    for (std::size_t n = 1; n < contraction_history.size(); ++n) {
        if (contraction_history[n - 1] > 0.0) {
            r = std::max(r, contraction_history[n] / contraction_history[n - 1]);
        }
    }
    return r;
}

bool MildSolution::geometric() const {
    for (std::size_t n = 2; n < contraction_history.size(); ++n) {
        if (!(contraction_history[n] < contraction_history[n - 1])) return false;
    }
    return true;
}

namespace {

struct WindowResult {
    Eigen::MatrixXd u;  // rows k0..k1
    std::vector<double> history;
    int iterations = 0;
    bool converged = false;
};

struct PicardContext {
    const SpectralBasis& basis;
    const Nonlinearity& nl;
    std::vector<Eigen::MatrixXd> dz;  // per noise term, N x m increments
    double h;
    double delta;
    double eta;
    const SolverOptions& opt;
};

double sup_delta_inf(const PicardContext& ctx, const Eigen::MatrixXd& diff) {
    const Eigen::MatrixXd nodal = ctx.basis.eigenvectors * diff.transpose();
    double sup = 0.0;
    for (Eigen::Index k = 0; k < diff.rows(); ++k) {
        const double v = norm_H(Eigen::VectorXd(diff.row(k).transpose()), ctx.basis.eigenvalues, ctx.delta) +
                         nodal.col(k).cwiseAbs().maxCoeff();
        sup = std::max(sup, v);
    }
    return sup;
}

WindowResult picard_window(const PicardContext& ctx, const Eigen::VectorXd& c0, int k0, int k1) {
    const int n = k1 - k0;
    const int m = ctx.basis.n_modes();
    const Eigen::VectorXd& lam = ctx.basis.eigenvalues;

    Eigen::MatrixXd free(n + 1, m);
    for (int k = 0; k <= n; ++k) {
        free.row(k) = c0.cwiseProduct(semigroup_multiplier(lam, k * ctx.h, ctx.opt.theta)).transpose();
    }
    WindowResult res;
    res.u = ctx.opt.constant_initialization ? Eigen::MatrixXd(c0.transpose().replicate(n + 1, 1)) : free;

    const bool has_F = ctx.nl.F.kind != NonlinearityKind::Zero;
    int stall = 0;
    for (int it = 0; it < ctx.opt.max_iter; ++it) {
        const Eigen::MatrixXd nodal = ctx.basis.eigenvectors * res.u.transpose();  // n_nodes x (n+1)
        Eigen::MatrixXd next = free;
        if (has_F) {
            Eigen::MatrixXd Fc(n + 1, m);
            for (int k = 0; k <= n; ++k) {
                Fc.row(k) = ctx.basis.analyze(nodal_map(ctx.nl.F, nodal.col(k))).transpose();
            }
            next += deterministic_convolution_path(lam, ctx.h, Fc, ctx.opt.theta);
        }
        for (std::size_t i = 0; i < ctx.dz.size(); ++i) {
            const ScalarMap& G = ctx.nl.G_for(i);
            if (G.kind == NonlinearityKind::Zero) continue;
            std::vector<Eigen::MatrixXd> M(n + 1);
            for (int k = 0; k <= n; ++k) M[k] = multiplication_matrix(ctx.basis, nodal_map(G, nodal.col(k)));
            const Eigen::MatrixXd dz = ctx.dz[i].middleRows(k0, n);
            next += stochastic_convolution(lam, ctx.h, M, dz, ctx.opt.theta, ctx.opt.route, ctx.eta);
        }
        const double d = sup_delta_inf(ctx, next - res.u);
        res.u = std::move(next);
        res.history.push_back(d);
        res.iterations = it + 1;
        if (!std::isfinite(d)) break;
        if (d < ctx.opt.tol) {
            res.converged = true;
            break;
        }
        const std::size_t s = res.history.size();
        if (s >= 2 && d >= 0.98 * res.history[s - 2]) {
            if (++stall >= 3) break;
        } else {
            stall = 0;
        }
    }
    return res;
}

void solve_segment(const PicardContext& ctx, const Eigen::VectorXd& c0, int k0, int k1, int depth,
                   Eigen::MatrixXd& out, MildSolution& sol) {
    WindowResult r = picard_window(ctx, c0, k0, k1);
    sol.picard_iterations += r.iterations;
    const bool can_split = ctx.opt.allow_windowing && depth < ctx.opt.max_window_depth && (k1 - k0) % 2 == 0 &&
                           (k1 - k0) >= 8;
    if (r.converged || !can_split) {
        out.middleRows(k0, k1 - k0 + 1) = r.u;
        if (depth == 0 || r.history.size() > sol.contraction_history.size()) sol.contraction_history = r.history;
        if (!r.converged) sol.converged = false;
        ++sol.windows;
        return;
    }
    const int mid = (k0 + k1) / 2;
    solve_segment(ctx, c0, k0, mid, depth + 1, out, sol);
    const Eigen::VectorXd cm = out.row(mid).transpose();
    solve_segment(ctx, cm, mid, k1, depth + 1, out, sol);
}

}  // namespace

MildSolution solve_mild(const Field& f, const Nonlinearity& nl, std::span<const NoisePath> noise,
                        const ParamSet& params, const SolverOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    if (opt.check_admissibility && !params.admissible()) {
        throw AdmissibilityError("solve_mild: inadmissible parameters; " + params.diagnose());
    }
    const double eta = std::isnan(opt.eta) ? params.default_eta() : opt.eta;
    if (opt.route == IntegralRoute::Definitional && opt.check_admissibility && !params.eta_admissible(eta)) {
        throw AdmissibilityError("solve_mild: eta outside the admissible window");
    }
    if (!(opt.theta > 0.0 && opt.theta <= 1.0)) throw DomainError("solve_mild: theta must be in (0,1]");
    const int N = opt.N_time;
    if (N < 2) throw std::invalid_argument("solve_mild: N_time must be at least 2");
    const SpectralBasis& basis = f.basis();
    const double h = params.t0 / N;

    std::ostringstream msg;
    PicardContext ctx{basis, nl, {}, h, params.delta, eta, opt};
    for (const NoisePath& z : noise) {
        if (z.basis.get() != &basis && (!z.basis || z.basis->id() != basis.id())) {
            throw std::invalid_argument("solve_mild: noise lives on a different basis");
        }
        if (z.n_steps() < N || z.n_steps() % N != 0) {
            throw std::invalid_argument("solve_mild: noise grid must be a multiple of N_time");
        }
        if (std::abs(z.times.back() - params.t0) > 1e-12 * std::max(1.0, params.t0)) {
            throw std::invalid_argument("solve_mild: noise horizon differs from t0");
        }
        const NoisePath zs = z.n_steps() == N ? z : subsample(z, z.n_steps() / N);
        const Eigen::MatrixXd c = zs.coefficient_matrix();
        ctx.dz.push_back(c.bottomRows(N) - c.topRows(N));
    }

    MildSolution sol;
    sol.params = params;
    sol.N_time = N;
    sol.n_modes = basis.n_modes();
    sol.n_nodes = basis.n_nodes();
    sol.eta = eta;
    sol.theta = opt.theta;
    sol.route = opt.route;
    sol.initial_norm = norm_H(f, params.delta + 2.0 * params.gamma + params.epsilon);
    sol.converged = true;

    Eigen::MatrixXd u(N + 1, basis.n_modes());
    sol.windows = 0;
    solve_segment(ctx, f.coeffs(), 0, N, 0, u, sol);
    u.row(0) = f.coeffs().transpose();

    std::vector<double> times(N + 1);
    for (int k = 0; k <= N; ++k) times[k] = params.t0 * k / N;
    sol.path = TimePath::from_coefficients(f.basis_ptr(), std::move(times), u);
    if (sol.windows > 1) msg << "solved on " << sol.windows << " windows; ";
    if (!sol.converged) msg << "no convergence within " << opt.max_iter << " iterations";
    sol.message = msg.str();
    sol.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

MildSolution solve_mild(const Field& f, const Nonlinearity& nl, const NoisePath& noise,
                        const ParamSet& params, const SolverOptions& options) {
    return solve_mild(f, nl, std::span<const NoisePath>(&noise, 1), params, options);
}

MildSolution solve_with_fractional_dissipation(const Field& f, const Nonlinearity& nl,
                                               std::span<const NoisePath> noise,
                                               const ParamSet& params, double theta,
                                               SolverOptions options) {
    options.theta = theta;
    return solve_mild(f, nl, noise, params, options);
}

}  // namespace mmspde
