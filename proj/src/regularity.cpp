#include "mmspde/regularity.hpp"

#include "mmspde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mmspde {

namespace {

double path_norm(const SpectralBasis& b, const Eigen::VectorXd& c, double delta, bool inf_norm) {
    double v = norm_H(c, b.eigenvalues, delta);
    if (inf_norm) v += b.synthesize(c).cwiseAbs().maxCoeff();
    return v;
}

double wgamma_at_stride(const TimePath& path, double gamma, double delta, bool inf_norm, int stride) {
    const SpectralBasis& b = path.values.front().basis();
    std::vector<int> idx;
    for (int k = 0; k <= path.n_steps(); k += stride) idx.push_back(k);
    double sup = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        const int k = idx[a];
        const double t = path.times[k];
        const Eigen::VectorXd& vk = path.values[k].coeffs();
        double integral = 0.0;
        // distances at nodes j = idx[0..a-1], zero at t
        double d_right = 0.0;  // distance at the right end of the current segment
        for (std::size_t c = a; c-- > 0;) {
            const int j = idx[c];
            const double d_left = path_norm(b, vk - path.values[j].coeffs(), delta, inf_norm);
            const double r_hi = t - path.times[j];                 // r at the left end
            const double r_lo = t - path.times[idx[c + 1]];        // r at the right end
            // d(r) = A + B r on [r_lo, r_hi]
            const double B = (d_left - d_right) / (r_hi - r_lo);
            const double A = d_right - B * r_lo;
            if (r_lo == 0.0) {
                integral += B * std::pow(r_hi, 1.0 - gamma) / (1.0 - gamma);
            } else {
                integral += A * (std::pow(r_lo, -gamma) - std::pow(r_hi, -gamma)) / gamma +
                            B * (std::pow(r_hi, 1.0 - gamma) - std::pow(r_lo, 1.0 - gamma)) / (1.0 - gamma);
            }
            d_right = d_left;
        }
        sup = std::max(sup, path_norm(b, vk, delta, inf_norm) + integral);
    }
    return sup;
}

}  // namespace

WGammaResult wgamma_seminorm(const TimePath& path, double gamma, double delta, bool inf_norm) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("wgamma_seminorm: gamma must be in (0,1)");
    if (path.times.size() < 32) throw std::invalid_argument("wgamma_seminorm: need at least 32 grid points");
    WGammaResult r;
    const int N = path.n_steps();
    for (int stride : {4, 2, 1}) {
        if (N % stride != 0 || N / stride < 8) continue;
        r.sweep.push_back(wgamma_at_stride(path, gamma, delta, inf_norm, stride));
    }
    r.value = r.sweep.back();
    if (r.sweep.size() >= 3) {
        const std::size_t n = r.sweep.size();
        r.diverging = r.sweep[n - 1] > 1.05 * r.sweep[n - 2] && r.sweep[n - 2] > 1.05 * r.sweep[n - 3];
    }
    return r;
}

HolderEstimate holder_exponent(const TimePath& path, double delta, const HolderOptions& options) {
    const SpectralBasis& b = path.values.front().basis();
    auto dist = [&](int i, int j) {
        return norm_H(Eigen::VectorXd(path.values[j].coeffs() - path.values[i].coeffs()), b.eigenvalues, delta);
    };
    return estimate_holder(path.times, dist, options);
}

double uniform_bound(const TimePath& path, double sigma) {
    double m = 0.0;
    for (const Field& v : path.values) m = std::max(m, norm_H(v, sigma));
    return m;
}

// ---------------------------------------------------------------------------

LemmaConstants measure_lemma_bounds(const MildSolution& u, const Nonlinearity& nl,
                                    std::span<const NoisePath> noise, const ParamSet& params, double nu) {
    LemmaConstants lc;
    lc.nu = nu;
    const TimePath& path = u.path;
    const int N = path.n_steps();
    if (N % 16 != 0) throw std::invalid_argument("measure_lemma_bounds: N_time must be a multiple of 16");
    const SpectralBasis& b = path.values.front().basis();
    const Eigen::VectorXd& lam = b.eigenvalues;
    const int m = b.n_modes();
    const double h = path.times[1] - path.times[0];
    const double unit = params.t0 / 16.0;
    const int q = N / 16;
    lc.w_norm = wgamma_seminorm(path, params.gamma, params.delta, true).value;

    const Eigen::MatrixXd U = path.coefficient_matrix();
    const Eigen::MatrixXd nodal = b.eigenvectors * U.transpose();

    Eigen::MatrixXd Fc = Eigen::MatrixXd::Zero(N + 1, m);
    if (nl.F.kind != NonlinearityKind::Zero) {
        for (int k = 0; k <= N; ++k) Fc.row(k) = apply_nonlinearity(nl.F, path.values[k]).coeffs().transpose();
    }
    std::vector<std::vector<Eigen::MatrixXd>> M(noise.size());
    std::vector<Eigen::MatrixXd> dz(noise.size());
    for (std::size_t i = 0; i < noise.size(); ++i) {
        const ScalarMap& G = nl.G_for(i);
        if (G.kind == NonlinearityKind::Zero) continue;
        M[i].resize(N + 1);
        for (int k = 0; k <= N; ++k) {
            Eigen::VectorXd g(nodal.rows());
            for (Eigen::Index j = 0; j < nodal.rows(); ++j) g(j) = G(nodal(j, k));
            M[i][k] = multiplication_matrix(b, g);
        }
        const NoisePath zs = noise[i].n_steps() == N ? noise[i] : subsample(noise[i], noise[i].n_steps() / N);
        const Eigen::MatrixXd c = zs.coefficient_matrix();
        dz[i] = c.bottomRows(N) - c.topRows(N);
    }

    const std::vector<std::pair<int, int>> pairs = {{0, 1}, {0, 2}, {0, 4},  {0, 8},   {0, 16}, {4, 5},
                                                    {4, 6}, {4, 8}, {8, 9}, {8, 12}, {12, 16}, {15, 16}};
    for (const auto& [a, c] : pairs) {
        const int ks = a * q, kt = c * q, n = kt - ks;
        const double len = (c - a) * unit;
        if (lc.w_norm > 0.0) {
            const Eigen::MatrixXd J = deterministic_convolution_path(lam, h, Fc.middleRows(ks, n + 1), u.theta);
            const double lhs = norm_H(Eigen::VectorXd(J.row(n).transpose()), lam, params.delta);
            lc.drift = std::max(lc.drift, lhs / (lc.w_norm * len));
        }
        Eigen::VectorXd I = Eigen::VectorXd::Zero(m);
        for (std::size_t i = 0; i < noise.size(); ++i) {
            if (M[i].empty()) continue;
            const std::vector<Eigen::MatrixXd> Mw(M[i].begin() + ks, M[i].begin() + kt + 1);
            const Eigen::MatrixXd S = stochastic_convolution(lam, h, Mw, dz[i].middleRows(ks, n), u.theta, u.route, u.eta);
            I += S.row(n).transpose();
        }
        lc.stochastic = std::max(lc.stochastic, norm_H(I, lam, params.delta) / std::pow(len, params.gamma));
        ++lc.pairs;
    }

    if (!M.empty() && !M[0].empty() && lc.w_norm > 0.0) {
        Eigen::VectorXd Dd(m), Db(m);
        for (int i = 0; i < m; ++i) {
            Dd(i) = std::pow(1.0 + lam(i), params.delta / 2.0);
            Db(i) = std::pow(1.0 + lam(i), params.beta / 2.0);
        }
        for (int x : {4, 8, 12}) {
            for (int d1 : {1, 2, 4}) {
                for (int d2 : {1, 2, 4}) {
                    const int y = x - d1, t = x + d2;
                    if (y < 0 || t > 16) continue;
                    const double tx = d2 * unit, xy = d1 * unit;
                    Eigen::VectorXd s(m);
                    for (int i = 0; i < m; ++i) {
                        const double L = u.theta == 1.0 ? lam(i) : std::pow(lam(i), u.theta);
                        s(i) = std::exp(-L * tx) * (-std::expm1(-L * xy));
                    }
                    const Eigen::MatrixXd B = Dd.cwiseProduct(s).asDiagonal() * M[0][x * q] * Db.asDiagonal();
                    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
                    const double op = svd.singularValues()(0);
                    const double rhs = lc.w_norm * std::pow(tx, -params.delta / 2.0 - params.beta / 2.0 - nu) *
                                       std::pow(xy, nu);
                    lc.epsilon = std::max(lc.epsilon, op / rhs);
                }
            }
        }
    }
    return lc;
}

// ---------------------------------------------------------------------------

AdmissibleRegion admissible_region(double d_S, double alpha, double beta) {
    AdmissibleRegion r;
    std::ostringstream os;
    {
        RegionPiece& p = r.case_P;
        p.delta_lo = beta;
        p.delta_hi = std::min(d_S / 2.0, 1.0);
        p.gamma_lo = 0.0;
        p.gamma_hi = 1.0 - alpha - beta / 2.0 - d_S / 4.0;
        p.empty = !(beta > 0.0 && p.delta_lo < p.delta_hi && p.gamma_hi > 0.0);
        if (!p.empty) {
            p.vertices = {{p.delta_lo, 0.0}, {p.delta_hi, 0.0}, {p.delta_hi, p.gamma_hi}, {p.delta_lo, p.gamma_hi}};
            os << "case (P): delta in (" << p.delta_lo << ", " << p.delta_hi << "), gamma in (0, " << p.gamma_hi
               << ")";
        } else {
            os << "case (P): empty";
        }
    }
    {
        RegionPiece& p = r.lowdim;
        const double c = 1.0 - alpha - beta / 2.0;
        p.delta_lo = std::max(beta, d_S / 2.0);
        p.delta_lo_closed = true;
        p.delta_hi = 1.0;
        p.gamma_lo = 0.0;
        p.gamma_hi = c - p.delta_lo / 2.0;
        p.empty = !(d_S / 2.0 <= beta && p.delta_lo < 1.0 && p.gamma_hi > 0.0);
        if (!p.empty) {
            const double dz = std::min(1.0, 2.0 * c);
            p.vertices.push_back({p.delta_lo, 0.0});
            p.vertices.push_back({dz, 0.0});
            if (2.0 * c > 1.0) p.vertices.push_back({1.0, c - 0.5});
            p.vertices.push_back({p.delta_lo, p.gamma_hi});
            os << "; low-dim: delta in [" << p.delta_lo << ", 1), gamma < " << c << " - delta/2";
        } else {
            os << "; low-dim: empty";
        }
    }
    r.description = os.str();
    return r;
}

void write_region_csv(const std::string& path, const AdmissibleRegion& region) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "region,delta,gamma\n";
    for (const auto& [d, g] : region.case_P.vertices) out << "P," << d << ',' << g << '\n';
    for (const auto& [d, g] : region.lowdim.vertices) out << "lowdim," << d << ',' << g << '\n';
}

// ---------------------------------------------------------------------------

RegularityReport analyze_regularity(const MildSolution& u, const Nonlinearity& nl,
                                    std::span<const NoisePath> noise, const HolderOptions& options) {
    RegularityReport rep;
    rep.params = u.params;
    const ParamSet& p = u.params;
    const HolderEstimate est = holder_exponent(u.path, p.delta, options);
    rep.holder_defined = est.defined;
    if (est.defined) {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < est.lags.size(); ++i) {
            if (est.sups[i] > 0.0) {
                lx.push_back(std::log(est.lags[i]));
                ly.push_back(std::log(est.sups[i]));
            }
        }
        double mx = 0.0;
        for (double v : lx) mx += v;
        mx /= static_cast<double>(lx.size());
        double sxx = 0.0, sse = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            const double res = ly[i] - (est.intercept + est.slope * lx[i]);
            sse += res * res;
        }
        const double se = lx.size() > 2 ? std::sqrt(sse / static_cast<double>(lx.size() - 2) / sxx) : 0.0;
        rep.holder_slope = est.slope;
        rep.holder_lo = est.slope - 2.0 * se;
        rep.holder_hi = est.slope + 2.0 * se;
        rep.holder_r2 = est.r2;
    }
    const WGammaResult w = wgamma_seminorm(u.path, p.gamma, p.delta, true);
    rep.wgamma = w.value;
    rep.wgamma_diverging = w.diverging;
    rep.uniform_bound = uniform_bound(u.path, p.delta + 2.0 * p.gamma);
    rep.lemmas = measure_lemma_bounds(u, nl, noise, p);
    return rep;
}

}  // namespace mmspde
