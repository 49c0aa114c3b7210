#include "mmspde/function_spaces.hpp"

#include "mmspde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace mmspde {

Field::Field(BasisPtr basis, Eigen::VectorXd coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (!basis_) throw std::invalid_argument("Field: null basis");
    if (coeffs_.size() != basis_->n_modes()) {
        throw std::invalid_argument("Field: coefficient count does not match the basis");
    }
}

Field Field::zero(BasisPtr basis) {
    const int n = basis->n_modes();
    return Field(std::move(basis), Eigen::VectorXd::Zero(n));
}

Field Field::mode(BasisPtr basis, int index, double amplitude) {
    Field f = zero(std::move(basis));
    f.coeffs_(index) = amplitude;
    return f;
}

Field Field::from_nodal(BasisPtr basis, const Eigen::VectorXd& nodal) {
    Eigen::VectorXd c = basis->analyze(nodal);
    return Field(std::move(basis), std::move(c));
}

Field& Field::operator+=(const Field& o) {
    coeffs_ += o.coeffs_;
    return *this;
}
Field& Field::operator-=(const Field& o) {
    coeffs_ -= o.coeffs_;
    return *this;
}
Field& Field::operator*=(double s) {
    coeffs_ *= s;
    return *this;
}
Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

double inner(const Field& u, const Field& v) { return u.coeffs().dot(v.coeffs()); }

// ---------------------------------------------------------------------------

bool ParamSet::admissible_P() const {
    return 0.0 < alpha && alpha < gamma && 0.0 < beta && beta < delta &&
           delta < std::min(d_S / 2.0, 1.0) && gamma < gamma_max_P();
}

bool ParamSet::admissible_lowdim() const {
    return 0.0 < d_S / 2.0 && d_S / 2.0 <= beta && beta <= delta && delta < 1.0 &&
           0.0 < alpha && alpha < gamma && gamma < gamma_max_lowdim();
}

bool ParamSet::eta_admissible(double eta) const {
    return alpha < eta && eta < gamma && delta + 2.0 * gamma < 2.0 - 2.0 * eta - beta;
}

std::string ParamSet::diagnose() const {
    if (admissible()) return {};
    std::ostringstream os;
    os << "case (P):";
    if (!(0.0 < alpha && alpha < gamma)) os << " need 0<alpha<gamma;";
    if (!(0.0 < beta && beta < delta)) os << " need 0<beta<delta;";
    if (!(delta < std::min(d_S / 2.0, 1.0))) os << " need delta<min(d_S/2,1);";
    if (!(gamma < gamma_max_P())) os << " need gamma<" << gamma_max_P() << ";";
    os << " low-dim case:";
    if (!(d_S / 2.0 <= beta && beta <= delta && delta < 1.0)) os << " need d_S/2<=beta<=delta<1;";
    if (!(0.0 < alpha && alpha < gamma && gamma < gamma_max_lowdim())) {
        os << " need alpha<gamma<" << gamma_max_lowdim() << ";";
    }
    return os.str();
}

// ---------------------------------------------------------------------------

double norm_H_spectral(const Eigen::VectorXd& c, const Eigen::VectorXd& lam, double sigma) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) acc += std::pow(1.0 + lam(i), sigma) * c(i) * c(i);
    return std::sqrt(acc);
}

double norm_H(const Eigen::VectorXd& c, const Eigen::VectorXd& lam, double sigma) {
    if (sigma < 0.0) return norm_H_spectral(c, lam, sigma);
    const double l2 = c.norm();
    if (sigma == 0.0) return l2;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (lam(i) > 0.0) acc += std::pow(lam(i), sigma) * c(i) * c(i);
    }
    return l2 + std::sqrt(acc);
}

double norm_H(const Field& u, double sigma) {
    return norm_H(u.coeffs(), u.basis().eigenvalues, sigma);
}

double norm_H_spectral(const Field& u, double sigma) {
    return norm_H_spectral(u.coeffs(), u.basis().eigenvalues, sigma);
}

double norm_H_inf(const Field& u, double sigma) { return norm_H(u, sigma) + u.sup_nodal(); }

// ---------------------------------------------------------------------------

Eigen::VectorXd semigroup_multiplier(const Eigen::VectorXd& lam, double t, double theta) {
    Eigen::VectorXd m(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        const double l = theta == 1.0 ? lam(i) : std::pow(lam(i), theta);
        m(i) = std::exp(-l * t);
    }
    return m;
}

Field semigroup_apply(const Field& u, double t) {
    if (t < 0.0) throw DomainError("semigroup_apply: t must be >= 0");
    Eigen::VectorXd c = u.coeffs().cwiseProduct(semigroup_multiplier(u.basis().eigenvalues, t));
    return Field(u.basis_ptr(), std::move(c));
}

Field subordinated_apply(const Field& u, double t, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("subordinated_apply: theta must be in (0,1]");
    if (theta == 1.0) return semigroup_apply(u, t);
    if (t < 0.0) throw DomainError("subordinated_apply: t must be >= 0");
    Eigen::VectorXd c =
        u.coeffs().cwiseProduct(semigroup_multiplier(u.basis().eigenvalues, t, theta));
    return Field(u.basis_ptr(), std::move(c));
}

Field bessel_potential(const Field& u, double sigma) {
    const auto& lam = u.basis().eigenvalues;
    Eigen::VectorXd c = u.coeffs();
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::pow(1.0 + lam(i), -sigma / 2.0);
    return Field(u.basis_ptr(), std::move(c));
}

Field fractional_power(const Field& u, double nu) {
    const auto& lam = u.basis().eigenvalues;
    Eigen::VectorXd c = u.coeffs();
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= lam(i) > 0.0 ? std::pow(lam(i), nu) : 0.0;
    return Field(u.basis_ptr(), std::move(c));
}

// ---------------------------------------------------------------------------

namespace {

int highest_active_mode(const Eigen::VectorXd& c) {
    const double scale = c.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0;
    for (Eigen::Index i = c.size() - 1; i >= 0; --i) {
        if (std::abs(c(i)) > 1e-14 * scale) return static_cast<int>(i) + 1;
    }
    return 0;
}

}  // namespace

ProductResult pointwise_product(const Field& g, const Field& h, const ParamSet& params) {
    (void)params;  // only the q=2 form is computable; params enter the estimate, not the product
    if (g.basis_ptr() != h.basis_ptr()) {
        throw std::invalid_argument("pointwise_product: fields live on different bases");
    }
    const SpectralBasis& b = g.basis();
    ProductResult r;
    r.value = Field::from_nodal(g.basis_ptr(), g.nodal().cwiseProduct(h.nodal()));
    if (b.kind == SpaceKind::Interval) {
        // sin(i pi x) sin(k pi x) contains cos((i+k) pi x), which folds on the grid
        // once i + k exceeds the number of cells.
        r.aliasing = highest_active_mode(g.coeffs()) + highest_active_mode(h.coeffs()) >
                     b.n_nodes() - 1;
    }
    return r;
}

Eigen::MatrixXd multiplication_matrix(const SpectralBasis& basis, const Eigen::VectorXd& g_nodal) {
    return basis.eigenvectors.transpose() * (basis.weights.cwiseProduct(g_nodal)).asDiagonal() *
           basis.eigenvectors;
}

ProductConstantReport measure_product_constant(BasisPtr basis, const ParamSet& params,
                                               int samples, std::uint64_t seed, int active_modes) {
    ProductConstantReport rep;
    const int n = basis->n_modes();
    const int active = active_modes > 0 ? std::min(active_modes, n) : std::min(n, 8);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double sum = 0.0;
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd gc = Eigen::VectorXd::Zero(n), hc = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < active; ++i) {
            gc(i) = normal(rng);
            hc(i) = normal(rng);
        }
        Field g(basis, gc), h(basis, hc);
        const ProductResult p = pointwise_product(g, h, params);
        if (p.aliasing) ++rep.aliasing_count;
        const double ratio = norm_H_spectral(p.value, -params.beta) /
                             (norm_H(g, params.delta) * norm_H_spectral(h, -params.beta));
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        sum += ratio;
        ++rep.samples;
    }
    rep.mean_ratio = rep.samples > 0 ? sum / rep.samples : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------

SemigroupEstimateReport verify_semigroup_estimates(BasisPtr basis, double nu, double beta,
                                                   std::span<const double> t_grid,
                                                   const SemigroupEstimateOptions& opt) {
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("verify_semigroup_estimates: nu must be in (0,1)");
    SemigroupEstimateReport rep;
    const Eigen::VectorXd& lam = basis->eigenvalues;
    const int n = basis->n_modes();
    const int active = std::min(opt.active_modes, n);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (int s = 0; s < opt.samples; ++s) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < active; ++i) v(i) = normal(rng);
        for (double t : t_grid) {
            if (!(t > 0.0)) throw DomainError("verify_semigroup_estimates: t must be positive");
            const Eigen::VectorXd m = semigroup_multiplier(lam, t);
            const Eigen::VectorXd tv = v.cwiseProduct(m);
            const Eigen::VectorXd diff = tv - v;

            double hom = 0.0;  // ||A^{nu/2} T(t) v||_0
            for (int i = 0; i < n; ++i) {
                if (lam(i) > 0.0) hom += std::pow(lam(i), nu) * tv(i) * tv(i);
            }
            hom = std::sqrt(hom);
            const double l2 = v.norm();
            rep.smoothing = std::max(rep.smoothing, hom * std::pow(t, nu / 2.0) / l2);
            rep.continuity = std::max(
                rep.continuity, diff.norm() / (std::pow(t, nu) * norm_H(v, lam, 2.0 * nu)));
            const double wneg = norm_H_spectral(v, lam, -beta);
            rep.dual_smoothing = std::max(
                rep.dual_smoothing,
                norm_H(tv, lam, opt.delta) * std::pow(t, opt.delta / 2.0 + beta / 2.0) / wneg);
            rep.dual_continuity =
                std::max(rep.dual_continuity,
                         norm_H_spectral(diff, lam, -beta - 2.0 * nu) / (std::pow(t, nu) * wneg));
        }
    }
    rep.all_finite = std::isfinite(rep.smoothing) && std::isfinite(rep.continuity) &&
                     std::isfinite(rep.dual_smoothing) && std::isfinite(rep.dual_continuity);
    return rep;
}

SingleModeMaximum single_mode_smoothing_max(double lambda, double nu) {
    if (!(lambda > 0.0)) throw DomainError("single_mode_smoothing_max: lambda must be positive");
    auto f = [&](double logt) {
        const double t = std::exp(logt);
        return std::pow(lambda * t, nu / 2.0) * std::exp(-lambda * t);
    };
    double a = std::log(1e-8 / lambda), b = std::log(50.0 / lambda);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {std::exp(x), f(x)};
}

}  // namespace mmspde
