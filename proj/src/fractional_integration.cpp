#include "mmspde/fractional_integration.hpp"

#include "mmspde/errors.hpp"
#include "mmspde/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <utility>

namespace mmspde {

namespace {

void check_eta(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("fractional derivative order must be in (0,1)");
}

double pos_pow(double x, double e) { return x > 0.0 ? std::pow(x, e) : 0.0; }

// sum over graded midpoint cells of (g(0) - g(r)) r^{-order-1} dr on (0, L]
template <class G>
double graded_marchaud(const G& g, double L, double order, const GradedMesh& mesh) {
    const double grading = mesh.grading > 0.0 ? mesh.grading : 2.0 / (1.0 - order);
    const int n = mesh.cells;
    const double g0 = g(0.0);
    double acc = 0.0;
    double r_prev = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double r = L * std::pow(static_cast<double>(k) / n, grading);
        const double rm = 0.5 * (r_prev + r);
        acc += (r - r_prev) * (g0 - g(rm)) * std::pow(rm, -order - 1.0);
        r_prev = r;
    }
    return acc;
}

}  // namespace

double wm_left(const std::function<double(double)>& f, double eta, double s, const GradedMesh& mesh) {
    check_eta(eta);
    if (!(s > 0.0)) throw DomainError("wm_left: s must be positive");
    const double fs = f(s);
    const double integral = graded_marchaud([&](double r) { return r == 0.0 ? fs : f(s - r); }, s,
                                            eta, mesh);
    return (fs * std::pow(s, -eta) + eta * integral) / std::tgamma(1.0 - eta);
}

double wm_right(const std::function<double(double)>& z, double eta, double x, double t,
                const GradedMesh& mesh) {
    check_eta(eta);
    if (!(x < t)) throw DomainError("wm_right: x must be below t");
    const double order = 1.0 - eta;
    const double zt = z(t);
    auto g = [&](double r) { return (r == 0.0 ? z(x) : z(x + r)) - zt; };
    const double integral = graded_marchaud(g, t - x, order, mesh);
    const double unsigned_value = (g(0.0) * std::pow(t - x, -order) + order * integral) / std::tgamma(eta);
    return -unsigned_value;
}

FracDerivative wm_left(std::span<const double> times, std::span<const double> values, double eta,
                       std::span<const double> x) {
    check_eta(eta);
    if (times.size() != values.size() || times.size() < 2) {
        throw std::invalid_argument("wm_left: grid and values differ in size");
    }
    FracDerivative d;
    d.eta = eta;
    d.side = FracDerivative::Side::Left;
    const double t0 = times[0];
    const double g1 = std::tgamma(1.0 - eta), g2 = std::tgamma(2.0 - eta);
    for (double xv : x) {
        const double s = xv - t0;
        if (!(s > 0.0)) throw DomainError("wm_left: evaluation point must exceed the grid start");
        double v = values[0] * std::pow(s, -eta) / g1;
        for (std::size_t p = 0; p + 1 < times.size() && times[p] < xv; ++p) {
            const double slope = (values[p + 1] - values[p]) / (times[p + 1] - times[p]);
            v += slope * (pos_pow(xv - times[p], 1.0 - eta) - pos_pow(xv - times[p + 1], 1.0 - eta)) / g2;
        }
        d.x.push_back(xv);
        d.values.push_back(v);
    }
    return d;
}

FracDerivative wm_right(std::span<const double> times, std::span<const double> values, double eta,
                        int t_index, std::span<const double> x) {
    check_eta(eta);
    if (times.size() != values.size() || t_index < 1 || t_index >= static_cast<int>(times.size())) {
        throw std::invalid_argument("wm_right: bad grid or t index");
    }
    FracDerivative d;
    d.eta = eta;
    d.side = FracDerivative::Side::Right;
    const double g = std::tgamma(1.0 + eta);
    const double t = times[t_index];
    for (double xv : x) {
        if (!(xv < t)) throw DomainError("wm_right: evaluation point must be below t");
        double v = 0.0;
        for (int p = 0; p < t_index; ++p) {
            if (times[p + 1] <= xv) continue;
            const double slope = (values[p + 1] - values[p]) / (times[p + 1] - times[p]);
            v += slope * (std::pow(times[p + 1] - xv, eta) - pos_pow(times[p] - xv, eta)) / g;
        }
        d.x.push_back(xv);
        d.values.push_back(v);
    }
    return d;
}

FracDerivative wm_right(const NoisePath& z, double eta, int t_index, std::span<const double> x) {
    check_eta(eta);
    if (t_index < 1 || t_index > z.n_steps()) throw std::invalid_argument("wm_right: bad t index");
    FracDerivative d;
    d.eta = eta;
    d.side = FracDerivative::Side::Right;
    const double g = std::tgamma(1.0 + eta);
    const double t = z.times[t_index];
    for (double xv : x) {
        if (!(xv < t)) throw DomainError("wm_right: evaluation point must be below t");
        Eigen::VectorXd v = Eigen::VectorXd::Zero(z.basis->n_modes());
        for (int p = 0; p < t_index; ++p) {
            if (z.times[p + 1] <= xv) continue;
            const double hp = z.times[p + 1] - z.times[p];
            const double wgt = (std::pow(z.times[p + 1] - xv, eta) - pos_pow(z.times[p] - xv, eta)) / (g * hp);
            v += wgt * (z.fields[p + 1].coeffs() - z.fields[p].coeffs());
        }
        d.x.push_back(xv);
        d.values.push_back(v.norm());
        d.fields.push_back(std::move(v));
    }
    return d;
}

void write_derivative_csv(const std::string& path, const FracDerivative& d) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "x,value\n";
    for (std::size_t i = 0; i < d.x.size(); ++i) out << d.x[i] << ',' << d.values[i] << '\n';
}

// ---------------------------------------------------------------------------

Eigen::VectorXd OperatorPath::apply(int j, const Eigen::VectorXd& w) const {
    const Eigen::VectorXd prod = g_nodal[j].cwiseProduct(basis->synthesize(w));
    Eigen::VectorXd c = basis->analyze(prod);
    return c.cwiseProduct(semigroup_multiplier(basis->eigenvalues, t() - times[j], theta));
}

Field OperatorPath::apply(int j, const Field& w) const { return Field(basis, apply(j, w.coeffs())); }

Eigen::VectorXd OperatorPath::apply_at(double x, const Eigen::VectorXd& w) const {
    if (x <= times.front()) return apply(0, w);
    if (x >= times.back()) return apply(n_steps(), w);
    const auto it = std::upper_bound(times.begin(), times.end(), x);
    const int j = static_cast<int>(it - times.begin()) - 1;
    const double lam = (x - times[j]) / (times[j + 1] - times[j]);
    if (lam == 0.0) return apply(j, w);
    return (1.0 - lam) * apply(j, w) + lam * apply(j + 1, w);
}

OperatorPath OperatorPath::constant_multiplier(BasisPtr basis, std::vector<double> times, double g) {
    OperatorPath U;
    U.g_nodal.assign(times.size(), Eigen::VectorXd::Constant(basis->n_nodes(), g));
    U.basis = std::move(basis);
    U.times = std::move(times);
    return U;
}

// ---------------------------------------------------------------------------

namespace {

struct PlanKernels {
    double eta;
    double g1m, g2m, g1p;  // Gamma(1-eta), Gamma(2-eta), Gamma(1+eta)

    double Psi(double y) const { return pos_pow(y, 1.0 - eta) - pos_pow(y - 1.0, 1.0 - eta); }
    // left derivative of the hat centred at 0 (j >= 1 after translation)
    double A(double y) const { return (Psi(y + 1.0) - Psi(y)) / g2m; }
    // left derivative of the half hat at the origin
    double A0(double x) const { return std::pow(x, -eta) / g1m - Psi(x) / g2m; }
    // right derivative of the unit ramp on [0, 1], evaluated at distance r below its left end
    double Phi(double r) const { return (pos_pow(r + 1.0, eta) - pos_pow(r, eta)) / g1p; }
};

struct CellRule {
    std::vector<double> x, w;
};

CellRule graded_rule(int q, double g) {
    auto [u, wu] = gauss_legendre_unit(q);
    CellRule r;
    for (int i = 0; i < q; ++i) {
        const double a = std::pow(u[i], g), b = std::pow(1.0 - u[i], g);
        const double den = a + b;
        r.x.push_back(a / den);
        r.w.push_back(wu[i] * g * std::pow(u[i], g - 1.0) * std::pow(1.0 - u[i], g - 1.0) / (den * den));
    }
    return r;
}

std::mutex g_plan_mutex;
std::map<std::pair<int, double>, std::shared_ptr<const ConvolutionPlan>> g_plan_cache;

std::shared_ptr<const ConvolutionPlan> build_plan(int N, double eta) {
    const PlanKernels k{eta, std::tgamma(1.0 - eta), std::tgamma(2.0 - eta), std::tgamma(1.0 + eta)};
    const CellRule sing = graded_rule(48, 2.0 / (1.0 - eta));
    auto [xr, wr] = gauss_legendre_unit(12);
    const int q = static_cast<int>(xr.size());

    // Tables on the regular rule: A(c + x_i), A0(c + x_i), Phi(m - x_i).
    Eigen::MatrixXd At(N + 2, q), A0t(N + 1, q), Pt(N + 2, q);
    for (int c = 0; c < N + 2; ++c) {
        for (int i = 0; i < q; ++i) {
            At(c, i) = k.A(c - 1 + xr[i]);  // row c holds cell [c-1, c]
            if (c < N + 1) A0t(c, i) = k.A0(c + xr[i]);
            Pt(c, i) = k.Phi(c - xr[i]);
        }
    }

    auto plan = std::make_shared<ConvolutionPlan>();
    plan->N = N;
    plan->eta = eta;
    plan->kappa.assign(N + 1, 0.0);
    plan->k0.assign(N, 0.0);

    // kappa(d) = int_{-1}^{d+1} A(y) Phi(d - y) dy over cells [c, c+1], c = -1..d.
    for (int d = -1; d <= N - 1; ++d) {
        double acc = 0.0;
        for (int c = -1; c <= d; ++c) {
            const bool singular = c <= 1 || c >= d - 1;
            if (singular) {
                for (std::size_t i = 0; i < sing.x.size(); ++i) {
                    const double y = c + sing.x[i];
                    acc += sing.w[i] * k.A(y) * k.Phi(d - y);
                }
            } else {
                // Phi(d - c - x_i) = Pt(d - c, i)
                for (int i = 0; i < q; ++i) acc += wr[i] * At(c + 1, i) * Pt(d - c, i);
            }
        }
        plan->kappa[d + 1] = acc;
    }
    // K(0, p) = int_0^{p+1} A0(x) Phi(p - x) dx
    for (int p = 0; p < N; ++p) {
        double acc = 0.0;
        for (int c = 0; c <= p; ++c) {
            const bool singular = c <= 1 || c >= p - 1;
            if (singular) {
                for (std::size_t i = 0; i < sing.x.size(); ++i) {
                    const double x = c + sing.x[i];
                    acc += sing.w[i] * k.A0(x) * k.Phi(p - x);
                }
            } else {
                for (int i = 0; i < q; ++i) acc += wr[i] * A0t(c, i) * Pt(p - c, i);
            }
        }
        plan->k0[p] = acc;
    }
    return plan;
}

bool is_uniform(std::span<const double> t) {
    if (t.size() < 2) return false;
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (std::abs(t[k] - t[k - 1] - h) > 1e-9 * std::max(h, 1.0)) return false;
    }
    return true;
}

int locate_block(const OperatorPath& U, const NoisePath& z) {
    const double scale = std::max(1.0, std::abs(U.t()));
    for (std::size_t k = 0; k < z.times.size(); ++k) {
        if (std::abs(z.times[k] - U.times.front()) <= 1e-12 * scale) {
            if (k + U.times.size() > z.times.size()) break;
            for (std::size_t j = 0; j < U.times.size(); ++j) {
                if (std::abs(z.times[k + j] - U.times[j]) > 1e-12 * scale) {
                    throw std::invalid_argument("convolution_integral: grids differ");
                }
            }
            return static_cast<int>(k);
        }
    }
    throw std::invalid_argument("convolution_integral: operator grid is not part of the noise grid");
}

Eigen::VectorXd interpolate(const NoisePath& z, double x) {
    if (x <= z.times.front()) return z.fields.front().coeffs();
    if (x >= z.times.back()) return z.fields.back().coeffs();
    const auto it = std::upper_bound(z.times.begin(), z.times.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - z.times.begin()) - 1;
    const double lam = (x - z.times[j]) / (z.times[j + 1] - z.times[j]);
    return (1.0 - lam) * z.fields[j].coeffs() + lam * z.fields[j + 1].coeffs();
}

}  // namespace

std::shared_ptr<const ConvolutionPlan> convolution_plan(int N, double eta) {
    check_eta(eta);
    if (N < 1) throw std::invalid_argument("convolution_plan: N must be positive");
    const auto key = std::make_pair(N, eta);
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        auto it = g_plan_cache.find(key);
        if (it != g_plan_cache.end()) return it->second;
    }
    auto plan = build_plan(N, eta);
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    return g_plan_cache.emplace(key, std::move(plan)).first->second;
}

Field convolution_integral(const OperatorPath& U, const NoisePath& z, double eta, const ParamSet* params) {
    check_eta(eta);
    if (params && !(params->alpha < eta && eta < params->gamma)) {
        throw AdmissibilityError("convolution_integral: eta must lie in (alpha, gamma)");
    }
    if (!is_uniform(U.times)) throw std::invalid_argument("convolution_integral: grid must be uniform");
    const int off = locate_block(U, z);
    const int N = U.n_steps();
    const auto plan = convolution_plan(N, eta);
    const int m = U.basis->n_modes();

    Eigen::VectorXd result = Eigen::VectorXd::Zero(m);
    for (int j = 0; j <= N; ++j) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
        for (int p = std::max(0, j - 1); p < N; ++p) {
            y += plan->K(j, p) * (z.fields[off + p + 1].coeffs() - z.fields[off + p].coeffs());
        }
        result += U.apply(j, y);
    }
    return Field(U.basis, std::move(result));
}

Field rs_integral_oracle(const OperatorPath& U, const NoisePath& z, int N) {
    const double s = U.times.front(), t = U.t();
    const int m = U.basis->n_modes();
    Eigen::VectorXd result = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd z_prev = interpolate(z, s);
    for (int k = 0; k < N; ++k) {
        const double x0 = s + (t - s) * k / N;
        const double x1 = s + (t - s) * (k + 1) / N;
        Eigen::VectorXd z_next = interpolate(z, x1);
        const Eigen::VectorXd dz = z_next - z_prev;
        if (dz.squaredNorm() > 0.0) result += U.apply_at(x0, dz);
        z_prev = std::move(z_next);
    }
    return Field(U.basis, std::move(result));
}

std::string to_string(IntegralRoute r) {
    return r == IntegralRoute::Definitional ? "definitional" : "young";
}

Eigen::MatrixXd stochastic_convolution(const Eigen::VectorXd& eigenvalues, double h,
                                       const std::vector<Eigen::MatrixXd>& M,
                                       const Eigen::MatrixXd& dz, double theta,
                                       IntegralRoute route, double eta) {
    const int N = static_cast<int>(dz.rows());
    const int m = static_cast<int>(eigenvalues.size());
    const bool identity = M.empty();
    if (!identity && static_cast<int>(M.size()) != N + 1) {
        throw std::invalid_argument("stochastic_convolution: need one multiplier per node");
    }
    auto mult = [&](int j, const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return identity ? v : Eigen::VectorXd(M[j] * v);
    };

    Eigen::MatrixXd I = Eigen::MatrixXd::Zero(N + 1, m);
    if (route == IntegralRoute::Young) {
        const Eigen::VectorXd e1 = semigroup_multiplier(eigenvalues, h, theta);
        Eigen::VectorXd cur = Eigen::VectorXd::Zero(m);
        for (int k = 1; k <= N; ++k) {
            cur = e1.cwiseProduct(cur + mult(k - 1, dz.row(k - 1).transpose()));
            I.row(k) = cur.transpose();
        }
        return I;
    }

    const auto plan = convolution_plan(N, eta);
    std::vector<Eigen::VectorXd> decay(N + 1);
    for (int d = 0; d <= N; ++d) decay[d] = semigroup_multiplier(eigenvalues, d * h, theta);

    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(N + 1, m);  // row j: sum_p K(j,p) dz_p so far
    for (int k = 1; k <= N; ++k) {
        const int p = k - 1;
        for (int j = 0; j <= k; ++j) Y.row(j) += plan->K(j, p) * dz.row(p);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
        for (int j = 0; j <= k; ++j) acc += decay[k - j].cwiseProduct(mult(j, Y.row(j).transpose()));
        I.row(k) = acc.transpose();
    }
    return I;
}

}  // namespace mmspde
