#include "mmspde/noise.hpp"

#include "mmspde/errors.hpp"
#include "mmspde/numerics.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <tuple>

namespace mmspde {

namespace {

struct CholeskyFactor {
    Eigen::MatrixXd L;
    bool jitter = false;
};

std::mutex g_fbm_mutex;
std::map<std::tuple<int, double, double>, std::shared_ptr<const CholeskyFactor>> g_fbm_cache;

std::shared_ptr<const CholeskyFactor> fbm_factor(int N, double t0, double H) {
    const auto key = std::make_tuple(N, t0, H);
    {
        std::lock_guard<std::mutex> lock(g_fbm_mutex);
        auto it = g_fbm_cache.find(key);
        if (it != g_fbm_cache.end()) return it->second;
    }
    const double h = t0 / N;
    const double two_h = 2.0 * H;
    Eigen::MatrixXd R(N, N);
    for (int i = 0; i < N; ++i) {
        const double s = (i + 1) * h;
        for (int j = 0; j <= i; ++j) {
            const double t = (j + 1) * h;
            R(i, j) = R(j, i) =
                0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(s - t), two_h));
        }
    }
    auto f = std::make_shared<CholeskyFactor>();
    Eigen::LLT<Eigen::MatrixXd> llt(R);
    double jitter = 1e-14 * R.diagonal().mean();
    for (int attempt = 0; llt.info() != Eigen::Success; ++attempt) {
        if (attempt > 12) throw std::runtime_error("gen_fbm: covariance is not positive definite");
        Eigen::MatrixXd Rj = R;
        Rj.diagonal().array() += jitter;
        llt.compute(Rj);
        jitter *= 10.0;
        f->jitter = true;
    }
    if (f->jitter) {
        std::cerr << "warning: fBm covariance needed diagonal jitter (N=" << N << ", H=" << H
                  << ")\n";
    }
    f->L = llt.matrixL();
    std::lock_guard<std::mutex> lock(g_fbm_mutex);
    return g_fbm_cache.emplace(key, std::move(f)).first->second;
}

}  // namespace

FbmPath gen_fbm(int N, double t0, double hurst, std::uint64_t seed) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("gen_fbm: H must be in (0,1)");
    if (!(t0 > 0.0)) throw DomainError("gen_fbm: t0 must be positive");
    if (N < 1) throw DomainError("gen_fbm: N must be positive");
    if (N > kMaxFbmSteps) throw ResourceLimitError("gen_fbm: N exceeds 2^14");
    const auto factor = fbm_factor(N, t0, hurst);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd xi(N);
    for (int i = 0; i < N; ++i) xi(i) = normal(rng);
    const Eigen::VectorXd b = factor->L.triangularView<Eigen::Lower>() * xi;

    FbmPath p;
    p.hurst = hurst;
    p.seed = seed;
    p.jitter_applied = factor->jitter;
    p.times.resize(N + 1);
    p.values.resize(N + 1);
    p.times[0] = 0.0;
    p.values[0] = 0.0;
    for (int k = 1; k <= N; ++k) {
        p.times[k] = t0 * k / N;
        p.values[k] = b(k - 1);
    }
    return p;
}

void clear_fbm_cache() {
    std::lock_guard<std::mutex> lock(g_fbm_mutex);
    g_fbm_cache.clear();
}

// ---------------------------------------------------------------------------

double SeriesNoiseSpec::coefficient(double lambda) const {
    if (rho == 0.0 || lambda <= 0.0) return c_q;
    return c_q * std::pow(lambda, -rho / 2.0);
}

SummabilityReport check_summability(const SeriesNoiseSpec& spec, const SpectralBasis& basis) {
    SummabilityReport rep;
    const int n = spec.n_terms > 0 ? std::min(spec.n_terms, basis.n_modes()) : basis.n_modes();
    const double w = basis.walk_dim;
    const double d_S = basis.spectral_dim;
    const double e = -spec.beta_star + spec.a() - 2.0 * spec.b / w;

    double last = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lam = basis.eigenvalues(i);
        const double q = spec.coefficient(lam);
        last = lam > 0.0 ? q * q * std::pow(lam, e) : q * q;
        rep.partial_sum += last;
    }
    rep.implied_beta_star_min = d_S / 2.0 - spec.rho + spec.a() - 2.0 * spec.b / w;
    rep.decay_exponent = (2.0 / d_S) * (spec.rho - e);

    std::ostringstream msg;
    if (rep.decay_exponent > 1.0) {
        const double tail = last * n / (rep.decay_exponent - 1.0);
        rep.relative_tail = tail / (rep.partial_sum + tail);
        rep.ok = rep.relative_tail < 1e-3;
        if (!rep.ok) msg << "relative tail " << rep.relative_tail << " >= 1e-3 at " << n << " terms";
    } else {
        rep.relative_tail = 1.0;
        msg << "terms decay like i^-" << rep.decay_exponent << ", series diverges (need beta* > "
            << rep.implied_beta_star_min << ")";
    }
    if (!rep.ok && spec.flat()) {
        rep.flat_waiver = true;
        msg << "; flat spectrum accepted as white-in-space noise";
    }
    rep.message = msg.str();
    return rep;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd NoisePath::coefficient_matrix() const {
    const int m = basis ? basis->n_modes() : 0;
    Eigen::MatrixXd c(static_cast<Eigen::Index>(fields.size()), m);
    for (std::size_t k = 0; k < fields.size(); ++k) c.row(k) = fields[k].coeffs().transpose();
    return c;
}

NoisePath NoisePath::from_coefficients(BasisPtr basis, std::vector<double> times,
                                       const Eigen::MatrixXd& coeffs) {
    if (coeffs.rows() != static_cast<Eigen::Index>(times.size()) ||
        coeffs.cols() != basis->n_modes()) {
        throw std::invalid_argument("NoisePath::from_coefficients: shape mismatch");
    }
    NoisePath z;
    z.basis = basis;
    z.times = std::move(times);
    z.fields.reserve(z.times.size());
    for (Eigen::Index k = 0; k < coeffs.rows(); ++k) {
        z.fields.emplace_back(basis, coeffs.row(k).transpose());
    }
    return z;
}

NoisePath NoisePath::zero(BasisPtr basis, int N, double t0) {
    std::vector<double> t(N + 1);
    for (int k = 0; k <= N; ++k) t[k] = t0 * k / N;
    const Eigen::MatrixXd c = Eigen::MatrixXd::Zero(N + 1, basis->n_modes());
    return from_coefficients(std::move(basis), std::move(t), c);
}

NoisePath gen_series_noise(const SeriesNoiseSpec& spec, BasisPtr basis, int N, double t0,
                           std::uint64_t seed) {
    if (spec.n_terms > basis->n_modes()) {
        throw std::invalid_argument("gen_series_noise: n_terms exceeds the basis size");
    }
    const SummabilityReport s = check_summability(spec, *basis);
    if (!s.ok && !s.flat_waiver) throw SummabilityError("gen_series_noise: " + s.message);
    if (s.flat_waiver) {
        static std::once_flag warned;
        std::call_once(warned, [&] { std::cerr << "warning: " << s.message << "\n"; });
    }

    const int m = basis->n_modes();
    const int n_terms = spec.n_terms > 0 ? spec.n_terms : m;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(N + 1, m);
    std::vector<double> times;
    for (int i = 0; i < n_terms; ++i) {
        const FbmPath b = gen_fbm(N, t0, spec.hurst, derive_seed(seed, static_cast<std::uint64_t>(i)));
        const double q = spec.coefficient(basis->eigenvalues(i));
        for (int k = 0; k <= N; ++k) c(k, i) = q * b.values[k];
        if (times.empty()) times = b.times;
    }
    if (times.empty()) {
        times.resize(N + 1);
        for (int k = 0; k <= N; ++k) times[k] = t0 * k / N;
    }
    NoisePath z = NoisePath::from_coefficients(std::move(basis), std::move(times), c);
    z.spec = spec;
    z.seed = seed;
    return z;
}

NoisePath subsample(const NoisePath& z, int stride) {
    if (stride < 1 || z.n_steps() % stride != 0) {
        throw std::invalid_argument("subsample: stride must divide the number of steps");
    }
    NoisePath out;
    out.basis = z.basis;
    out.spec = z.spec;
    out.seed = z.seed;
    for (std::size_t k = 0; k < z.times.size(); k += stride) {
        out.times.push_back(z.times[k]);
        out.fields.push_back(z.fields[k]);
    }
    return out;
}

NoisePath combine(double a, const NoisePath& z1, double b, const NoisePath& z2) {
    if (z1.times.size() != z2.times.size() || z1.basis != z2.basis) {
        throw std::invalid_argument("combine: paths live on different grids");
    }
    NoisePath out = z1;
    out.holder_report.reset();
    for (std::size_t k = 0; k < out.fields.size(); ++k) {
        out.fields[k] = a * z1.fields[k] + b * z2.fields[k];
    }
    return out;
}

std::vector<Field> regulated(const NoisePath& z, int t_index) {
    if (t_index < 0 || t_index > z.n_steps()) throw std::out_of_range("regulated: bad index");
    std::vector<Field> out;
    out.reserve(t_index + 1);
    const Field& zt = z.fields[t_index];
    for (int k = 0; k < t_index; ++k) out.push_back(z.fields[k] - zt);
    out.push_back(Field::zero(z.basis));
    return out;
}

HolderEstimate holder_in_dual_norm(const NoisePath& z, double beta, const HolderOptions& options) {
    const Eigen::VectorXd& lam = z.basis->eigenvalues;
    auto dist = [&](int i, int j) {
        return norm_H_spectral(z.fields[j].coeffs() - z.fields[i].coeffs(), lam, -beta);
    };
    return estimate_holder(z.times, dist, options);
}

}  // namespace mmspde
