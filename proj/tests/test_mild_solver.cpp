#include <doctest.h>

#include "mmspde/errors.hpp"
#include "mmspde/mild_solver.hpp"
#include "mmspde/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace mmspde;

namespace {
ParamSet interval_params() {
    ParamSet p;
    p.alpha = 0.21;
    p.beta = 0.35;
    p.gamma = 0.3;
    p.delta = 0.45;
    p.d_S = 1.0;
    return p;
}

ParamSet gasket_params(const SpectralBasis& b) {
    ParamSet p;
    p.alpha = 0.2;
    p.beta = 0.3;
    p.gamma = 0.25;
    p.delta = 0.4;
    p.d_S = b.spectral_dim;
    p.w = b.walk_dim;
    return p;
}
}  // namespace

TEST_CASE("saturating map and its derivative bounds") {
    const ScalarMap g = ScalarMap::saturating(2.0, 1.5);
    CHECK(g(0.7) == doctest::Approx(1.5 * 2.0 * std::tanh(0.35)));
    CHECK(g.d1(0.0) == doctest::Approx(1.5));
    double m2 = 0.0, m3 = 0.0;
    for (int i = -4000; i <= 4000; ++i) {
        const double s = i * 1e-3;
        m2 = std::max(m2, std::abs(g.d2(s)));
        const double d3 = (g.d2(s + 1e-5) - g.d2(s - 1e-5)) / 2e-5;
        m3 = std::max(m3, std::abs(d3));
    }
    CHECK(g.bound_d1() == doctest::Approx(1.5));
    CHECK(g.bound_d2() == doctest::Approx(m2).epsilon(1e-5));
    CHECK(g.bound_d3() == doctest::Approx(m3).epsilon(1e-4));
    CHECK(ScalarMap::linear(3.0).bound_d2() == 0.0);
    CHECK(nonlinearity_kind_from_string(to_string(NonlinearityKind::SmoothSaturating)) ==
          NonlinearityKind::SmoothSaturating);
    CHECK_THROWS(nonlinearity_kind_from_string("cubic"));
}

TEST_CASE("non-finite nodal values raise PropagationError") {
    const auto b = build_interval_basis(4, 16);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
    c(1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(apply_nonlinearity(ScalarMap::linear(1.0), Field(b, c)), PropagationError);
}

TEST_CASE("deterministic convolution against quadrature") {
    const int N = 256;
    Eigen::VectorXd lam(2);
    lam << std::numbers::pi * std::numbers::pi, 4.0 * std::numbers::pi * std::numbers::pi;
    Eigen::MatrixXd Fc(N + 1, 2);
    for (int k = 0; k <= N; ++k) Fc.row(k).setConstant(std::sin(3.0 * k / N));
    const Eigen::MatrixXd J = deterministic_convolution_path(lam, 1.0 / N, Fc);
    CHECK(J(0, 0) == 0.0);
    CHECK(J(N, 0) == doctest::Approx(0.041001490282397286).epsilon(1e-7));
    CHECK(J(N, 1) == doctest::Approx(0.005448755610028527).epsilon(1e-7));
}

TEST_CASE("zero noise and zero nonlinearity give the heat flow") {
    const auto b = build_interval_basis(16, 64);
    const Field f = Field::mode(b, 0) + 0.5 * Field::mode(b, 3);
    SolverOptions o;
    o.N_time = 64;
    const MildSolution u = solve_mild(f, Nonlinearity::zero(), NoisePath::zero(b, 64, 1.0), interval_params(), o);
    CHECK(u.converged);
    REQUIRE(u.path.values.size() == 65);
    const double t = u.path.times[40];
    CHECK(u.path.values[40].coeffs()(0) == doctest::Approx(std::exp(-b->eigenvalues(0) * t)).epsilon(1e-12));
    CHECK(u.path.values[40].coeffs()(3) == doctest::Approx(0.5 * std::exp(-b->eigenvalues(3) * t)).epsilon(1e-12));
}

TEST_CASE("linear drift matches the per-mode closed form") {
    const auto b = build_interval_basis(16, 64);
    const Field f = Field::mode(b, 0) + 0.3 * Field::mode(b, 2);
    Nonlinearity nl;
    nl.F = ScalarMap::linear(2.0);
    SolverOptions o;
    o.N_time = 512;
    o.tol = 1e-12;
    const MildSolution u = solve_mild(f, nl, NoisePath::zero(b, 512, 1.0), interval_params(), o);
    REQUIRE(u.converged);
    double err = 0.0;
    for (std::size_t k = 0; k < u.path.times.size(); ++k) {
        const double t = u.path.times[k];
        err = std::max(err, std::abs(u.path.values[k].coeffs()(0) - std::exp((2.0 - b->eigenvalues(0)) * t)));
        err = std::max(err, std::abs(u.path.values[k].coeffs()(2) - 0.3 * std::exp((2.0 - b->eigenvalues(2)) * t)));
    }
    CHECK(err < 1e-6);
}

TEST_CASE("linear noise coefficient on the constant gasket mode") {
    const auto b = build_gasket_basis(1);
    const double s = b->eigenvectors(0, 0) > 0.0 ? 1.0 : -1.0;
    const int N = 256;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(N + 1, b->n_modes());
    std::vector<double> t(N + 1);
    for (int k = 0; k <= N; ++k) {
        t[k] = static_cast<double>(k) / N;
        c(k, 0) = 0.5 * std::sin(2.0 * t[k]);
    }
    const NoisePath z = NoisePath::from_coefficients(b, t, c);
    Nonlinearity nl;
    nl.F = ScalarMap::linear(0.3);
    nl.G = ScalarMap::linear(0.8);
    const MildSolution u = solve_mild(Field::mode(b, 0, 1.2), nl, z, gasket_params(*b));
    REQUIRE(u.converged);
    double err = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double exact = 1.2 * std::exp(0.3 * t[k] + s * 0.8 * c(k, 0));
        err = std::max(err, std::abs(u.path.values[k].coeffs()(0) - exact));
        err = std::max(err, u.path.values[k].coeffs().tail(b->n_modes() - 1).cwiseAbs().maxCoeff());
    }
    CHECK(err < 1e-4);
}

TEST_CASE("solver rejects inadmissible parameters") {
    const auto b = build_interval_basis(16, 64);
    ParamSet p = interval_params();
    p.gamma = 0.5;
    SolverOptions o;
    o.N_time = 64;
    CHECK_THROWS_AS(solve_mild(Field::mode(b, 0), Nonlinearity::zero(), NoisePath::zero(b, 64, 1.0), p, o),
                    AdmissibilityError);
    o.eta = 0.1;
    CHECK_THROWS_AS(solve_mild(Field::mode(b, 0), Nonlinearity::zero(), NoisePath::zero(b, 64, 1.0), interval_params(), o),
                    AdmissibilityError);
}

TEST_CASE("stochastic solve is deterministic and contracts") {
    const auto b = build_interval_basis(16, 64);
    SeriesNoiseSpec s;
    s.rho = 1.5;
    const NoisePath z = gen_series_noise(s, b, 512, 1.0, 77);
    Nonlinearity nl;
    nl.F = ScalarMap::saturating(1.0, 0.5);
    nl.G = ScalarMap::saturating(1.0, 1.0);
    const Field f = Field::mode(b, 0) + 0.5 * Field::mode(b, 1);
    const MildSolution a = solve_mild(f, nl, z, interval_params());
    const MildSolution c = solve_mild(f, nl, z, interval_params());
    REQUIRE(a.converged);
    CHECK(a.N_time == 256);
    CHECK(a.geometric());
    CHECK(a.contraction_ratio() < 0.5);
    CHECK(a.path.coefficient_matrix() == c.path.coefficient_matrix());
}

TEST_CASE("fractional dissipation with zero forcing") {
    const auto b = build_interval_basis(8, 32);
    ParamSet p = interval_params();
    SolverOptions o;
    o.N_time = 64;
    const std::vector<NoisePath> z{NoisePath::zero(b, 64, 1.0)};
    const MildSolution u = solve_with_fractional_dissipation(Field::mode(b, 1), Nonlinearity::zero(), z, p, 0.5, o);
    const double t = u.path.times[32];
    CHECK(u.path.values[32].coeffs()(1) == doctest::Approx(std::exp(-std::sqrt(b->eigenvalues(1)) * t)).epsilon(1e-12));
}
