#include <doctest.h>

#include "mmspde/function_spaces.hpp"

#include <cmath>
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
}  // namespace

TEST_CASE("norms of a single mode") {
    const auto b = build_interval_basis(8, 32);
    const Field e = Field::mode(b, 2, 3.0);
    const double lam = b->eigenvalues(2);
    CHECK(norm_H(e, 0.0) == doctest::Approx(3.0));
    CHECK(norm_H(e, 0.5) == doctest::Approx(3.0 + 3.0 * std::pow(lam, 0.25)));
    CHECK(norm_H(e, -0.4) == doctest::Approx(3.0 * std::pow(1.0 + lam, -0.2)));
    CHECK(norm_H_spectral(e, 0.5) == doctest::Approx(3.0 * std::pow(1.0 + lam, 0.25)));
    CHECK(norm_H_inf(e, 0.0) == doctest::Approx(3.0 + e.sup_nodal()));
}

TEST_CASE("field arithmetic and nodal round trip") {
    const auto b = build_interval_basis(8, 64);
    const Field u = Field::mode(b, 0) + 0.5 * Field::mode(b, 3);
    const Field v = Field::from_nodal(b, u.nodal());
    CHECK((u - v).l2() < 1e-12);
    CHECK(inner(u, u) == doctest::Approx(1.25));
}

TEST_CASE("spectral multipliers") {
    const auto b = build_interval_basis(8, 32);
    const Field e = Field::mode(b, 1);
    const double lam = b->eigenvalues(1);
    CHECK(semigroup_apply(e, 0.01).coeffs()(1) == doctest::Approx(std::exp(-lam * 0.01)));
    CHECK(subordinated_apply(e, 0.1, 0.5).coeffs()(1) == doctest::Approx(std::exp(-std::sqrt(lam) * 0.1)));
    CHECK(bessel_potential(e, 1.0).coeffs()(1) == doctest::Approx(std::pow(1.0 + lam, -0.5)));
    CHECK(fractional_power(e, 0.5).coeffs()(1) == doctest::Approx(std::sqrt(lam)));
    const Eigen::VectorXd m = semigroup_multiplier(b->eigenvalues, 0.2, 1.0);
    CHECK(m(0) == doctest::Approx(std::exp(-b->eigenvalues(0) * 0.2)));
}

TEST_CASE("semigroup property") {
    const auto b = build_gasket_basis(2);
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(b->n_modes(), 1.0, 0.1);
    const Field u(b, c);
    const Field a = semigroup_apply(semigroup_apply(u, 0.01), 0.02);
    const Field d = semigroup_apply(u, 0.03);
    CHECK((a - d).l2() < 1e-13);
}

TEST_CASE("parameter admissibility") {
    ParamSet p = interval_params();
    CHECK(p.admissible_P());
    CHECK(p.gamma_max_P() == doctest::Approx(0.365));
    CHECK(p.eta_admissible(0.255));
    CHECK_FALSE(p.eta_admissible(0.2));
    CHECK_FALSE(p.eta_admissible(0.31));
    CHECK(p.diagnose().empty());

    p.gamma = 0.4;
    CHECK_FALSE(p.admissible());
    CHECK_FALSE(p.diagnose().empty());

    ParamSet w;
    w.alpha = 0.2;
    w.beta = 0.5;
    w.delta = 0.5;
    w.gamma = 0.25;
    w.d_S = 1.0;
    CHECK_FALSE(w.admissible_P());
    CHECK(w.admissible_lowdim());
    CHECK(w.gamma_max_lowdim() == doctest::Approx(0.3));
}

TEST_CASE("pointwise product of the first mode with itself") {
    const auto b = build_interval_basis(8, 256);
    const ProductResult r = pointwise_product(Field::mode(b, 0), Field::mode(b, 0), interval_params());
    CHECK_FALSE(r.aliasing);
    CHECK(r.q2_proxy);
    // <2 sin^2, sqrt2 sin> = 8 sqrt2 / (3 pi)
    CHECK(r.value.coeffs()(0) == doctest::Approx(8.0 * std::sqrt(2.0) / (3.0 * std::numbers::pi)).epsilon(1e-4));
    CHECK(std::abs(r.value.coeffs()(1)) < 1e-10);
}

TEST_CASE("multiplication matrix agrees with the nodal product") {
    const auto b = build_interval_basis(6, 32);
    const Field g = Field::mode(b, 0) + 0.3 * Field::mode(b, 2);
    const Field h = Field::mode(b, 1) - 0.2 * Field::mode(b, 4);
    const Eigen::MatrixXd M = multiplication_matrix(*b, g.nodal());
    const ProductResult r = pointwise_product(g, h, interval_params());
    CHECK((M * h.coeffs() - r.value.coeffs()).norm() < 1e-12);
}

TEST_CASE("products of top modes resolve on the minimal node grid") {
    const auto b = build_interval_basis(16, 64);
    const ProductResult r = pointwise_product(Field::mode(b, 15), Field::mode(b, 15), interval_params());
    CHECK_FALSE(r.aliasing);
    // 2 sin^2(16 pi x) = 1 - cos(32 pi x) has no sine content at 16 pi
    CHECK(std::abs(r.value.coeffs()(15)) < 1e-10);
}

TEST_CASE("single-mode smoothing maximum") {
    for (double lam : {1.0, 9.8696, 250.0}) {
        const SingleModeMaximum m = single_mode_smoothing_max(lam, 0.5);
        CHECK(m.value == doctest::Approx(0.55069531490318375).epsilon(1e-8));
        CHECK(m.t_star == doctest::Approx(0.25 / lam).epsilon(1e-4));
    }
    CHECK(single_mode_smoothing_max(40.0, 1.0).value == doctest::Approx(0.42888194248035340).epsilon(1e-8));
}

TEST_CASE("semigroup estimate ratios are finite") {
    const auto b = build_interval_basis(16, 64);
    std::vector<double> ts;
    for (int k = 1; k <= 10; ++k) ts.push_back(std::pow(2.0, -k));
    const SemigroupEstimateReport r = verify_semigroup_estimates(b, 0.5, 0.35, ts);
    CHECK(r.all_finite);
    CHECK(r.smoothing <= 0.5507 + 1e-6);
    CHECK(r.continuity > 0.0);
    CHECK(r.dual_smoothing > 0.0);
    CHECK(r.dual_continuity > 0.0);
}

TEST_CASE("product constant Monte Carlo") {
    const auto b = build_interval_basis(16, 64);
    const ProductConstantReport r = measure_product_constant(b, interval_params(), 50, 11);
    CHECK(r.samples == 50);
    CHECK(r.aliasing_count == 0);
    CHECK(std::isfinite(r.max_ratio));
    CHECK(r.max_ratio >= r.mean_ratio);
}
