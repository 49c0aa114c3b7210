#include <doctest.h>

#include "mmspde/errors.hpp"
#include "mmspde/spectral_space.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace mmspde;

TEST_CASE("interval basis: eigenpairs and orthonormality") {
    const auto b = build_interval_basis(16, 64);
    CHECK(b->n_modes() == 16);
    CHECK(b->n_nodes() == 64);
    for (int i = 0; i < 16; ++i) {
        CHECK(b->eigenvalues(i) == doctest::Approx(std::pow((i + 1) * std::numbers::pi, 2)).epsilon(1e-14));
    }
    CHECK(orthonormality_defect(*b) < 1e-12);
    CHECK(b->spectral_dim == doctest::Approx(1.0));
    CHECK(b->walk_dim == doctest::Approx(2.0));
}

TEST_CASE("interval basis rejects coarse node grids") {
    CHECK_THROWS_AS(build_interval_basis(16, 40), AliasingError);
}

TEST_CASE("interval eigen residual shrinks with the grid") {
    const auto coarse = build_interval_basis(4, 64);
    const auto fine = build_interval_basis(4, 256);
    const double rc = eigen_residual(*coarse, 1);
    const double rf = eigen_residual(*fine, 1);
    CHECK(rf < rc / 10.0);
}

TEST_CASE("gasket vertex counts") {
    CHECK(gasket_vertex_count(0) == 3);
    CHECK(gasket_vertex_count(1) == 6);
    CHECK(gasket_vertex_count(2) == 15);
    CHECK(gasket_vertex_count(3) == 42);
}

TEST_CASE("gasket level 0 and level 1 spectra") {
    const auto b0 = build_gasket_basis(0);
    CHECK(b0->eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b0->eigenvalues(1) == doctest::Approx(3.0));
    CHECK(b0->eigenvalues(2) == doctest::Approx(3.0));

    // 5 x graph Laplacian of the six-vertex graph, computed independently
    const std::vector<double> expected = {0.0, 8.48612181, 8.48612181, 20.0, 26.51387819, 26.51387819};
    const auto b1 = build_gasket_basis(1);
    REQUIRE(b1->n_modes() == 6);
    CHECK(std::abs(b1->eigenvalues(0)) < 1e-10);
    for (int i = 1; i < 6; ++i) CHECK(b1->eigenvalues(i) == doctest::Approx(expected[i]).epsilon(1e-8));
    CHECK(orthonormality_defect(*b1) < 1e-10);
    CHECK(eigen_residual(*b1, 3) < 1e-9);
}

TEST_CASE("gasket level limit") {
    CHECK_THROWS_AS(build_gasket_basis(9), ResourceLimitError);
}

TEST_CASE("gasket dimensions and Weyl fit") {
    const auto b = build_gasket_basis(3);
    CHECK(b->hausdorff_dim == doctest::Approx(std::log(3.0) / std::log(2.0)));
    CHECK(b->walk_dim == doctest::Approx(std::log(5.0) / std::log(2.0)));
    CHECK(b->spectral_dim == doctest::Approx(2.0 * std::log(3.0) / std::log(5.0)));
    const WeylFit w = fit_weyl_law(*b);
    CHECK(w.spectral_dim == doctest::Approx(1.365).epsilon(0.05));
}

TEST_CASE("interval heat kernel against the method of images") {
    const auto b = build_interval_basis(64, 257);
    CHECK(truncation_ok(*b, 0.01));
    CHECK(heat_kernel(*b, 0.01, 128, 128) == doctest::Approx(2.82094791766042710).epsilon(1e-10));
    CHECK(heat_kernel(*b, 0.05, 64, 128) == doctest::Approx(0.84670844633559400).epsilon(1e-10));
}

TEST_CASE("heat kernel symmetry and semigroup property") {
    const auto b = build_gasket_basis(2);
    const double t = 0.02, s = 0.03;
    CHECK(heat_kernel(*b, t, 1, 7) == doctest::Approx(heat_kernel(*b, t, 7, 1)));
    const Eigen::VectorXd r1 = heat_kernel_row(*b, t, 2);
    const Eigen::VectorXd r2 = heat_kernel_row(*b, s, 9);
    const double ck = (b->weights.array() * r1.array() * r2.array()).sum();
    CHECK(ck == doctest::Approx(heat_kernel(*b, t + s, 2, 9)).epsilon(1e-8));
}

TEST_CASE("heat kernel rejects non-positive times") {
    const auto b = build_interval_basis(8, 32);
    CHECK_THROWS_AS(heat_kernel(*b, 0.0, 1, 1), DomainError);
}

TEST_CASE("basis id is stable and content sensitive") {
    const auto a = build_interval_basis(8, 32);
    const auto b = build_interval_basis(8, 32);
    const auto c = build_interval_basis(8, 33);
    CHECK(a->id() == b->id());
    CHECK(a->id() != c->id());
}

TEST_CASE("HKE sandwich fit on the gasket") {
    const auto b = build_gasket_basis(3);
    const HeatKernelModel m = make_heat_kernel_model(b);
    std::vector<double> ts;
    for (int k = 0; k < 12; ++k) ts.push_back(1e-3 * std::pow(2.0, k * 0.5));
    const HkeFitReport r = fit_hke_bounds(m, ts, 0.3);
    CHECK(r.success);
    CHECK(r.integrable);
    CHECK(std::isfinite(r.integrability_integral));
    CHECK(r.phi_lower.c <= r.phi_upper.c);
    CHECK(r.phi_upper.exponent == doctest::Approx(b->walk_dim / (b->walk_dim - 1.0)));
}
