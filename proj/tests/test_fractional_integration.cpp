#include <doctest.h>

#include "mmspde/errors.hpp"
#include "mmspde/fractional_integration.hpp"

#include <cmath>
#include <vector>

using namespace mmspde;

TEST_CASE("left derivative closed forms") {
    CHECK(wm_left([](double) { return 1.0; }, 0.4, 1.0) == doctest::Approx(0.67150497244207334).epsilon(1e-6));
    CHECK(wm_left([](double s) { return s; }, 0.4, 1.0) == doctest::Approx(1.11917495407012225).epsilon(1e-4));
    CHECK(wm_left([](double s) { return s * s; }, 0.3, 1.0) == doctest::Approx(1.29476165355725360).epsilon(1e-4));
    // scaling s^{mu - eta}
    CHECK(wm_left([](double s) { return s; }, 0.4, 0.25) ==
          doctest::Approx(1.11917495407012225 * std::pow(0.25, 0.6)).epsilon(1e-4));
}

TEST_CASE("right derivative of the regulated identity") {
    CHECK(wm_right([](double x) { return x; }, 0.3, 0.5, 1.0) == doctest::Approx(0.90504614768952918).epsilon(1e-4));
}

TEST_CASE("domain checks") {
    CHECK_THROWS_AS(wm_left([](double) { return 1.0; }, 1.2, 1.0), DomainError);
    CHECK_THROWS_AS(wm_right([](double x) { return x; }, 0.3, 1.5, 1.0), DomainError);
}

TEST_CASE("grid derivatives are exact on linear data") {
    std::vector<double> t, v;
    for (int k = 0; k <= 8; ++k) {
        t.push_back(k / 8.0);
        v.push_back(k / 8.0);
    }
    const std::vector<double> x = {0.5, 1.0};
    const FracDerivative L = wm_left(t, v, 0.4, x);
    CHECK(L.values[1] == doctest::Approx(1.11917495407012225).epsilon(1e-10));
    CHECK(L.values[0] == doctest::Approx(1.11917495407012225 * std::pow(0.5, 0.6)).epsilon(1e-10));
    const std::vector<double> xr = {0.5};
    const FracDerivative R = wm_right(t, v, 0.3, 8, xr);
    CHECK(R.values[0] == doctest::Approx(0.90504614768952918).epsilon(1e-10));
}

TEST_CASE("pairing weights reduce to the trapezoid rule") {
    const auto plan = convolution_plan(64, 0.4);
    for (int j = 0; j <= 65; ++j) {
        for (int p = 0; p < 64; ++p) {
            const double expect = 0.5 * ((j == p ? 1.0 : 0.0) + (j == p + 1 ? 1.0 : 0.0));
            CHECK(std::abs(plan->K(j, p) - expect) < 1e-9);
        }
    }
    CHECK(convolution_plan(64, 0.4).get() == plan.get());
}

TEST_CASE("convolution integral against the heat semigroup") {
    const auto b = build_interval_basis(8, 32);
    const int N = 256;
    const double lam = b->eigenvalues(0);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(N + 1, 8);
    std::vector<double> t(N + 1);
    for (int k = 0; k <= N; ++k) {
        t[k] = static_cast<double>(k) / N;
        c(k, 0) = t[k];
    }
    const NoisePath z = NoisePath::from_coefficients(b, t, c);
    const OperatorPath U = OperatorPath::constant_multiplier(b, t, 1.0);
    const Field I = convolution_integral(U, z, 0.25);
    CHECK(I.coeffs()(0) == doctest::Approx((1.0 - std::exp(-lam)) / lam).epsilon(1e-4));
    CHECK(std::abs(I.coeffs()(1)) < 1e-12);
    const Field rs = rs_integral_oracle(U, z, 4096);
    CHECK(I.coeffs()(0) == doctest::Approx(rs.coeffs()(0)).epsilon(1e-3));
}

TEST_CASE("convolution integral enforces the eta window") {
    const auto b = build_interval_basis(8, 32);
    std::vector<double> t = {0.0, 0.5, 1.0};
    const NoisePath z = NoisePath::zero(b, 2, 1.0);
    const OperatorPath U = OperatorPath::constant_multiplier(b, t, 1.0);
    ParamSet p;
    p.alpha = 0.21;
    p.gamma = 0.3;
    CHECK_THROWS_AS(convolution_integral(U, z, 0.1, &p), AdmissibilityError);
    CHECK_NOTHROW(convolution_integral(U, z, 0.25, &p));
}

TEST_CASE("definitional and Young routes converge together") {
    const auto b = build_interval_basis(4, 16);
    auto gap = [&](int N) {
        const double h = 1.0 / N;
        Eigen::MatrixXd dz(N, 4);
        for (int p = 0; p < N; ++p) {
            for (int i = 0; i < 4; ++i) dz(p, i) = std::sin((p + 1) * h + i) - std::sin(p * h + i);
        }
        const Eigen::MatrixXd a =
            stochastic_convolution(b->eigenvalues, h, {}, dz, 1.0, IntegralRoute::Definitional, 0.3);
        const Eigen::MatrixXd y =
            stochastic_convolution(b->eigenvalues, h, {}, dz, 1.0, IntegralRoute::Young, 0.3);
        REQUIRE(a.rows() == N + 1);
        CHECK(a.row(0).norm() == 0.0);
        return std::abs(a(N, 0) - y(N, 0)) / std::abs(a(N, 0));
    };
    const double g1 = gap(256), g2 = gap(512);
    CHECK(g2 < 1e-2);
    CHECK(g1 / g2 == doctest::Approx(2.0).epsilon(0.1));
}
