#pragma once

// Weyl-Marchaud fractional derivatives and the fractional-calculus form of the
// stochastic convolution
//
//   int_s^t U(t;x) dz(x) = int_s^t D^eta_{s+} U(t;.)(x) D^{1-eta}_{t-} z_t(x) dx,
//
// where U(t;x) w = T(t-x)(G(u(x)) w) and z_t(x) = z(x) - z(t).
//
// Sign convention: the factor (-1)^eta (-1)^{1-eta} = -1 is absorbed into the
// right-sided derivative, so D^{1-eta}_{t-} z_t(x) = (t-x)^eta / Gamma(1+eta) for
// z(x) = x and the composition equals the Riemann-Stieltjes integral on
// absolutely continuous data.

#include "mmspde/function_spaces.hpp"
#include "mmspde/noise.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mmspde {

// Graded composite midpoint rule for the Marchaud integral: cell edges
// r_k = L (k / cells)^grading measured from the singular endpoint.
struct GradedMesh {
    int cells = 4096;
    double grading = 0.0;  // 0 selects 2 / (1 - order) for a derivative of that order
};

// D^eta_{0+} f(s) = (f(s) s^-eta + eta int_0^s (f(s)-f(tau)) (s-tau)^{-eta-1} dtau) / Gamma(1-eta)
double wm_left(const std::function<double(double)>& f, double eta, double s,
               const GradedMesh& mesh = {});

// D^{1-eta}_{t-} z_t(x) for a scalar z, with the sign convention above.
double wm_right(const std::function<double(double)>& z, double eta, double x, double t,
                const GradedMesh& mesh = {});

struct FracDerivative {
    enum class Side { Left, Right };
    double eta = 0.5;
    Side side = Side::Left;
    std::vector<double> x;
    std::vector<double> values;                // scalar value, or L2 norm for fields
    std::vector<Eigen::VectorXd> fields;       // coefficient values (field data only)
    std::string quadrature = "exact piecewise-linear";
};

// Exact derivatives of the piecewise-linear interpolant of grid data, evaluated
// at the points x (0 < x, and x < t for the right derivative).
FracDerivative wm_left(std::span<const double> times, std::span<const double> values, double eta,
                       std::span<const double> x);
FracDerivative wm_right(std::span<const double> times, std::span<const double> values, double eta,
                        int t_index, std::span<const double> x);
FracDerivative wm_right(const NoisePath& z, double eta, int t_index, std::span<const double> x);

// CSV with columns x,value.
void write_derivative_csv(const std::string& path, const FracDerivative& d);

// ---------------------------------------------------------------------------

// U(t;x_j) w = T^theta(t - x_j)(analysis(g_j . synthesis(w))) on a grid x_0 < ... < x_n = t,
// extended piecewise linearly in x.
struct OperatorPath {
    BasisPtr basis;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> g_nodal;  // G(u(x_j)) at the nodes
    double theta = 1.0;

    double t() const { return times.back(); }
    int n_steps() const { return static_cast<int>(times.size()) - 1; }

    Eigen::VectorXd apply(int j, const Eigen::VectorXd& w) const;
    Field apply(int j, const Field& w) const;
    // Piecewise-linear interpolation of the node actions.
    Eigen::VectorXd apply_at(double x, const Eigen::VectorXd& w) const;

    // g_j == constant at every node.
    static OperatorPath constant_multiplier(BasisPtr basis, std::vector<double> times, double g);
};

// Pairing weights of the definitional integral on the unit grid:
// K(j, p) = int_0^{p+1} a_j(x) phi_p(x) dx, where a_j is the left derivative of the
// j-th hat function and phi_p the right derivative of the p-th unit ramp. Translation
// invariance gives K(j, p) = kappa[p - j + 1] for j >= 1.
struct ConvolutionPlan {
    int N = 0;
    double eta = 0.5;
    std::vector<double> kappa;  // p - j = -1 .. N - 1
    std::vector<double> k0;     // K(0, p), p = 0 .. N - 1

    double K(int j, int p) const {
        if (j > p + 1) return 0.0;
        return j == 0 ? k0[p] : kappa[p - j + 1];
    }
};

// Cached per (N, eta). Quadrature: Gauss-Legendre on each unit cell, with the
// substitution x = u^g / (u^g + (1-u)^g), g = 2/(1-eta), on cells touching a kink.
std::shared_ptr<const ConvolutionPlan> convolution_plan(int N, double eta);

// int_s^t U(t;x) dz(x) via the fractional derivatives of the piecewise-linear
// interpolants. U.times must coincide with a contiguous block of z.times ending at t.
// Throws AdmissibilityError when params is given and eta is outside (alpha, gamma).
Field convolution_integral(const OperatorPath& U, const NoisePath& z, double eta,
                           const ParamSet* params = nullptr);

// Left-point Riemann-Stieltjes sum with N uniform cells on [U.times[0], U.t()],
// U and z interpolated piecewise linearly.
Field rs_integral_oracle(const OperatorPath& U, const NoisePath& z, int N);

enum class IntegralRoute { Definitional, Young };

std::string to_string(IntegralRoute r);

// I_k = int_0^{t_k} T^theta(t_k - x) M(x) dz(x) for every node of a uniform grid,
// where M_j is the coefficient-space multiplication matrix at node j and
// dz.row(p) = z(t_{p+1}) - z(t_p). Returns an (N+1) x m matrix.
Eigen::MatrixXd stochastic_convolution(const Eigen::VectorXd& eigenvalues, double h,
                                       const std::vector<Eigen::MatrixXd>& M,
                                       const Eigen::MatrixXd& dz, double theta,
                                       IntegralRoute route, double eta);

}  // namespace mmspde
