#pragma once

// Picard iteration for the mild equation
//
//   u(t) = T(t) f + int_0^t T(t-s) F(u(s)) ds + sum_i int_0^t T(t-s) G_i(u(s)) dz_i(s)
//
// on a uniform time grid, with T optionally replaced by exp(-t A^theta).

#include "mmspde/fractional_integration.hpp"
#include "mmspde/function_spaces.hpp"
#include "mmspde/noise.hpp"

#include <Eigen/Dense>

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace mmspde {

enum class NonlinearityKind { Zero, Linear, SmoothSaturating };

std::string to_string(NonlinearityKind k);
NonlinearityKind nonlinearity_kind_from_string(const std::string& s);

// s -> 0, s -> slope * s, or s -> slope * scale * tanh(s / scale).
struct ScalarMap {
    NonlinearityKind kind = NonlinearityKind::Zero;
    double slope = 0.0;
    double scale = 1.0;

    double operator()(double s) const;
    double d1(double s) const;
    double d2(double s) const;

    // sup |phi'|, sup |phi''|, sup |phi'''| over the real line
    double bound_d1() const;
    double bound_d2() const;
    double bound_d3() const;

    static ScalarMap zero() { return {}; }
    static ScalarMap linear(double slope) { return {NonlinearityKind::Linear, slope, 1.0}; }
    static ScalarMap saturating(double scale, double slope = 1.0) {
        return {NonlinearityKind::SmoothSaturating, slope, scale};
    }
};

struct Nonlinearity {
    ScalarMap F;
    ScalarMap G;
    std::vector<ScalarMap> G_extra;  // G_2, G_3, ... for additional noise terms

    const ScalarMap& G_for(std::size_t noise_index) const;

    // Lipschitz constants of F' and G'' (the assumption on the coefficients)
    double lip_F_prime() const { return F.bound_d2(); }
    double lip_G_second() const { return G.bound_d3(); }

    static Nonlinearity zero() { return {}; }
};

enum class Which { F, G };

// Nodal evaluation followed by analysis. NaN/inf raise PropagationError.
Field apply_nonlinearity(const ScalarMap& phi, const Field& u);
Field apply_nonlinearity(const Nonlinearity& nl, const Field& u, Which which);

// ---------------------------------------------------------------------------

struct TimePath {
    std::vector<double> times;
    std::vector<Field> values;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    Eigen::MatrixXd coefficient_matrix() const;
    static TimePath from_coefficients(BasisPtr basis, std::vector<double> times,
                                      const Eigen::MatrixXd& coeffs);
};

// J_k = int_0^{t_k} exp(-lambda^theta (t_k - s)) F(s) ds per mode, integrated exactly
// against the piecewise-quadratic interpolant of the rows of Fc (three-node stencils),
// for every grid node. Returns (N+1) x m.
Eigen::MatrixXd deterministic_convolution_path(const Eigen::VectorXd& eigenvalues, double h,
                                               const Eigen::MatrixXd& Fc, double theta = 1.0);

// int_0^t T(t-s) F(u(s)) ds at the grid time t.
Field deterministic_convolution(const TimePath& u, const ScalarMap& F, double t, double theta = 1.0);

// ---------------------------------------------------------------------------

struct SolverOptions {
    int N_time = 256;
    double tol = 1e-8;
    int max_iter = 100;
    IntegralRoute route = IntegralRoute::Definitional;
    double eta = std::numeric_limits<double>::quiet_NaN();  // NaN: (alpha + gamma) / 2
    double theta = 1.0;
    bool constant_initialization = false;  // u_0(t) = f instead of T(t) f
    bool check_admissibility = true;
    bool allow_windowing = true;
    int max_window_depth = 4;
};

struct MildSolution {
    TimePath path;
    ParamSet params;
    int picard_iterations = 0;
    std::vector<double> contraction_history;  // sup_k ||u_{n+1}(t_k) - u_n(t_k)||_{delta,inf}
    bool converged = false;
    int windows = 1;
    int N_time = 0;
    int n_modes = 0;
    int n_nodes = 0;
    double eta = 0.0;
    double theta = 1.0;
    IntegralRoute route = IntegralRoute::Definitional;
    double initial_norm = 0.0;  // ||f||_{delta + 2 gamma + epsilon}
    double wall_seconds = 0.0;
    std::string message;

    // max over n >= 1 of history[n] / history[n-1]
    double contraction_ratio() const;
    bool geometric() const;  // strictly decreasing after the first iterate
};

// Noise paths must have N_time steps (or a multiple, which is subsampled) on [0, params.t0].
MildSolution solve_mild(const Field& f, const Nonlinearity& nl, std::span<const NoisePath> noise,
                        const ParamSet& params, const SolverOptions& options = {});
MildSolution solve_mild(const Field& f, const Nonlinearity& nl, const NoisePath& noise,
                        const ParamSet& params, const SolverOptions& options = {});

// Same pipeline with T(t) = exp(-t A^theta).
MildSolution solve_with_fractional_dissipation(const Field& f, const Nonlinearity& nl,
                                               std::span<const NoisePath> noise,
                                               const ParamSet& params, double theta,
                                               SolverOptions options = {});

}  // namespace mmspde
