#pragma once

// Finite spectral models of the metric measure spaces: the Dirichlet unit
// interval and level-m Sierpinski gasket graphs. Every other module sees a
// space only through SpectralBasis.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mmspde {

enum class SpaceKind { Interval, Gasket };

std::string to_string(SpaceKind kind);

struct SpectralBasis {
    SpaceKind kind = SpaceKind::Interval;
    int level_or_nmodes = 0;

    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // (n_nodes x n_modes) nodal values e_i(x_j)
    Eigen::MatrixXd nodes;         // (n_nodes x dim) coordinates; row index is the vertex id
    Eigen::VectorXd weights;       // quadrature / measure weights, sum = mu(X)

    // Discrete generator for the gasket (empty for the interval, whose
    // operator is applied analytically).
    Eigen::MatrixXd generator;

    double hausdorff_dim = 1.0;
    double walk_dim = 2.0;
    double spectral_dim = 1.0;  // = 2 * hausdorff_dim / walk_dim
    std::string metric_convention;

    int n_modes() const { return static_cast<int>(eigenvalues.size()); }
    int n_nodes() const { return static_cast<int>(weights.size()); }

    // u(x_j) = sum_i c_i e_i(x_j)
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const;
    // c_i = sum_j w_j u(x_j) e_i(x_j)
    Eigen::VectorXd analyze(const Eigen::VectorXd& nodal) const;

    double distance(int i, int j) const;

    // Stable 64-bit identifier of the basis contents.
    std::uint64_t id() const;
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

// e_i(x) = sqrt(2) sin(i pi x), lambda_i = (i pi)^2, on n_nodes equispaced points of
// [0, 1] including the endpoints, trapezoid weights.
BasisPtr build_interval_basis(int n_modes, int n_nodes);

// Full eigendecomposition of 5^m times the graph Laplacian of the level-m
// gasket graph, normalised counting measure on the 3(3^m+1)/2 vertices.
BasisPtr build_gasket_basis(int level);

int gasket_vertex_count(int level);

// max_j |(L e_i)(x_j) - lambda_i e_i(x_j)| using the gasket generator, or
// centred second differences on interior nodes for the interval.
double eigen_residual(const SpectralBasis& basis, int mode);

// max_{i,k} |sum_j w_j e_i e_k - delta_ik|
double orthonormality_defect(const SpectralBasis& basis);

struct WeylFit {
    double slope = 0.0;          // d log N / d log lambda
    double spectral_dim = 0.0;   // 2 * slope
    double r2 = 0.0;
};

// Least-squares fit of log N(lambda) against log lambda, N(lambda) = #{i : lambda_i <= lambda}
// evaluated at each distinct positive eigenvalue.
WeylFit fit_weyl_law(const SpectralBasis& basis);

// ---------------------------------------------------------------------------
// Heat kernel

// Phi(s) = c * exp(-kappa * s^exponent), exponent = w / (w - 1).
struct SubGaussianProfile {
    double c = 0.0;
    double kappa = 0.0;
    double exponent = 2.0;

    double operator()(double s) const;
};

struct HeatKernelModel {
    BasisPtr basis;
    double R0 = 0.2;
    SubGaussianProfile phi_lower;
    SubGaussianProfile phi_upper;
    double pt_constant = 0.0;  // p_t ~ pt_constant * t^{-d_S/2} on the diagonal
};

HeatKernelModel make_heat_kernel_model(BasisPtr basis, double R0 = 0.2);

// True when exp(-lambda_max t) < 1e-12, i.e. the mode cut does not bias p(t, ., .).
bool truncation_ok(const SpectralBasis& basis, double t);

// p(t, x_i, x_j) = sum_k exp(-lambda_k t) e_k(x_i) e_k(x_j)
double heat_kernel(const HeatKernelModel& model, double t, int xi, int xj);
double heat_kernel(const SpectralBasis& basis, double t, int xi, int xj);

// Row p(t, x_i, .) over all nodes.
Eigen::VectorXd heat_kernel_row(const SpectralBasis& basis, double t, int xi);

struct HkeFitOptions {
    // Nodes used for the sandwich fit; empty selects a default subset
    // (interior nodes for the Dirichlet interval, all vertices for the gasket).
    std::vector<int> fit_nodes;
    // Nodes whose on-diagonal values are mu-averaged for the scaling fit;
    // empty selects the centre node (interval) or all vertices (gasket).
    std::vector<int> diagonal_nodes;
    int max_fit_nodes = 24;
};

struct HkeFitReport {
    bool success = false;
    std::string message;
    SubGaussianProfile phi_lower;
    SubGaussianProfile phi_upper;
    double max_violation = 0.0;        // max relative violation of the sandwich on the grid
    double beta = 0.0;
    double integrability_integral = 0.0;  // int_0^inf s^{d_H + beta w/2 - 1} Phi_upper(s) ds
    bool integrable = false;
    double diagonal_slope = 0.0;       // log p(t,x,x) vs log t
    double diagonal_r2 = 0.0;
    double pt_constant = 0.0;
    bool truncation_warning = false;
};

// Fits two sub-Gaussian profiles sandwiching t^{d_H/w} p(t,x,y) on the grid and
// evaluates the integrability integral for beta. A failed fit is reported, not thrown.
HkeFitReport fit_hke_bounds(const HeatKernelModel& model, std::span<const double> t_grid,
                            double beta, const HkeFitOptions& options = {});

// Copy of the model with the fitted profiles installed.
HeatKernelModel with_fit(HeatKernelModel model, const HkeFitReport& report);

}  // namespace mmspde
