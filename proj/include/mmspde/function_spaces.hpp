#pragma once

// Fields in the eigenbasis, the potential-space norms H^sigma, the semigroup,
// Bessel potentials, fractional powers and the pointwise product.

#include "mmspde/spectral_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mmspde {

// A function or dual element, stored as coefficients in the eigenbasis.
class Field {
public:
    Field() = default;
    Field(BasisPtr basis, Eigen::VectorXd coeffs);

    static Field zero(BasisPtr basis);
    static Field mode(BasisPtr basis, int index, double amplitude = 1.0);
    // Analysis of nodal values x_j -> u(x_j).
    static Field from_nodal(BasisPtr basis, const Eigen::VectorXd& nodal);

    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }
    const SpectralBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    int size() const { return static_cast<int>(coeffs_.size()); }

    Eigen::VectorXd nodal() const { return basis_->synthesize(coeffs_); }
    double l2() const { return coeffs_.norm(); }
    double sup_nodal() const { return nodal().cwiseAbs().maxCoeff(); }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

private:
    BasisPtr basis_;
    Eigen::VectorXd coeffs_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

// L2 pairing <u, v> = sum_i u_i v_i (also the H^{-s} x H^{s} duality).
double inner(const Field& u, const Field& v);

// ---------------------------------------------------------------------------
// Parameters

struct ParamSet {
    double alpha = 0.2;
    double beta = 0.3;
    double gamma = 0.3;
    double delta = 0.4;
    double d_S = 1.0;
    double w = 2.0;
    double q = 0.0;        // d_S / delta in case (P); configured q > 2 in the low-dim regime
    double hurst = 0.8;
    double theta = 1.0;
    double t0 = 1.0;
    double epsilon = 0.01;

    // 0<alpha<gamma, 0<beta<delta<min(d_S/2,1), gamma < 1-alpha-beta/2-d_S/4
    bool admissible_P() const;
    // d_S/2 <= beta <= delta < 1, 0<alpha<gamma<1-alpha-beta/2-delta/2
    bool admissible_lowdim() const;
    bool admissible() const { return admissible_P() || admissible_lowdim(); }

    double gamma_max_P() const { return 1.0 - alpha - beta / 2.0 - d_S / 4.0; }
    double gamma_max_lowdim() const { return 1.0 - alpha - beta / 2.0 - delta / 2.0; }

    // alpha < eta < gamma and delta + 2 gamma < 2 - 2 eta - beta
    bool eta_admissible(double eta) const;
    double default_eta() const { return 0.5 * (alpha + gamma); }

    // Human-readable list of the violated inequalities (empty when admissible).
    std::string diagnose() const;
};

// ---------------------------------------------------------------------------
// Norms

// ||u||_0 + ||A^{sigma/2} u||_0 for sigma > 0, ||u||_0 at sigma = 0, and the
// spectral form (sum (1+lambda_i)^sigma u_i^2)^{1/2} for sigma < 0.
double norm_H(const Field& u, double sigma);
double norm_H(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& eigenvalues, double sigma);

// (sum (1+lambda_i)^sigma u_i^2)^{1/2} for every sigma.
double norm_H_spectral(const Field& u, double sigma);
double norm_H_spectral(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& eigenvalues,
                       double sigma);

// norm_H(u, sigma) + max_j |u(x_j)|
double norm_H_inf(const Field& u, double sigma);

// ---------------------------------------------------------------------------
// Spectral multipliers

Field semigroup_apply(const Field& u, double t);                 // exp(-lambda t)
Field subordinated_apply(const Field& u, double t, double theta);  // exp(-lambda^theta t)
Field bessel_potential(const Field& u, double sigma);              // (1+lambda)^{-sigma/2}
Field fractional_power(const Field& u, double nu);                 // lambda^nu

// Per-mode multiplier exp(-lambda^theta t); theta == 1 uses lambda directly.
Eigen::VectorXd semigroup_multiplier(const Eigen::VectorXd& eigenvalues, double t,
                                     double theta = 1.0);

// ---------------------------------------------------------------------------
// Pointwise product

struct ProductResult {
    Field value;
    bool aliasing = false;  // product frequencies fold back on the node grid
    bool q2_proxy = true;   // dual norms are computed in the q = 2 form
};

// Nodal multiplication g(x_j) h(x_j) followed by analysis.
ProductResult pointwise_product(const Field& g, const Field& h, const ParamSet& params);

// Coefficient-space matrix of v -> analysis(g(x_j) * synthesis(v)(x_j)).
Eigen::MatrixXd multiplication_matrix(const SpectralBasis& basis, const Eigen::VectorXd& g_nodal);

struct ProductConstantReport {
    double max_ratio = 0.0;   // max ||gh||_{-beta} / (||g||_delta ||h||_{-beta})
    double mean_ratio = 0.0;
    int samples = 0;
    int aliasing_count = 0;
    bool q2_proxy = true;
};

// Monte Carlo sup over random (g, h) pairs of the product-estimate ratio.
ProductConstantReport measure_product_constant(BasisPtr basis, const ParamSet& params,
                                               int samples, std::uint64_t seed,
                                               int active_modes = 0);

// ---------------------------------------------------------------------------
// Semigroup estimates

struct SemigroupEstimateReport {
    // ||A^{nu/2} T(t) v||_0 t^{nu/2} / ||v||_0
    double smoothing = 0.0;
    // ||T(t) u - u||_0 / (t^nu ||u||_{2 nu})
    double continuity = 0.0;
    // ||T(t) w||_delta t^{delta/2 + beta/2} / ||w||_{-beta}
    double dual_smoothing = 0.0;
    // ||T(t) w - w||_{-beta-2nu} / (t^nu ||w||_{-beta})
    double dual_continuity = 0.0;
    bool all_finite = false;
};

struct SemigroupEstimateOptions {
    double delta = 0.4;
    int samples = 64;
    int active_modes = 16;
    std::uint64_t seed = 7;
};

SemigroupEstimateReport verify_semigroup_estimates(BasisPtr basis, double nu, double beta,
                                                   std::span<const double> t_grid,
                                                   const SemigroupEstimateOptions& options = {});

// sup_t (lambda t)^{nu/2} exp(-lambda t) by golden-section search in log t;
// the smoothing ratio for the single mode with eigenvalue lambda.
struct SingleModeMaximum {
    double t_star = 0.0;
    double value = 0.0;
};
SingleModeMaximum single_mode_smoothing_max(double lambda, double nu);

}  // namespace mmspde
