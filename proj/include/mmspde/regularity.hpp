#pragma once

// Regularity measurements on solved paths: W^gamma norms, time-Hoelder
// exponents in H^delta, the uniform H^{delta+2gamma} bound, the constants of the
// three a-priori estimates, and the admissible (gamma, delta) regions.

#include "mmspde/holder.hpp"
#include "mmspde/mild_solver.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mmspde {

struct WGammaResult {
    double value = 0.0;
    bool diverging = false;            // grows > 5% per refinement across the coarsening sweep
    std::vector<double> sweep;         // values at strides 4, 2, 1 (coarse to fine)
};

// sup_t ( ||v(t)||_X + int_0^t ||v(t) - v(s)||_X (t-s)^{-gamma-1} ds ) with X = H^delta
// (or H^delta_inf when inf_norm). The distance s -> ||v(t) - v(s)||_X is interpolated
// linearly between grid nodes and integrated exactly against the kernel.
WGammaResult wgamma_seminorm(const TimePath& path, double gamma, double delta, bool inf_norm = false);

// Regression of log max_k ||u(s_k + h) - u(s_k)||_delta on log h.
HolderEstimate holder_exponent(const TimePath& path, double delta, const HolderOptions& options = {});

// max_k ||u(t_k)||_sigma
double uniform_bound(const TimePath& path, double sigma);

struct LemmaConstants {
    double drift = 0.0;       // max ||int_s^t T(t-x)F(u)dx||_delta / (||u||_W (t-s))
    double epsilon = 0.0;     // max ||T(t-x)(I - T(x-y)) G(u(x))||_L / (||u||_W (t-x)^{-delta/2-beta/2-nu} (x-y)^nu)
    double stochastic = 0.0;  // max ||int_s^t T(t-x)G(u)dz||_delta / (t-s)^gamma
    double nu = 0.5;
    double w_norm = 0.0;      // ||u||_{W^gamma([0,t0], H^delta_inf)}
    int pairs = 0;
};

LemmaConstants measure_lemma_bounds(const MildSolution& u, const Nonlinearity& nl,
                                    std::span<const NoisePath> noise, const ParamSet& params,
                                    double nu = 0.5);

// ---------------------------------------------------------------------------

struct RegionPiece {
    bool empty = true;
    double gamma_lo = 0.0, gamma_hi = 0.0;
    double delta_lo = 0.0, delta_hi = 0.0;
    bool delta_lo_closed = false;
    std::vector<std::pair<double, double>> vertices;  // (delta, gamma), counter-clockwise
};

struct AdmissibleRegion {
    RegionPiece case_P;
    RegionPiece lowdim;
    std::string description;
};

// case (P): beta < delta < min(d_S/2, 1), 0 < gamma < 1 - alpha - beta/2 - d_S/4
// low-dim:  max(beta, d_S/2) <= delta < 1 (needs d_S/2 <= beta), 0 < gamma < 1 - alpha - beta/2 - delta/2
AdmissibleRegion admissible_region(double d_S, double alpha, double beta);

// CSV with columns region,delta,gamma.
void write_region_csv(const std::string& path, const AdmissibleRegion& region);

// ---------------------------------------------------------------------------

struct RegularityReport {
    double holder_slope = 0.0;
    double holder_lo = 0.0;  // slope -/+ two standard errors of the regression
    double holder_hi = 0.0;
    double holder_r2 = 0.0;
    bool holder_defined = false;
    double wgamma = 0.0;
    bool wgamma_diverging = false;
    double uniform_bound = 0.0;
    LemmaConstants lemmas;
    ParamSet params;
    bool q2_proxy = true;
};

RegularityReport analyze_regularity(const MildSolution& u, const Nonlinearity& nl,
                                    std::span<const NoisePath> noise, const HolderOptions& options = {});

}  // namespace mmspde
