#pragma once

// Driving paths: exact fractional Brownian motion and eigenfunction-series
// space-time noise z(t) = sum_i q_i B_i(t) e_i.

#include "mmspde/function_spaces.hpp"
#include "mmspde/holder.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mmspde {

struct FbmPath {
    std::vector<double> times;   // uniform, times[0] = 0
    std::vector<double> values;  // values[0] = 0
    double hurst = 0.5;
    std::uint64_t seed = 0;
    bool jitter_applied = false;
};

// Exact sampling from the Cholesky factor of R(s,t) = (s^2H + t^2H - |t-s|^2H)/2
// on t_k = k t0 / N. Factors are cached per (N, t0, H).
FbmPath gen_fbm(int N, double t0, double hurst, std::uint64_t seed);

inline constexpr int kMaxFbmSteps = 1 << 14;

// Drops cached Cholesky factors.
void clear_fbm_cache();

struct SeriesNoiseSpec {
    double c_q = 1.0;
    double rho = 0.0;  // q_i = c_q lambda_i^{-rho/2}; rho = 0 is the flat spectrum
    double beta_star = 0.3;
    double a1 = 0.0;
    double a2 = 1.0;
    double b = 1.0;
    int n_terms = 0;  // 0 means every mode of the basis
    double hurst = 0.8;

    bool flat() const { return rho == 0.0; }
    double a() const { return std::max(a1, a2); }
    double coefficient(double lambda) const;
};

struct SummabilityReport {
    bool ok = false;
    bool flat_waiver = false;     // flat spectrum accepted with a warning
    double decay_exponent = 0.0;  // p with terms ~ i^{-p}
    double partial_sum = 0.0;
    double relative_tail = 0.0;
    double implied_beta_star_min = 0.0;
    std::string message;
};

// sum_i q_i^2 lambda_i^{-beta* + a - 2b/w}: partial sum over the retained
// modes, tail from the Weyl asymptotics lambda_i ~ i^{2/d_S}.
SummabilityReport check_summability(const SeriesNoiseSpec& spec, const SpectralBasis& basis);

struct NoisePath {
    BasisPtr basis;
    std::vector<double> times;
    std::vector<Field> fields;  // z(t_k) as coefficient vectors, fields[0] = 0
    SeriesNoiseSpec spec;
    std::uint64_t seed = 0;
    std::optional<HolderEstimate> holder_report;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    // (n_times x n_modes) matrix of coefficients.
    Eigen::MatrixXd coefficient_matrix() const;

    // Path from a coefficient matrix; row k is z(times[k]).
    static NoisePath from_coefficients(BasisPtr basis, std::vector<double> times,
                                       const Eigen::MatrixXd& coeffs);
    // The zero path on a uniform grid.
    static NoisePath zero(BasisPtr basis, int N, double t0);
};

// z(t) = sum_{i < n_terms} q_i B_i(t) e_i with B_i = gen_fbm(N, t0, H, derive_seed(seed, i)).
// Throws SummabilityError unless the spec passes or is flat.
NoisePath gen_series_noise(const SeriesNoiseSpec& spec, BasisPtr basis, int N, double t0,
                           std::uint64_t seed);

// Every stride-th grid time.
NoisePath subsample(const NoisePath& z, int stride);

// a z1 + b z2 on a common grid.
NoisePath combine(double a, const NoisePath& z1, double b, const NoisePath& z2);

// z_t(s_k) = z(s_k) - z(t) for s_k <= t = times[t_index]; the last entry is zero.
std::vector<Field> regulated(const NoisePath& z, int t_index);

// Hoelder exponent of t -> z(t) in the H^{-beta} norm.
HolderEstimate holder_in_dual_norm(const NoisePath& z, double beta,
                                   const HolderOptions& options = {});

}  // namespace mmspde
