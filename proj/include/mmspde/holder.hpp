#pragma once

// Hoelder-exponent regression for grid paths with values in a normed space.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace mmspde {

struct HolderOptions {
    // Number of fixed anchors s_k, spaced evenly across the window. 0 picks
    // the largest power of two <= 16 that still leaves min_lags dyadic lags.
    int anchors = 0;
    int min_lags = 6;
    // Optional window [t_begin, t_end]; NaN means the grid end.
    double t_begin = std::numeric_limits<double>::quiet_NaN();
    double t_end = std::numeric_limits<double>::quiet_NaN();
};

struct HolderEstimate {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = 0.0;
    double r2 = 0.0;
    bool defined = false;
    int n_lags = 0;
    int anchors = 0;
    std::string message;
    std::vector<double> lags;  // h
    std::vector<double> sups;  // max_k d(s_k, s_k + h)
};

// Regression of log max_k d(s_k, s_k + h) against log h over dyadic lags
// h = L 2^{-j}, where L is the anchor spacing. Requires a uniform grid.
// dist(i, j) is the distance between the path values at grid indices i < j.
HolderEstimate estimate_holder(std::span<const double> times,
                               const std::function<double(int, int)>& dist,
                               const HolderOptions& options = {});

}  // namespace mmspde
