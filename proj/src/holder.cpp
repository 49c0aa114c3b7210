#include "mmspde/holder.hpp"

#include "mmspde/numerics.hpp"

#include <cmath>

namespace mmspde {

HolderEstimate estimate_holder(std::span<const double> times,
                               const std::function<double(int, int)>& dist,
                               const HolderOptions& opt) {
    HolderEstimate est;
    const int n_times = static_cast<int>(times.size());
    if (n_times < 3) {
        est.message = "fewer than three grid times";
        return est;
    }
    int i0 = 0, i1 = n_times - 1;
    if (!std::isnan(opt.t_begin)) {
        while (i0 < i1 && times[i0] < opt.t_begin - 1e-12) ++i0;
    }
    if (!std::isnan(opt.t_end)) {
        while (i1 > i0 && times[i1] > opt.t_end + 1e-12) --i1;
    }
    const int n = i1 - i0;
    const int needed = 1 << std::max(opt.min_lags - 1, 0);

    int anchors = opt.anchors;
    if (anchors <= 0) {
        anchors = 16;
        while (anchors > 1 && n / anchors < needed) anchors /= 2;
    }
    const int spacing = n / anchors;
    if (spacing < 1) {
        est.message = "window too short for the anchor count";
        return est;
    }
    est.anchors = anchors;

    const double h = (times[i1] - times[i0]) / n;
    std::vector<double> lx, ly;
    for (int lag = spacing; lag >= 1; lag /= 2) {
        double sup = 0.0;
        for (int k = 0; k < anchors; ++k) {
            const int a = i0 + k * spacing;
            sup = std::max(sup, dist(a, a + lag));
        }
        est.lags.push_back(lag * h);
        est.sups.push_back(sup);
        if (sup > 0.0 && std::isfinite(sup)) {
            lx.push_back(std::log(lag * h));
            ly.push_back(std::log(sup));
        }
    }
    est.n_lags = static_cast<int>(lx.size());
    if (est.n_lags < opt.min_lags) {
        est.message = lx.empty() && !est.sups.empty() ? "degenerate (constant) path"
                                                       : "not enough dyadic lags";
        return est;
    }
    const LineFit fit = fit_line(lx, ly);
    if (!fit.defined) {
        est.message = "regression undefined";
        return est;
    }
    est.slope = fit.slope;
    est.intercept = fit.intercept;
    est.r2 = fit.r2;
    est.defined = true;
    return est;
}

}  // namespace mmspde
