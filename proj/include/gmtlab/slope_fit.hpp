#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "gmtlab/common.hpp"

namespace gmtlab {

/// Log-log regression result shared by every dimension / decay estimator.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Max absolute deviation of the samples from the fitted line.
    double residual = 0.0;
    /// (log-abscissa, log-ordinate) pairs the fit was computed from.
    std::vector<std::pair<double, double>> sample_points;
};

/// Least squares line through (abscissa, ordinate) pairs already in log space.
inline SlopeFit fit_line(std::span<const std::pair<double, double>> pts) {
    require(pts.size() >= 3, "slope fit needs at least 3 sample points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    require(std::abs(denom) > 1e-300, "slope fit abscissae are degenerate");
    SlopeFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.sample_points.assign(pts.begin(), pts.end());
    for (auto [x, y] : pts) {
        const double dev = std::abs(y - (fit.slope * x + fit.intercept));
        if (dev > fit.residual) fit.residual = dev;
    }
    return fit;
}

}  // namespace gmtlab
