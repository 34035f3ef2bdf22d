#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gmtlab/common.hpp"
#include "gmtlab/kplane.hpp"
#include "gmtlab/measures.hpp"
#include "gmtlab/projections.hpp"
#include "gmtlab/slope_fit.hpp"

namespace gmtlab {

/// Finite-resolution surrogate for the Lebesgue measure of a union of planes.
struct OccupancyReport {
    std::vector<int> resolutions;
    std::vector<double> occupancy;  // fraction of clip-box cells hit, in [0,1]
    SlopeFit fit;                   // log occupancy vs log per-axis resolution
    std::vector<double> clip_lo, clip_hi;
    /// "positive-measure-consistent" (slope >= -0.05),
    /// "null-consistent" (slope <= -0.1), or "inconclusive".
    std::string verdict;
};

/// 0/1 occupancy mask on a per_axis^d grid over the clip box. Every plane in
/// the family is a graph over the first k axes, so each x-column meets it in
/// exactly one point; that cell is marked. No thickness parameter, no false
/// positives.
inline GridField rasterize_union(const PlaneSet& S, std::span<const double> clip_lo,
                                 std::span<const double> clip_hi, int per_axis) {
    S.validate();
    require(per_axis >= 2, "rasterize_union: per_axis must be >= 2");
    require(clip_lo.size() == static_cast<std::size_t>(S.d) &&
                clip_hi.size() == static_cast<std::size_t>(S.d),
            "rasterize_union: clip box arity mismatch");
    for (int a = 0; a < S.k; ++a)
        require(clip_lo[a] <= 0.0 && clip_hi[a] >= 1.0,
                "rasterize_union: clip box must contain [0,1]^k in its first k axes");

    GridField mask;
    mask.d = S.d;
    mask.shape.assign(S.d, per_axis);
    mask.lo.assign(clip_lo.begin(), clip_lo.end());
    mask.hi.assign(clip_hi.begin(), clip_hi.end());
    std::size_t total = 1;
    for (int a = 0; a < S.d; ++a) total *= static_cast<std::size_t>(per_axis);
    mask.values.assign(total, 0.0);

    const int k = S.k, m = S.d - S.k;
    std::size_t n_cols = 1;
    for (int a = 0; a < k; ++a) n_cols *= static_cast<std::size_t>(per_axis);

    std::vector<double> x(k);
    std::vector<std::size_t> col_index(k);
    for (std::size_t atom = 0; atom < S.measure.size(); ++atom) {
        const double* y = S.measure.coords.data() + atom * S.measure.ambient_dim;
        for (std::size_t col = 0; col < n_cols; ++col) {
            std::size_t rest = col;
            for (int a = k - 1; a >= 0; --a) {
                col_index[a] = rest % static_cast<std::size_t>(per_axis);
                rest /= static_cast<std::size_t>(per_axis);
                x[a] = clip_lo[a] + (static_cast<double>(col_index[a]) + 0.5) *
                                        (clip_hi[a] - clip_lo[a]) / per_axis;
            }
            // section value in the last m coordinates: y_0^j + sum_i x_i y_i^j
            std::size_t idx = 0;
            for (int a = 0; a < k; ++a) idx = idx * per_axis + col_index[a];
            bool inside = true;
            for (int j = 0; j < m && inside; ++j) {
                double v = y[j];
                for (int i = 1; i <= k; ++i) v += x[i - 1] * y[i * m + j];
                if (v < clip_lo[k + j] || v > clip_hi[k + j]) {
                    inside = false;
                    break;
                }
                double u = (v - clip_lo[k + j]) /
                           ((clip_hi[k + j] - clip_lo[k + j]) / per_axis);
                // snap roundoff-perturbed boundary hits onto the boundary so
                // they land in the upper (half-open) cell deterministically
                const double nearest = std::nearbyint(u);
                if (std::abs(u - nearest) < 1e-9) u = nearest;
                int cell = static_cast<int>(std::floor(u));
                cell = std::clamp(cell, 0, per_axis - 1);
                idx = idx * per_axis + static_cast<std::size_t>(cell);
            }
            if (inside) mask.values[idx] = 1.0;
        }
    }
    return mask;
}

inline double occupied_fraction(const GridField& mask) {
    double hit = 0.0;
    for (double v : mask.values) hit += v;
    return hit / static_cast<double>(mask.values.size());
}

inline OccupancyReport occupancy_sweep(const PlaneSet& S, std::span<const double> clip_lo,
                                       std::span<const double> clip_hi,
                                       std::span<const int> resolutions) {
    require(resolutions.size() >= 3, "occupancy_sweep: need at least 3 resolutions");
    for (std::size_t i = 0; i + 1 < resolutions.size(); ++i)
        require(resolutions[i] < resolutions[i + 1],
                "occupancy_sweep: resolutions must increase");
    OccupancyReport report;
    report.clip_lo.assign(clip_lo.begin(), clip_lo.end());
    report.clip_hi.assign(clip_hi.begin(), clip_hi.end());
    std::vector<std::pair<double, double>> pts;
    for (int per_axis : resolutions) {
        const GridField mask = rasterize_union(S, clip_lo, clip_hi, per_axis);
        const double occ = occupied_fraction(mask);
        require(occ > 0.0, "occupancy_sweep: union missed every cell");
        report.resolutions.push_back(per_axis);
        report.occupancy.push_back(occ);
        pts.emplace_back(std::log(static_cast<double>(per_axis)), std::log(occ));
    }
    report.fit = fit_line(pts);
    if (report.fit.slope >= -0.05)
        report.verdict = "positive-measure-consistent";
    else if (report.fit.slope <= -0.1)
        report.verdict = "null-consistent";
    else
        report.verdict = "inconclusive";
    return report;
}

/// Default clip box [0,1]^k x [-2, k+2]^{d-k}: covers all sections of planes
/// with parameters in [0,1]^{(k+1)(d-k)}.
inline void default_clip_box(int d, int k, std::vector<double>& lo, std::vector<double>& hi) {
    lo.assign(d, 0.0);
    hi.assign(d, 1.0);
    for (int a = k; a < d; ++a) {
        lo[a] = -2.0;
        hi[a] = static_cast<double>(k) + 2.0;
    }
}

/// The low-dimension plane family whose union is d-null: free parameters fill
/// [0,1] on all columns but the last, the last intercept runs over a Cantor
/// set and the last slope row is pinned to zero.
inline PlaneSet counterexample_set(int d, int k, const CantorSpec& cantor, int fill_per_axis,
                                   std::size_t atom_budget = kDefaultAtomBudget) {
    require(d >= 2 && k >= 1 && k < d, "counterexample_set: need 1 <= k < d");
    require(fill_per_axis >= 1, "counterexample_set: fill_per_axis must be >= 1");
    const int m = d - k;
    const DiscreteMeasure cantor_mu = make_cantor_measure(cantor, atom_budget);
    const DiscreteMeasure fill = uniform_grid_measure(1, fill_per_axis, atom_budget);
    const DiscreteMeasure zero = point_mass({0.0});

    // Coordinates in flattening order (row-major, intercept row first):
    // row i = 0..k, column j = 1..m; the last column is Cantor (i = 0) or
    // pinned zero (i >= 1).
    DiscreteMeasure S_mu;
    bool first = true;
    for (int i = 0; i <= k; ++i) {
        for (int j = 1; j <= m; ++j) {
            const DiscreteMeasure& factor =
                (j == m) ? (i == 0 ? cantor_mu : zero) : fill;
            S_mu = first ? factor : product_measure(S_mu, factor, atom_budget);
            first = false;
        }
    }
    PlaneSet S{d, k, std::move(S_mu)};
    S.validate();
    return S;
}

/// Box-counting dimension of the union: slope of log N(delta) against
/// log(1/delta), with N = occupied cells and 1/delta = per-axis resolution.
inline SlopeFit union_dimension_estimate(const PlaneSet& S, std::span<const double> clip_lo,
                                         std::span<const double> clip_hi,
                                         std::span<const int> resolutions) {
    require(resolutions.size() >= 3, "union_dimension_estimate: need at least 3 resolutions");
    std::vector<std::pair<double, double>> pts;
    for (int per_axis : resolutions) {
        const GridField mask = rasterize_union(S, clip_lo, clip_hi, per_axis);
        double hit = 0.0;
        for (double v : mask.values) hit += v;
        require(hit > 0.0, "union_dimension_estimate: union missed every cell");
        pts.emplace_back(std::log(static_cast<double>(per_axis)), std::log(hit));
    }
    return fit_line(pts);
}

/// Pushforward of A0 x A1 under (a, b) -> a + x b.
inline DiscreteMeasure sumset_section(const DiscreteMeasure& a0, const DiscreteMeasure& a1,
                                      double x, std::size_t atom_budget = kDefaultAtomBudget) {
    a0.validate();
    a1.validate();
    require(a0.ambient_dim == a1.ambient_dim, "sumset_section: ambient dimensions differ");
    const double count = static_cast<double>(a0.size()) * static_cast<double>(a1.size());
    if (count > static_cast<double>(atom_budget))
        throw BudgetError("sumset_section: atom count exceeds budget");
    const int d = a0.ambient_dim;
    DiscreteMeasure out;
    out.ambient_dim = d;
    out.coords.reserve(static_cast<std::size_t>(count) * d);
    out.weights.reserve(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < a0.size(); ++i) {
        auto p = a0.point(i);
        for (std::size_t j = 0; j < a1.size(); ++j) {
            auto q = a1.point(j);
            for (int a = 0; a < d; ++a) out.coords.push_back(p[a] + x * q[a]);
            out.weights.push_back(a0.weights[i] * a1.weights[j]);
        }
    }
    if (a0.resolution_hint > 0.0 && a1.resolution_hint > 0.0)
        out.resolution_hint = std::min(a0.resolution_hint, std::abs(x) * a1.resolution_hint);
    out.refresh_diameter();
    out.validate();
    return out;
}

}  // namespace gmtlab
