#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gmtlab/common.hpp"
#include "gmtlab/measures.hpp"
#include "gmtlab/parallel.hpp"
#include "gmtlab/projections.hpp"
#include "gmtlab/slope_fit.hpp"

namespace gmtlab {

/// Scalar field sampled at cell centers of a regular grid over a box in R^d,
/// continuous by multilinear interpolation between centers (constant past the
/// outermost centers).
struct GridField {
    int d = 0;
    std::vector<int> shape;
    std::vector<double> lo, hi;
    std::vector<double> values;  // row-major, last axis fastest

    /// Structural checks only; O(d), safe to call in hot loops.
    void validate_shape() const {
        require(d >= 1, "grid field: d must be >= 1");
        require(static_cast<int>(shape.size()) == d && static_cast<int>(lo.size()) == d &&
                    static_cast<int>(hi.size()) == d,
                "grid field: shape/box arity mismatch");
        std::size_t total = 1;
        for (int a = 0; a < d; ++a) {
            require(shape[a] >= 1, "grid field: shape entries must be >= 1");
            require(hi[a] > lo[a], "grid field: degenerate box");
            total *= static_cast<std::size_t>(shape[a]);
        }
        require(values.size() == total, "grid field: value count != shape product");
    }

    void validate() const {
        validate_shape();
        for (double v : values) require(std::isfinite(v), "grid field: values must be finite");
    }

    double cell_width(int axis) const { return (hi[axis] - lo[axis]) / shape[axis]; }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < d; ++a) v *= cell_width(a);
        return v;
    }

    bool contains(std::span<const double> p, double slack = 0.0) const {
        for (int a = 0; a < d; ++a)
            if (p[a] < lo[a] - slack || p[a] > hi[a] + slack) return false;
        return true;
    }

    /// Multilinear interpolation at an arbitrary point of the box.
    double interpolate(std::span<const double> p) const {
        int base[8];
        double frac[8];
        require(d <= 8, "grid field: interpolation dimension out of range");
        for (int a = 0; a < d; ++a) {
            const double u = (p[a] - lo[a]) / cell_width(a) - 0.5;
            double fl = std::floor(u);
            int b = static_cast<int>(fl);
            double f = u - fl;
            if (b < 0) {
                b = 0;
                f = 0.0;
            }
            if (b >= shape[a] - 1) {
                b = std::max(0, shape[a] - 2);
                f = shape[a] == 1 ? 0.0 : 1.0;
            }
            base[a] = b;
            frac[a] = f;
        }
        double result = 0.0;
        const int corners = 1 << d;
        for (int c = 0; c < corners; ++c) {
            double w = 1.0;
            std::size_t idx = 0;
            for (int a = 0; a < d; ++a) {
                const int bit = (c >> a) & 1;
                int ia = base[a] + bit;
                if (ia > shape[a] - 1) ia = shape[a] - 1;
                w *= bit ? frac[a] : 1.0 - frac[a];
                idx = idx * shape[a] + static_cast<std::size_t>(ia);
            }
            result += w * values[idx];
        }
        return result;
    }
};

/// Samples an analytic function at the cell centers of a fresh grid.
inline GridField sample_field(int d, std::span<const int> shape, std::span<const double> lo,
                              std::span<const double> hi,
                              const std::function<double(std::span<const double>)>& fn) {
    GridField f;
    f.d = d;
    f.shape.assign(shape.begin(), shape.end());
    f.lo.assign(lo.begin(), lo.end());
    f.hi.assign(hi.begin(), hi.end());
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(shape[a]);
    f.values.resize(total);
    std::vector<double> p(d);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (int a = d - 1; a >= 0; --a) {
            const int ia = static_cast<int>(rest % shape[a]);
            rest /= static_cast<std::size_t>(shape[a]);
            p[a] = lo[a] + (ia + 0.5) * f.cell_width(a);
        }
        f.values[idx] = fn(p);
    }
    f.validate();
    return f;
}

/// Resamples a field onto a new per-axis resolution via its interpolant.
inline GridField resample_field(const GridField& f, int per_axis) {
    std::vector<int> shape(f.d, per_axis);
    return sample_field(f.d, shape, f.lo, f.hi,
                        [&](std::span<const double> p) { return f.interpolate(p); });
}

// ---------------------------------------------------------------------------

/// Exponent bookkeeping for the transform bound:
/// 1/2 - 1/q = (alpha - (k+1)(d-k) + k - eps) / (2(d-k)).
struct TransformBoundConfig {
    int d = 2;
    int k = 1;
    double alpha = 0.0;
    double eps = 0.0;
    double q = 2.0;
    double q_conj = 2.0;
};

inline TransformBoundConfig compute_q(int d, int k, double alpha, double eps) {
    require(d >= 2 && k >= 1 && k < d, "compute_q: need 1 <= k < d");
    const double m = static_cast<double>((k + 1) * (d - k));
    require(alpha > m - k && alpha < m,
            "compute_q: alpha outside the open interval ((k+1)(d-k)-k, (k+1)(d-k))");
    require(eps > 0.0 && eps < alpha - m + k,
            "compute_q: eps outside the open interval (0, alpha-(k+1)(d-k)+k)");
    const double rhs = (alpha - m + k - eps) / (2.0 * (d - k));
    TransformBoundConfig cfg;
    cfg.d = d;
    cfg.k = k;
    cfg.alpha = alpha;
    cfg.eps = eps;
    cfg.q = 1.0 / (0.5 - rhs);
    cfg.q_conj = cfg.q / (cfg.q - 1.0);
    return cfg;
}

/// Tf(y): midpoint tensor quadrature of f along the plane's graph over
/// [0,1]^k. Throws if the plane's image escapes f's box (clipping hazard).
inline double transform(const GridField& f, const PlaneParam& y, int nodes_per_axis = 256) {
    f.validate_shape();
    y.validate();
    require(f.d == y.d, "transform: field and plane dimensions differ");
    require(nodes_per_axis >= 1, "transform: need at least one quadrature node");
    const int k = y.k;
    require(k <= 4, "transform: quadrature dimension out of range");
    std::size_t total = 1;
    for (int i = 0; i < k; ++i) total *= static_cast<std::size_t>(nodes_per_axis);
    double sum = 0.0;
    std::vector<double> x(k);
    const double slack = 1e-12;
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (int i = k - 1; i >= 0; --i) {
            x[i] = (static_cast<double>(rest % nodes_per_axis) + 0.5) / nodes_per_axis;
            rest /= static_cast<std::size_t>(nodes_per_axis);
        }
        const std::vector<double> p = plane_point(y, x);
        require(f.contains(p, slack), "transform: plane image escapes the field's box");
        sum += f.interpolate(p);
    }
    return sum / static_cast<double>(total);
}

/// ||f||_{L^2_x(L^r_{x'})}: inner L^r over the last d-k axes per x-cell, then
/// L^2 over the first k axes, with cell-volume weights.
inline double mixed_norm(const GridField& f, int k, double r) {
    f.validate();
    require(k >= 1 && k < f.d, "mixed_norm: need 1 <= k < d");
    require(r >= 1.0, "mixed_norm: exponent must be >= 1");
    std::size_t n_outer = 1, n_inner = 1;
    double vol_outer = 1.0, vol_inner = 1.0;
    for (int a = 0; a < k; ++a) {
        n_outer *= static_cast<std::size_t>(f.shape[a]);
        vol_outer *= f.cell_width(a);
    }
    for (int a = k; a < f.d; ++a) {
        n_inner *= static_cast<std::size_t>(f.shape[a]);
        vol_inner *= f.cell_width(a);
    }
    std::vector<double> outer_terms(n_outer);
    for (std::size_t o = 0; o < n_outer; ++o) {
        std::vector<double> inner(n_inner);
        for (std::size_t i = 0; i < n_inner; ++i)
            inner[i] = std::pow(std::abs(f.values[o * n_inner + i]), r) * vol_inner;
        const double inner_norm = std::pow(pairwise_sum(inner), 1.0 / r);
        outer_terms[o] = vol_outer * inner_norm * inner_norm;
    }
    return std::sqrt(pairwise_sum(outer_terms));
}

/// Normalized compactly supported bump (1-h, tensorized): integral 1 in each
/// coordinate, support width 2h.
inline double bump_profile(std::span<const double> u, double h) {
    double prod = 1.0;
    for (double ui : u) {
        const double t = ui / h;
        if (std::abs(t) >= 1.0) return 0.0;
        const double b = 1.0 - t * t;
        prod *= (35.0 / 32.0) * b * b * b / h;
    }
    return prod;
}

/// T*g at (x, x'): sum over plane atoms of g * weight * bump(x' - section).
inline double adjoint_apply(std::span<const double> g, const PlaneSet& S,
                            std::span<const double> x, std::span<const double> x_prime,
                            double h) {
    S.validate();
    require(h > 0.0, "adjoint_apply: smoothing width must be positive");
    require(g.size() == S.measure.size(), "adjoint_apply: per-atom weight length mismatch");
    require(x.size() == static_cast<std::size_t>(S.k) &&
                x_prime.size() == static_cast<std::size_t>(S.d - S.k),
            "adjoint_apply: point shape mismatch");
    const int m = S.d - S.k;
    double sum = 0.0;
    std::vector<double> diff(m);
    for (std::size_t a = 0; a < S.measure.size(); ++a) {
        if (g[a] == 0.0) continue;
        const PlaneParam y = S.plane(a);
        const std::vector<double> section = plane_section(y, x);
        for (int j = 0; j < m; ++j) diff[j] = x_prime[j] - section[j];
        const double phi = bump_profile(diff, h);
        if (phi != 0.0) sum += g[a] * S.measure.weights[a] * phi;
    }
    return sum;
}

// ---------------------------------------------------------------------------

struct BoundRatioReport {
    TransformBoundConfig config;
    struct Trial {
        std::string f_descriptor;
        int per_axis = 0;
        double transform_norm = 0.0;  // ||Tf||_{L^2(mu)}
        double mixed = 0.0;           // ||f||_{L^2_x(L^{q'}_{x'})}
        double ratio = 0.0;
    };
    std::vector<Trial> trials;
    struct SweepPoint {
        int per_axis = 0;
        double max_ratio = 0.0;
    };
    std::vector<SweepPoint> resolution_sweep;
    SlopeFit fit;  // log max ratio vs log per-axis resolution
    double slope_threshold = 0.1;
    bool pass = false;
};

/// ||Tf||_{L^2(mu_S)} for a discrete plane family.
inline double transform_l2_norm(const GridField& f, const PlaneSet& S, int nodes_per_axis) {
    std::vector<double> terms(S.measure.size());
    par::for_chunks(S.measure.size(), par::kDefaultChunks,
                    [&](std::size_t, std::size_t b, std::size_t e) {
                        for (std::size_t a = b; a < e; ++a) {
                            const double tf = transform(f, S.plane(a), nodes_per_axis);
                            terms[a] = S.measure.weights[a] * tf * tf;
                        }
                    });
    return std::sqrt(pairwise_sum(terms));
}

/// Ratio stability experiment for the transform bound: the constant is never
/// estimated, only the growth of max ratios across a resolution sweep.
inline BoundRatioReport bound_ratio_experiment(const PlaneSet& S,
                                               const FrostmanReport& alpha_report, double eps,
                                               const std::vector<GridField>& f_family,
                                               std::span<const int> resolutions,
                                               int nodes_per_axis = 256,
                                               double slope_threshold = 0.1) {
    S.validate();
    require(!f_family.empty(), "bound_ratio_experiment: empty test-function family");
    require(resolutions.size() >= 3, "bound_ratio_experiment: need at least 3 resolutions");
    BoundRatioReport report;
    report.config = compute_q(S.d, S.k, alpha_report.exponent, eps);
    report.slope_threshold = slope_threshold;
    std::vector<std::pair<double, double>> pts;
    for (int per_axis : resolutions) {
        double max_ratio = 0.0;
        for (std::size_t fi = 0; fi < f_family.size(); ++fi) {
            const GridField g = resample_field(f_family[fi], per_axis);
            const double tnorm = transform_l2_norm(g, S, nodes_per_axis);
            const double mnorm = mixed_norm(g, S.k, report.config.q_conj);
            require(mnorm > 0.0, "bound_ratio_experiment: zero mixed norm");
            const double ratio = tnorm / mnorm;
            report.trials.push_back({"f" + std::to_string(fi), per_axis, tnorm, mnorm, ratio});
            max_ratio = std::max(max_ratio, ratio);
        }
        report.resolution_sweep.push_back({per_axis, max_ratio});
        pts.emplace_back(std::log(static_cast<double>(per_axis)), std::log(max_ratio));
    }
    report.fit = fit_line(pts);
    report.pass = report.fit.slope <= slope_threshold;
    return report;
}

}  // namespace gmtlab
