#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmtlab/common.hpp"
#include "gmtlab/rng.hpp"
#include "gmtlab/slope_fit.hpp"

namespace gmtlab {

/// Weighted point cloud approximating a compactly supported Borel measure.
/// Immutable by convention after construction; all operations below are pure.
struct DiscreteMeasure {
    int ambient_dim = 0;
    /// Flat row-major storage: atom i occupies coords[i*ambient_dim ...].
    std::vector<double> coords;
    std::vector<double> weights;
    /// Diameter of the support (all atoms lie within a ball of this radius
    /// around the weighted centroid).
    double diameter_hint = 0.0;
    /// Smallest scale at which the atomic approximation is faithful
    /// (construction cell size). 0 means unknown.
    double resolution_hint = 0.0;

    std::size_t size() const { return weights.size(); }

    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(ambient_dim),
                static_cast<std::size_t>(ambient_dim)};
    }

    double total_mass() const { return pairwise_sum(weights); }

    /// Recomputes diameter_hint from the atoms. Called by every constructor.
    void refresh_diameter() {
        const std::size_t n = size();
        if (n == 0) {
            diameter_hint = 0.0;
            return;
        }
        const int d = ambient_dim;
        std::vector<double> centroid(d, 0.0);
        const double mass = total_mass();
        for (std::size_t i = 0; i < n; ++i) {
            auto p = point(i);
            for (int a = 0; a < d; ++a) centroid[a] += weights[i] * p[a];
        }
        for (int a = 0; a < d; ++a) centroid[a] /= mass;
        double r2max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto p = point(i);
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double t = p[a] - centroid[a];
                r2 += t * t;
            }
            r2max = std::max(r2max, r2);
        }
        diameter_hint = 2.0 * std::sqrt(r2max);
    }

    void validate() const {
        require(ambient_dim >= 1, "measure: ambient_dim must be >= 1");
        require(!weights.empty(), "measure: needs at least one atom");
        require(coords.size() ==
                    weights.size() * static_cast<std::size_t>(ambient_dim),
                "measure: coords/weights length mismatch");
        for (double w : weights)
            require(std::isfinite(w) && w >= 0.0, "measure: weights must be finite and >= 0");
        for (double c : coords) require(std::isfinite(c), "measure: coordinates must be finite");
        require(total_mass() > 0.0, "measure: total mass must be positive");
        require(diameter_hint >= 0.0, "measure: diameter_hint must be >= 0");
    }
};

/// Self-similar construction on [0,1]: `branches` maps of ratio `ratio` with
/// translation offsets, iterated to `depth`.
struct CantorSpec {
    int branches = 2;
    double ratio = 1.0 / 3.0;
    int depth = 1;
    /// Offsets in [0, 1-ratio]; empty means evenly spaced.
    std::vector<double> offsets;

    std::vector<double> resolved_offsets() const {
        if (!offsets.empty()) return offsets;
        std::vector<double> o(branches);
        for (int b = 0; b < branches; ++b)
            o[b] = branches == 1 ? 0.0
                                 : b * (1.0 - ratio) / static_cast<double>(branches - 1);
        return o;
    }

    /// log(m) / log(1/r)
    double similarity_dimension() const { return std::log(double(branches)) / std::log(1.0 / ratio); }

    void validate() const {
        require(branches >= 2, "cantor: branches must be >= 2");
        require(ratio > 0.0 && ratio <= 1.0 / branches, "cantor: ratio must lie in (0, 1/branches]");
        require(depth >= 1, "cantor: depth must be >= 1");
        if (!offsets.empty()) {
            require(static_cast<int>(offsets.size()) == branches,
                    "cantor: offsets length must equal branches");
            for (double o : offsets)
                require(o >= 0.0 && o <= 1.0 - ratio, "cantor: offsets must lie in [0, 1-ratio]");
        }
        const double s = similarity_dimension();
        require(s > 0.0 && s <= 1.0, "cantor: similarity dimension must lie in (0, 1]");
    }
};

/// Fitted ball-mass growth exponent: max-ball-mass(r) <= constant * r^exponent
/// on every probed radius (up to the fit's residual in log coordinates).
struct FrostmanReport {
    double exponent = 0.0;
    double constant = 0.0;
    SlopeFit fit;
    std::vector<double> radii;
};

/// How ball / tube mass maximization picks candidate centers.
struct ProbePolicy {
    /// Atom centers are always probed; above this count a seeded subsample is used.
    std::size_t max_atom_centers = 4096;
    /// Extra uniform random centers in the support bounding box.
    std::size_t random_centers = 0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Constructors

inline DiscreteMeasure make_cantor_measure(const CantorSpec& spec,
                                           std::size_t atom_budget = kDefaultAtomBudget) {
    spec.validate();
    double count = std::pow(double(spec.branches), double(spec.depth));
    if (count > static_cast<double>(atom_budget))
        throw BudgetError("make_cantor_measure: branches^depth exceeds atom budget");
    const std::size_t n = static_cast<std::size_t>(count);
    const std::vector<double> offsets = spec.resolved_offsets();
    std::vector<double> scale(spec.depth);
    for (int t = 0; t < spec.depth; ++t) scale[t] = std::pow(spec.ratio, t);

    DiscreteMeasure mu;
    mu.ambient_dim = 1;
    mu.coords.resize(n);
    mu.weights.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t idx = 0; idx < n; ++idx) {
        // digit t selects the branch applied at construction level t;
        // atoms are the LEFT ENDPOINTS of the depth-level intervals.
        std::size_t rest = idx;
        double p = 0.0;
        for (int t = spec.depth - 1; t >= 0; --t) {
            p += offsets[rest % spec.branches] * scale[t];
            rest /= spec.branches;
        }
        mu.coords[idx] = p;
    }
    mu.resolution_hint = std::pow(spec.ratio, spec.depth);
    mu.refresh_diameter();
    mu.validate();
    return mu;
}

inline DiscreteMeasure product_measure(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                       std::size_t atom_budget = kDefaultAtomBudget) {
    a.validate();
    b.validate();
    const double count = static_cast<double>(a.size()) * static_cast<double>(b.size());
    if (count > static_cast<double>(atom_budget))
        throw BudgetError("product_measure: atom count exceeds budget");
    DiscreteMeasure mu;
    mu.ambient_dim = a.ambient_dim + b.ambient_dim;
    mu.coords.reserve(static_cast<std::size_t>(count) * mu.ambient_dim);
    mu.weights.reserve(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto pa = a.point(i);
        for (std::size_t j = 0; j < b.size(); ++j) {
            auto pb = b.point(j);
            mu.coords.insert(mu.coords.end(), pa.begin(), pa.end());
            mu.coords.insert(mu.coords.end(), pb.begin(), pb.end());
            mu.weights.push_back(a.weights[i] * b.weights[j]);
        }
    }
    if (a.resolution_hint > 0.0 && b.resolution_hint > 0.0)
        mu.resolution_hint = std::min(a.resolution_hint, b.resolution_hint);
    mu.refresh_diameter();
    mu.validate();
    return mu;
}

/// Equally weighted atoms at the cell centers of [0,1]^ambient_dim.
inline DiscreteMeasure uniform_grid_measure(int ambient_dim, int per_axis,
                                            std::size_t atom_budget = kDefaultAtomBudget) {
    require(ambient_dim >= 1, "uniform_grid_measure: ambient_dim must be >= 1");
    require(per_axis >= 1, "uniform_grid_measure: per_axis must be >= 1");
    const double count = std::pow(double(per_axis), double(ambient_dim));
    if (count > static_cast<double>(atom_budget))
        throw BudgetError("uniform_grid_measure: atom count exceeds budget");
    const std::size_t n = static_cast<std::size_t>(count);
    DiscreteMeasure mu;
    mu.ambient_dim = ambient_dim;
    mu.coords.resize(n * ambient_dim);
    mu.weights.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t rest = idx;
        for (int a = ambient_dim - 1; a >= 0; --a) {
            mu.coords[idx * ambient_dim + a] =
                (static_cast<double>(rest % per_axis) + 0.5) / per_axis;
            rest /= per_axis;
        }
    }
    mu.resolution_hint = 1.0 / per_axis;
    mu.refresh_diameter();
    mu.validate();
    return mu;
}

inline DiscreteMeasure point_mass(std::vector<double> location, double mass = 1.0) {
    DiscreteMeasure mu;
    mu.ambient_dim = static_cast<int>(location.size());
    mu.coords = std::move(location);
    mu.weights = {mass};
    mu.refresh_diameter();
    mu.validate();
    return mu;
}

/// Pushforward under p -> linear*p + shift. linear is row-major rows x cols.
inline DiscreteMeasure pushforward_affine(const DiscreteMeasure& mu,
                                          std::span<const double> linear, int rows,
                                          std::span<const double> shift) {
    mu.validate();
    const int cols = mu.ambient_dim;
    require(rows >= 1, "pushforward_affine: target dimension must be >= 1");
    require(linear.size() == static_cast<std::size_t>(rows) * cols,
            "pushforward_affine: matrix shape mismatch");
    require(shift.empty() || shift.size() == static_cast<std::size_t>(rows),
            "pushforward_affine: shift length mismatch");
    DiscreteMeasure out;
    out.ambient_dim = rows;
    out.weights = mu.weights;
    out.coords.resize(mu.size() * rows);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        auto p = mu.point(i);
        for (int r = 0; r < rows; ++r) {
            double v = shift.empty() ? 0.0 : shift[r];
            for (int c = 0; c < cols; ++c) v += linear[r * cols + c] * p[c];
            out.coords[i * rows + r] = v;
        }
    }
    out.refresh_diameter();
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Ball mass and Frostman fitting

/// mu(closed ball B(center, r)).
inline double ball_mass(const DiscreteMeasure& mu, std::span<const double> center, double r) {
    const int d = mu.ambient_dim;
    const double r2 = r * r;
    double mass = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double* p = mu.coords.data() + i * d;
        double dist2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double t = p[a] - center[a];
            dist2 += t * t;
        }
        if (dist2 <= r2) mass += mu.weights[i];
    }
    return mass;
}

namespace detail {

/// Seeded subsample of atom indices, without replacement, deterministic.
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t cap,
                                                  std::uint64_t seed, std::uint64_t tag) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    if (n <= cap) return idx;
    Rng rng(seed, tag);
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t j = i + rng.index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    return idx;
}

inline void bounding_box(const DiscreteMeasure& mu, std::vector<double>& lo,
                         std::vector<double>& hi) {
    const int d = mu.ambient_dim;
    lo.assign(d, std::numeric_limits<double>::infinity());
    hi.assign(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        auto p = mu.point(i);
        for (int a = 0; a < d; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }
}

inline void check_radii(const DiscreteMeasure& mu, std::span<const double> radii) {
    require(radii.size() >= 3, "frostman: needs at least 3 radii (fit underdetermined)");
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        require(radii[i] > radii[i + 1], "frostman: radii must be strictly decreasing");
    for (double r : radii) {
        require(r > 0.0, "frostman: radii must be positive");
        if (mu.diameter_hint > 0.0)
            require(r < mu.diameter_hint, "frostman: radius exceeds support diameter");
        if (mu.resolution_hint > 0.0)
            require(r >= 2.0 * mu.resolution_hint,
                    "frostman: radius below 2x the atomic resolution");
    }
}

/// Fit of log max-mass against log radius shared by ball and tube estimators.
inline FrostmanReport frostman_from_masses(std::span<const double> radii,
                                           std::span<const double> max_mass, int ambient_dim) {
    bool any_positive = false;
    for (double m : max_mass) any_positive |= (m > 0.0);
    require(any_positive, "frostman: all probed masses are zero (degenerate probe set)");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        // An empty ball at some probed radius would break the log fit; the
        // atom-centered probe policy guarantees mass >= the smallest atom weight.
        require(max_mass[i] > 0.0, "frostman: zero mass at a probed radius");
        pts.emplace_back(std::log(radii[i]), std::log(max_mass[i]));
    }
    FrostmanReport report;
    report.fit = fit_line(pts);
    report.exponent = std::clamp(report.fit.slope, 0.0, double(ambient_dim));
    report.radii.assign(radii.begin(), radii.end());
    report.constant = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
        report.constant = std::max(report.constant,
                                   max_mass[i] / std::pow(radii[i], report.exponent));
    return report;
}

}  // namespace detail

/// Fits alpha in max_p mu(B(p, r)) <= c * r^alpha over the probed radii.
/// Candidate centers are the atoms themselves (a rigorous lower bound for the
/// sup over all centers) plus optional seeded random centers.
inline FrostmanReport estimate_frostman_exponent(const DiscreteMeasure& mu,
                                                 std::span<const double> radii,
                                                 const ProbePolicy& policy = {}) {
    mu.validate();
    detail::check_radii(mu, radii);

    const int d = mu.ambient_dim;
    std::vector<std::size_t> atom_centers =
        detail::subsample_indices(mu.size(), policy.max_atom_centers, policy.seed, 0x6d61737301ULL);
    std::vector<double> extra;
    if (policy.random_centers > 0) {
        std::vector<double> lo, hi;
        detail::bounding_box(mu, lo, hi);
        Rng rng(policy.seed, 0x6d61737302ULL);
        extra.resize(policy.random_centers * d);
        for (std::size_t i = 0; i < policy.random_centers; ++i)
            rng.box_point(lo, hi, {extra.data() + i * d, static_cast<std::size_t>(d)});
    }

    // Per center, one pass over atoms fills all radius buckets at once.
    std::vector<double> max_mass(radii.size(), 0.0);
    std::vector<double> r2(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) r2[k] = radii[k] * radii[k];
    auto probe = [&](const double* center) {
        std::vector<double> bucket(radii.size(), 0.0);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double* p = mu.coords.data() + i * d;
            double dist2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double t = p[a] - center[a];
                dist2 += t * t;
            }
            if (dist2 > r2[0]) continue;
            // radii are strictly decreasing; find the smallest radius containing the atom
            std::size_t k = 0;
            while (k + 1 < radii.size() && dist2 <= r2[k + 1]) ++k;
            bucket[k] += mu.weights[i];
        }
        double acc = 0.0;
        for (std::size_t k = radii.size(); k-- > 0;) {
            // ball of radius radii[k] contains buckets k, k+1, ...
            acc = 0.0;
            for (std::size_t j = k; j < radii.size(); ++j) acc += bucket[j];
            max_mass[k] = std::max(max_mass[k], acc);
        }
    };
    for (std::size_t idx : atom_centers) probe(mu.coords.data() + idx * d);
    for (std::size_t i = 0; i * d < extra.size(); ++i) probe(extra.data() + i * d);

    return detail::frostman_from_masses(radii, max_mass, d);
}

}  // namespace gmtlab
