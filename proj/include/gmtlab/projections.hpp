#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "gmtlab/common.hpp"
#include "gmtlab/measures.hpp"

namespace gmtlab {

/// Parameter matrix x = (x_i^j) of the projection family
/// P_x(p) = (p_i + sum_j x_i^j p_{l+j})_{i=1..l}, viewed as a point of
/// R^{l(n-l)}. Row-major storage, i outer.
struct ProjectionParam {
    int n = 2;
    int l = 1;
    std::vector<double> entries;  // l rows, n-l columns

    int cols() const { return n - l; }

    double at(int i, int j) const { return entries[i * cols() + j]; }

    void validate() const {
        require(n >= 2, "projection: n must be >= 2");
        require(l >= 1 && l < n, "projection: need 1 <= l < n");
        require(entries.size() == static_cast<std::size_t>(l) * (n - l),
                "projection: entries must be an l x (n-l) matrix");
        for (double e : entries) require(std::isfinite(e), "projection: entries must be finite");
    }
};

/// Graph-coordinate parameter y = (y_i^j) of an affine k-plane in R^d:
/// the plane is {(x, y_0 + sum_i x_i y_i) : x in R^k}. Row-major, the
/// intercept row i = 0 first.
struct PlaneParam {
    int d = 2;
    int k = 1;
    std::vector<double> entries;  // k+1 rows, d-k columns

    int cols() const { return d - k; }

    double at(int i, int j) const { return entries[i * cols() + j]; }

    void validate() const {
        require(d >= 2, "plane: d must be >= 2");
        require(k >= 1 && k < d, "plane: need 1 <= k < d");
        require(entries.size() == static_cast<std::size_t>(k + 1) * (d - k),
                "plane: entries must be a (k+1) x (d-k) matrix");
        for (double e : entries) require(std::isfinite(e), "plane: entries must be finite");
    }
};

/// A sampled family of k-planes: each atom of `measure` is a flattened
/// PlaneParam (row-major, intercept row first), weights give the measure on
/// the parameter set.
struct PlaneSet {
    int d = 2;
    int k = 1;
    DiscreteMeasure measure;

    void validate() const {
        require(d >= 2 && k >= 1 && k < d, "plane set: need 1 <= k < d, d >= 2");
        measure.validate();
        require(measure.ambient_dim == (k + 1) * (d - k),
                "plane set: measure dimension must be (k+1)(d-k)");
    }

    PlaneParam plane(std::size_t atom) const {
        auto p = measure.point(atom);
        return PlaneParam{d, k, {p.begin(), p.end()}};
    }
};

// ---------------------------------------------------------------------------

inline std::vector<double> project_point(const ProjectionParam& x, std::span<const double> p) {
    x.validate();
    require(p.size() == static_cast<std::size_t>(x.n), "project_point: point length != n");
    std::vector<double> out(x.l);
    const int m = x.cols();
    for (int i = 0; i < x.l; ++i) {
        double v = p[i];
        for (int j = 0; j < m; ++j) v += x.at(i, j) * p[x.l + j];
        out[i] = v;
    }
    return out;
}

/// T_x(xi) = (sum_i x_i^j xi_i)_{j=1..n-l}; the companion map in the identity
/// <xi, P_x p> = <(xi, T_x xi), p>.
inline std::vector<double> t_map(const ProjectionParam& x, std::span<const double> xi) {
    x.validate();
    require(xi.size() == static_cast<std::size_t>(x.l), "t_map: frequency length != l");
    const int m = x.cols();
    std::vector<double> out(m, 0.0);
    for (int i = 0; i < x.l; ++i)
        for (int j = 0; j < m; ++j) out[j] += x.at(i, j) * xi[i];
    return out;
}

/// Residual |<xi, P_x p> - <(xi, T_x xi), p>| of the defining identity.
inline double check_duality_identity(const ProjectionParam& x, std::span<const double> xi,
                                     std::span<const double> p) {
    const std::vector<double> proj = project_point(x, p);
    const std::vector<double> txi = t_map(x, xi);
    const double lhs = dot(xi, proj);
    double rhs = 0.0;
    for (int i = 0; i < x.l; ++i) rhs += xi[i] * p[i];
    for (int j = 0; j < x.cols(); ++j) rhs += txi[j] * p[x.l + j];
    return std::abs(lhs - rhs);
}

/// The point of the plane above x: (x_1..x_k, y_0^j + sum_i x_i y_i^j).
inline std::vector<double> plane_point(const PlaneParam& y, std::span<const double> x) {
    y.validate();
    require(x.size() == static_cast<std::size_t>(y.k), "plane_point: x length != k");
    std::vector<double> out(y.d);
    for (int i = 0; i < y.k; ++i) out[i] = x[i];
    for (int j = 0; j < y.cols(); ++j) {
        double v = y.at(0, j);
        for (int i = 1; i <= y.k; ++i) v += x[i - 1] * y.at(i, j);
        out[y.k + j] = v;
    }
    return out;
}

/// Section values only (the last d-k coordinates of plane_point).
inline std::vector<double> plane_section(const PlaneParam& y, std::span<const double> x) {
    std::vector<double> full = plane_point(y, x);
    return {full.begin() + y.k, full.end()};
}

inline std::vector<double> flatten(const PlaneParam& y) { return y.entries; }

/// Embeds x in [0,1]^k as the projection parameter X (with n = (k+1)(d-k),
/// l = d-k) for which project_point(X, flatten(y)) gives the plane's section
/// values at x, and T_X(xi) = (x_1 xi, ..., x_k xi) concatenated.
inline ProjectionParam plane_as_projection(int d, int k, std::span<const double> x) {
    require(d >= 2 && k >= 1 && k < d, "plane_as_projection: need 1 <= k < d");
    require(x.size() == static_cast<std::size_t>(k), "plane_as_projection: x length != k");
    for (double xi : x)
        require(xi >= 0.0 && xi <= 1.0, "plane_as_projection: x must lie in [0,1]^k");
    const int l = d - k;          // projected dimension
    const int n = (k + 1) * l;    // flattened plane-parameter dimension
    ProjectionParam X;
    X.n = n;
    X.l = l;
    X.entries.assign(static_cast<std::size_t>(l) * (n - l), 0.0);
    // flatten(y) = (y_0^1..y_0^l, y_1^1..y_1^l, ..., y_k^1..y_k^l); row m of y
    // contributes x_m to the column pairing coordinate i with y_m^i.
    for (int i = 0; i < l; ++i)
        for (int m = 1; m <= k; ++m) X.entries[i * (n - l) + (m - 1) * l + i] = x[m - 1];
    return X;
}

/// Fits beta in lambda({x : |T_x xi - p2| <= r}) <= c r^beta, maximizing over
/// unit directions xi and candidate centers p2 (images of lambda's atoms under
/// T_x, plus optional random centers).
inline FrostmanReport slice_frostman_exponent(const DiscreteMeasure& lambda, int l,
                                              std::span<const double> directions,
                                              std::span<const double> radii,
                                              const ProbePolicy& policy = {}) {
    lambda.validate();
    require(l >= 1 && lambda.ambient_dim % l == 0,
            "slice_frostman: lambda dimension must be a multiple of l");
    const int m = lambda.ambient_dim / l;  // n - l
    require(!directions.empty() && directions.size() % l == 0,
            "slice_frostman: directions must be nonempty, length multiple of l");
    detail::check_radii(lambda, radii);
    const std::size_t n_dir = directions.size() / l;
    for (std::size_t q = 0; q < n_dir; ++q) {
        const double nn = norm(directions.subspan(q * l, l));
        require(std::abs(nn - 1.0) <= 1e-9, "slice_frostman: directions must be unit vectors");
    }

    std::vector<double> max_mass(radii.size(), 0.0);
    std::vector<double> image(lambda.size() * m);
    std::vector<double> r2(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) r2[i] = radii[i] * radii[i];

    std::vector<std::size_t> center_atoms = detail::subsample_indices(
        lambda.size(), policy.max_atom_centers, policy.seed, 0x747562655fULL);

    for (std::size_t q = 0; q < n_dir; ++q) {
        auto xi = directions.subspan(q * l, l);
        // image[a] = T_{x_a}(xi), with atom a reshaped as the l x m matrix
        for (std::size_t a = 0; a < lambda.size(); ++a) {
            const double* xm = lambda.coords.data() + a * lambda.ambient_dim;
            for (int j = 0; j < m; ++j) {
                double v = 0.0;
                for (int i = 0; i < l; ++i) v += xm[i * m + j] * xi[i];
                image[a * m + j] = v;
            }
        }
        auto probe = [&](const double* p2) {
            std::vector<double> bucket(radii.size(), 0.0);
            for (std::size_t a = 0; a < lambda.size(); ++a) {
                const double* im = image.data() + a * m;
                double dist2 = 0.0;
                for (int j = 0; j < m; ++j) {
                    const double t = im[j] - p2[j];
                    dist2 += t * t;
                }
                if (dist2 > r2[0]) continue;
                std::size_t kk = 0;
                while (kk + 1 < radii.size() && dist2 <= r2[kk + 1]) ++kk;
                bucket[kk] += lambda.weights[a];
            }
            for (std::size_t kk = 0; kk < radii.size(); ++kk) {
                double acc = 0.0;
                for (std::size_t j = kk; j < radii.size(); ++j) acc += bucket[j];
                max_mass[kk] = std::max(max_mass[kk], acc);
            }
        };
        for (std::size_t idx : center_atoms) probe(image.data() + idx * m);
        if (policy.random_centers > 0) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (double v : image) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            Rng rng(policy.seed, 0x747562655f32ULL, q);
            std::vector<double> p2(m);
            for (std::size_t t = 0; t < policy.random_centers; ++t) {
                for (int j = 0; j < m; ++j) p2[j] = rng.uniform(lo, hi);
                probe(p2.data());
            }
        }
    }

    return detail::frostman_from_masses(radii, max_mass, lambda.ambient_dim);
}

/// Deterministic direction set for slice_frostman: the +/- coordinate axes
/// plus seeded random unit vectors.
inline std::vector<double> make_directions(int l, std::size_t n_random, std::uint64_t seed) {
    std::vector<double> dirs;
    for (int i = 0; i < l; ++i)
        for (double sign : {1.0, -1.0}) {
            std::vector<double> e(l, 0.0);
            e[i] = sign;
            dirs.insert(dirs.end(), e.begin(), e.end());
        }
    Rng rng(seed, 0x646972ULL);
    for (std::size_t t = 0; t < n_random; ++t) {
        std::vector<double> v(l);
        double nn = 0.0;
        do {
            for (auto& c : v) c = rng.uniform(-1.0, 1.0);
            nn = norm(v);
        } while (nn < 1e-3 || nn > 1.0);
        for (auto& c : v) c /= nn;
        dirs.insert(dirs.end(), v.begin(), v.end());
    }
    return dirs;
}

}  // namespace gmtlab
