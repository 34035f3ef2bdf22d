#include <doctest.h>

#include <cmath>
#include <vector>

#include "gmtlab/kplane.hpp"
#include "gmtlab/rng.hpp"

using namespace gmtlab;

namespace {

GridField constant_field(int d, std::vector<int> shape, std::vector<double> lo,
                         std::vector<double> hi, double c) {
    return sample_field(d, shape, lo, hi, [c](std::span<const double>) { return c; });
}

// Mixed norm computed the slow way: explicit index arithmetic, transposed loop
// order relative to the library implementation.
double mixed_norm_oracle(const GridField& f, int k, double r) {
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
    std::vector<double> inner_sums(n_outer, 0.0);
    for (std::size_t i = 0; i < n_inner; ++i)
        for (std::size_t o = 0; o < n_outer; ++o)
            inner_sums[o] += std::pow(std::abs(f.values[o * n_inner + i]), r) * vol_inner;
    double acc = 0.0;
    for (std::size_t o = 0; o < n_outer; ++o)
        acc += vol_outer * std::pow(inner_sums[o], 2.0 / r);
    return std::sqrt(acc);
}

}  // namespace

TEST_SUITE("kplane") {

TEST_CASE("compute_q closed form and monotonicity") {
    const TransformBoundConfig cfg = compute_q(2, 1, 1.5, 0.25);
    CHECK(cfg.q == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(cfg.q_conj == doctest::Approx(8.0 / 5.0).epsilon(1e-12));
    CHECK(1.0 / cfg.q + 1.0 / cfg.q_conj == doctest::Approx(1.0).epsilon(1e-14));

    // q grows with alpha and shrinks with eps
    CHECK(compute_q(2, 1, 1.7, 0.25).q > cfg.q);
    CHECK(compute_q(2, 1, 1.5, 0.3).q < cfg.q);

    // a second exponent pattern: d=3, k=1 has (k+1)(d-k) = 4
    const TransformBoundConfig c31 = compute_q(3, 1, 3.5, 0.25);
    CHECK(c31.q == doctest::Approx(1.0 / (0.5 - 0.25 / 4.0)).epsilon(1e-12));
}

TEST_CASE("compute_q rejects out-of-range exponents") {
    CHECK_THROWS_AS(compute_q(2, 1, 1.0, 0.1), ValidationError);   // alpha at lower edge
    CHECK_THROWS_AS(compute_q(2, 1, 2.0, 0.1), ValidationError);   // alpha at upper edge
    CHECK_THROWS_AS(compute_q(2, 1, 1.5, 0.0), ValidationError);   // eps not positive
    CHECK_THROWS_AS(compute_q(2, 1, 1.5, 0.5), ValidationError);   // eps at the cap
    CHECK_THROWS_AS(compute_q(3, 1, 3.5, 0.5), ValidationError);   // cap is alpha-m+k
    CHECK_THROWS_AS(compute_q(1, 1, 0.5, 0.1), ValidationError);   // k < d violated
}

TEST_CASE("interpolation reproduces affine data away from the boundary") {
    GridField f = sample_field(1, std::vector<int>{64}, std::vector<double>{0.0},
                               std::vector<double>{1.0},
                               [](std::span<const double> p) { return 2.0 * p[0] + 1.0; });
    Rng rng(3, 0);
    for (int t = 0; t < 200; ++t) {
        const double x = rng.uniform(0.1, 0.9);
        std::vector<double> p = {x};
        CHECK(f.interpolate(p) == doctest::Approx(2.0 * x + 1.0).epsilon(1e-12));
    }
}

TEST_CASE("transform of the constant field is exact") {
    GridField one = constant_field(2, {16, 16}, {0.0, -2.0}, {1.0, 3.0}, 1.0);
    PlaneParam y{2, 1, {0.5, 1.5}};  // v = 0.5 + 1.5 x stays inside [-2, 3]
    CHECK(transform(one, y, 64) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("transform of a function of x alone is its average") {
    // f(x, v) = x^2: the plane graph is irrelevant, Tf -> 1/3
    GridField f = sample_field(2, std::vector<int>{512, 8}, std::vector<double>{0.0, -1.0},
                               std::vector<double>{1.0, 2.0},
                               [](std::span<const double> p) { return p[0] * p[0]; });
    PlaneParam y{2, 1, {0.25, 0.5}};
    CHECK(transform(f, y, 256) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("transform is linear in the field") {
    Rng rng(5, 0);
    GridField a = sample_field(2, std::vector<int>{32, 32}, std::vector<double>{0.0, -2.0},
                               std::vector<double>{1.0, 3.0},
                               [&](std::span<const double>) { return rng.uniform(-1.0, 1.0); });
    GridField b = sample_field(2, std::vector<int>{32, 32}, std::vector<double>{0.0, -2.0},
                               std::vector<double>{1.0, 3.0},
                               [&](std::span<const double>) { return rng.uniform(-1.0, 1.0); });
    GridField combo = a;
    for (std::size_t i = 0; i < combo.values.size(); ++i)
        combo.values[i] = 2.0 * a.values[i] - 0.5 * b.values[i];
    PlaneParam y{2, 1, {0.1, 0.7}};
    const double lhs = transform(combo, y, 64);
    const double rhs = 2.0 * transform(a, y, 64) - 0.5 * transform(b, y, 64);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("transform rejects planes escaping the field box") {
    GridField tight = constant_field(2, {8, 8}, {0.0, 0.0}, {1.0, 1.0}, 1.0);
    PlaneParam escapes{2, 1, {0.5, 2.0}};  // reaches v = 2.5
    CHECK_THROWS_AS(transform(tight, escapes, 16), ValidationError);
}

TEST_CASE("mixed norm with r = 2 is the plain L2 norm") {
    Rng rng(7, 0);
    GridField f = sample_field(2, std::vector<int>{16, 24}, std::vector<double>{0.0, -1.0},
                               std::vector<double>{1.0, 1.0},
                               [&](std::span<const double>) { return rng.uniform(-3.0, 3.0); });
    double l2 = 0.0;
    for (double v : f.values) l2 += v * v * f.cell_volume();
    CHECK(mixed_norm(f, 1, 2.0) == doctest::Approx(std::sqrt(l2)).epsilon(1e-12));
}

TEST_CASE("mixed norm of a constant has a closed form") {
    const double c = 1.7;
    GridField f = constant_field(2, {10, 10}, {0.0, -2.0}, {1.0, 3.0}, c);
    for (double r : {1.0, 1.6, 2.0, 4.0}) {
        const double expect = c * std::pow(5.0, 1.0 / r) * std::sqrt(1.0);
        CHECK(mixed_norm(f, 1, r) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("mixed norm matches a transposed-loop oracle") {
    Rng rng(11, 0);
    GridField f = sample_field(3, std::vector<int>{6, 8, 10},
                               std::vector<double>{0.0, 0.0, -1.0},
                               std::vector<double>{1.0, 1.0, 2.0},
                               [&](std::span<const double>) { return rng.uniform(-2.0, 2.0); });
    for (double r : {1.0, 1.6, 2.0, 8.0 / 5.0}) {
        CHECK(mixed_norm(f, 2, r) == doctest::Approx(mixed_norm_oracle(f, 2, r)).epsilon(1e-11));
    }
}

TEST_CASE("bump profile integrates to one") {
    for (double h : {0.1, 0.5, 1.0}) {
        const int n = 20000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = -h + (i + 0.5) * (2.0 * h / n);
            std::vector<double> uu = {u};
            acc += bump_profile(uu, h) * (2.0 * h / n);
        }
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("adjoint of a single plane is the scaled bump") {
    PlaneSet S;
    S.d = 2;
    S.k = 1;
    S.measure = point_mass({0.25, 0.5});  // v = 0.25 + 0.5 x
    std::vector<double> g = {3.0};
    std::vector<double> x = {0.5};
    const double section = 0.25 + 0.5 * 0.5;
    for (double offset : {0.0, 0.05, -0.08}) {
        std::vector<double> xp = {section + offset};
        std::vector<double> diff = {offset};
        const double expect = 3.0 * bump_profile(diff, 0.1);
        CHECK(adjoint_apply(g, S, x, xp, 0.1) == doctest::Approx(expect).epsilon(1e-13));
    }
    std::vector<double> far = {section + 0.5};
    CHECK(adjoint_apply(g, S, x, far, 0.1) == 0.0);
    std::vector<double> zero = {0.0};
    CHECK(adjoint_apply(zero, S, x, far, 0.1) == 0.0);
}

TEST_CASE("transform l2 norm matches a sequential loop") {
    PlaneSet S;
    S.d = 2;
    S.k = 1;
    S.measure = uniform_grid_measure(2, 6);  // 36 planes in [0,1]^2
    Rng rng(13, 0);
    GridField f = sample_field(2, std::vector<int>{32, 48}, std::vector<double>{0.0, -0.5},
                               std::vector<double>{1.0, 2.5},
                               [&](std::span<const double>) { return rng.uniform(0.0, 1.0); });
    double acc = 0.0;
    for (std::size_t a = 0; a < S.measure.size(); ++a) {
        const double tf = transform(f, S.plane(a), 32);
        acc += S.measure.weights[a] * tf * tf;
    }
    CHECK(transform_l2_norm(f, S, 32) == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
}

TEST_CASE("constant test function gives the closed-form ratio") {
    PlaneSet S;
    S.d = 2;
    S.k = 1;
    S.measure = uniform_grid_measure(2, 12);
    GridField one = constant_field(2, {64, 64}, {0.0, -0.5}, {1.0, 2.5}, 1.0);
    const TransformBoundConfig cfg = compute_q(2, 1, 1.5, 0.25);
    const double tnorm = transform_l2_norm(one, S, 64);
    CHECK(tnorm == doctest::Approx(std::sqrt(S.measure.total_mass())).epsilon(1e-12));
    const double mnorm = mixed_norm(one, 1, cfg.q_conj);
    CHECK(mnorm == doctest::Approx(std::pow(3.0, 1.0 / cfg.q_conj)).epsilon(1e-12));
    CHECK(tnorm / mnorm == doctest::Approx(std::pow(3.0, -5.0 / 8.0)).epsilon(1e-10));
}

TEST_CASE("the norm ratio is invariant under field scaling") {
    PlaneSet S;
    S.d = 2;
    S.k = 1;
    S.measure = uniform_grid_measure(2, 8);
    Rng rng(17, 0);
    GridField f = sample_field(2, std::vector<int>{48, 48}, std::vector<double>{0.0, -0.5},
                               std::vector<double>{1.0, 2.5}, [&](std::span<const double> p) {
                                   return 0.2 + p[0] + 0.3 * std::sin(3.0 * p[1]);
                               });
    GridField scaled = f;
    for (double& v : scaled.values) v *= 3.7;
    const double r = 8.0 / 5.0;
    const double ratio_f = transform_l2_norm(f, S, 48) / mixed_norm(f, 1, r);
    const double ratio_s = transform_l2_norm(scaled, S, 48) / mixed_norm(scaled, 1, r);
    CHECK(ratio_f == doctest::Approx(ratio_s).epsilon(1e-12));
}

TEST_CASE("bound ratio experiment reports stable ratios for smooth fields") {
    PlaneSet S;
    S.d = 2;
    S.k = 1;
    S.measure = uniform_grid_measure(2, 12);
    FrostmanReport alpha;
    alpha.exponent = 1.5;
    Rng rng(19, 0);
    std::vector<GridField> family;
    for (int fi = 0; fi < 3; ++fi) {
        const double cx = rng.uniform(0.2, 0.8), cv = rng.uniform(0.3, 1.7);
        family.push_back(sample_field(
            2, std::vector<int>{128, 128}, std::vector<double>{0.0, -0.5},
            std::vector<double>{1.0, 2.5}, [cx, cv](std::span<const double> p) {
                const double dx = p[0] - cx, dv = p[1] - cv;
                return std::exp(-8.0 * (dx * dx + dv * dv));
            }));
    }
    std::vector<int> resolutions = {32, 48, 64};
    const BoundRatioReport rep =
        bound_ratio_experiment(S, alpha, 0.25, family, resolutions, 64);
    CHECK(rep.config.q == doctest::Approx(8.0 / 3.0));
    CHECK(rep.trials.size() == family.size() * resolutions.size());
    CHECK(rep.resolution_sweep.size() == resolutions.size());
    for (const auto& t : rep.trials) CHECK(t.ratio > 0.0);
    CHECK(rep.fit.slope <= rep.slope_threshold);
    CHECK(rep.pass);
}

}  // TEST_SUITE
