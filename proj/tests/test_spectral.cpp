#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gmtlab/measures.hpp"
#include "gmtlab/parallel.hpp"
#include "gmtlab/spectral.hpp"

using namespace gmtlab;

namespace {

// Closed form for the N-cell grid measure on [0,1]:
// mu-hat(t) = e^{-i pi t} sin(pi t) / (N sin(pi t / N)).
Complex grid_transform_closed_form(int N, double t) {
    const double pi = std::numbers::pi;
    if (t == 0.0) return 1.0;
    const double mag = std::sin(pi * t) / (N * std::sin(pi * t / N));
    return std::polar(mag, -pi * t);
}

// Simpson integration of fn over [a, b].
template <class Fn>
double simpson(Fn&& fn, double a, double b, int n_panels) {
    const double h = (b - a) / n_panels;
    double s = fn(a) + fn(b);
    for (int i = 1; i < n_panels; ++i) s += fn(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("transform at zero frequency is the total mass") {
    DiscreteMeasure mu = make_cantor_measure({2, 1.0 / 3.0, 6});
    std::vector<double> zero = {0.0};
    CHECK(fourier_transform(mu, zero).real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fourier_transform(mu, zero).imag() == 0.0);
}

TEST_CASE("single atom has unit modulus everywhere") {
    DiscreteMeasure pm = point_mass({0.37});
    for (double t : {0.1, 1.0, 17.5, -123.25}) {
        std::vector<double> xi = {t};
        CHECK(std::abs(fourier_transform(pm, xi)) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("grid transform matches the Dirichlet closed form") {
    DiscreteMeasure g = uniform_grid_measure(1, 64);
    for (double t : {0.5, 1.0, 7.25}) {
        std::vector<double> xi = {t};
        const Complex got = fourier_transform(g, xi);
        const Complex want = grid_transform_closed_form(64, t);
        CHECK(std::abs(got - want) <= 1e-10 * (1.0 + std::abs(want)));
    }
}

TEST_CASE("modulus bound and conjugate symmetry") {
    DiscreteMeasure mu = product_measure(make_cantor_measure({2, 1.0 / 3.0, 4}),
                                         uniform_grid_measure(1, 8));
    const double mass = mu.total_mass();
    Rng rng(5, 0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> xi = {rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
        const Complex f = fourier_transform(mu, xi);
        CHECK(std::abs(f) <= mass * (1.0 + 1e-12));
        std::vector<double> neg = {-xi[0], -xi[1]};
        const Complex fneg = fourier_transform(mu, neg);
        CHECK(std::abs(fneg - std::conj(f)) <= 1e-12);
    }
}

TEST_CASE("batched transform equals per-frequency calls") {
    DiscreteMeasure mu = make_cantor_measure({2, 1.0 / 3.0, 5});
    Rng rng(6, 0);
    std::vector<double> xis(40);
    for (auto& t : xis) t = rng.uniform(-30.0, 30.0);
    std::vector<Complex> out(40);
    fourier_transform_batch(mu, xis, out);
    for (int i = 0; i < 40; ++i) {
        std::vector<double> xi = {xis[i]};
        CHECK(std::abs(out[i] - fourier_transform(mu, xi)) == 0.0);
    }
}

TEST_CASE("cantor closed-form transform equals the atom sum") {
    CantorSpec spec{2, 1.0 / 3.0, 6};
    DiscreteMeasure mu = make_cantor_measure(spec);
    Rng rng(7, 0);
    for (int t = 0; t < 50; ++t) {
        const double freq = rng.uniform(-100.0, 100.0);
        std::vector<double> xi = {freq};
        const Complex direct = fourier_transform(mu, xi);
        const Complex closed = cantor_transform(spec, freq);
        CHECK(std::abs(direct - closed) <= 1e-10);
    }
}

TEST_CASE("product and scaled-sum evaluators match direct summation") {
    DiscreteMeasure a = make_cantor_measure({2, 1.0 / 3.0, 5});
    DiscreteMeasure b = uniform_grid_measure(1, 16);
    DiscreteMeasure ab = product_measure(a, b);
    FreqEval pe = product_evaluator(direct_evaluator(a), 1, direct_evaluator(b));
    FreqEval de = direct_evaluator(ab);
    Rng rng(9, 0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> xi = {rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0)};
        CHECK(std::abs(pe(xi) - de(xi)) <= 1e-10);
    }

    const double x = 1.37;
    DiscreteMeasure sum;
    {
        sum.ambient_dim = 1;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) {
                sum.coords.push_back(a.coords[i] + x * b.coords[j]);
                sum.weights.push_back(a.weights[i] * b.weights[j]);
            }
        sum.refresh_diameter();
    }
    FreqEval se = scaled_sum_evaluator(direct_evaluator(a), direct_evaluator(b), x);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> xi = {rng.uniform(-40.0, 40.0)};
        CHECK(std::abs(se(xi) - fourier_transform(sum, xi)) <= 1e-9);
    }
}

TEST_CASE("shell energy of a point mass is the annulus volume") {
    DiscreteMeasure pm = point_mass({0.0});
    const McEstimate e = shell_energy(pm, 0, 0.0, 1000, 42);
    CHECK(e.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.stderr_ == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.value >= 0.0);
}

TEST_CASE("grid shell energies decay like the sinc oracle") {
    DiscreteMeasure g = uniform_grid_measure(1, 4096);
    const double pi = std::numbers::pi;
    auto sinc2 = [&](double t) {
        const double s = std::sin(pi * t) / (pi * t);
        return s * s;
    };
    std::vector<std::pair<double, double>> pts;
    for (int j = 2; j <= 7; ++j) {
        const McEstimate e = shell_energy(g, j, 0.0, 4000, 1000 + j);
        const double oracle = 2.0 * simpson(sinc2, std::exp2(j), std::exp2(j + 1), 4000);
        CHECK(std::abs(e.value - oracle) <= 3.0 * e.stderr_ + 0.03 * oracle);
        pts.emplace_back(j, std::log2(e.value));
    }
    const SlopeFit fit = fit_line(pts);
    CHECK(std::abs(fit.slope + 1.0) < 0.2);
}

TEST_CASE("shell energies are additive over an annulus split") {
    DiscreteMeasure mu = make_cantor_measure({2, 1.0 / 3.0, 6});
    FreqEval eval = direct_evaluator(mu);
    const McEstimate left = annulus_energy(eval, 1, 4.0, 8.0, 0.0, 6000, 21);
    const McEstimate right = annulus_energy(eval, 1, 8.0, 16.0, 0.0, 6000, 22);
    const McEstimate whole = annulus_energy(eval, 1, 4.0, 16.0, 0.0, 12000, 23);
    const double gap = std::abs(left.value + right.value - whole.value);
    const double err = 3.0 * (left.stderr_ + right.stderr_ + whole.stderr_);
    CHECK(gap <= err);
}

TEST_CASE("frequency window is enforced") {
    DiscreteMeasure g = uniform_grid_measure(1, 64);  // window: |xi| <= 6.4
    CHECK_THROWS_AS(shell_energy(g, 4, 0.0, 100, 1), ValidationError);
    CHECK_NOTHROW(shell_energy(g, 1, 0.0, 100, 1));
}

TEST_CASE("sobolev estimate: point mass has sigma_max 0") {
    DiscreteMeasure pm = point_mass({0.25});
    const SobolevEstimate est = sobolev_dimension_estimate(pm, 0, 5, 500, 3);
    CHECK(est.fit.slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(est.sigma_max == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("sobolev estimate: Lebesgue approximant has sigma_max 2") {
    DiscreteMeasure g = uniform_grid_measure(1, 4096);
    const SobolevEstimate est = sobolev_dimension_estimate(g, 2, 7, 4000, 11);
    CHECK(std::abs(est.sigma_max - 2.0) < 0.2);
}

TEST_CASE("sobolev estimate: middle-thirds Cantor stays above 0.5") {
    DiscreteMeasure c = make_cantor_measure({2, 1.0 / 3.0, 12});
    const SobolevEstimate est = sobolev_dimension_estimate(c, 2, 8, 3000, 13);
    CHECK(est.sigma_max >= 0.5);
    CHECK(est.sigma_max <= 1.0 + 0.2);
}

TEST_CASE("lemma shell integral: constant integrand is exact") {
    DiscreteMeasure mu = point_mass({0.0, 0.0});  // transform modulus 1 everywhere
    DiscreteMeasure lambda = uniform_grid_measure(1, 8);
    const McEstimate e = lemma_shell_integral(mu, lambda, 1, 4.0, 400, 77);
    CHECK(e.value == doctest::Approx(8.0).epsilon(1e-12));  // annulus length 8 x mass 1
    CHECK(e.stderr_ <= 1e-12);
}

TEST_CASE("lemma shell integral: doubling g quadruples the value exactly") {
    DiscreteMeasure mu = product_measure(make_cantor_measure({2, 1.0 / 3.0, 4}),
                                         make_cantor_measure({2, 1.0 / 3.0, 4}));
    DiscreteMeasure lambda = uniform_grid_measure(1, 16);
    std::vector<Complex> ones(mu.size(), 1.0), twos(mu.size(), 2.0);
    const McEstimate e1 = lemma_shell_integral(mu, lambda, 1, 4.0, 500, 5, ones);
    const McEstimate e2 = lemma_shell_integral(mu, lambda, 1, 4.0, 500, 5, twos);
    CHECK(e2.value == doctest::Approx(4.0 * e1.value).epsilon(1e-14));
    CHECK(e1.value >= 0.0);
}

TEST_CASE("lemma decay report: degenerate lambda reduces to R^{n-alpha}") {
    // beta = 0 (lambda a point mass at x = 0); mu near-Lebesgue on [0,1]^2,
    // factored so each sample costs two 1-d sums instead of one 2-d sum
    DiscreteMeasure g1 = uniform_grid_measure(1, 1024);
    FreqEval eval = product_evaluator(direct_evaluator(g1), 1, direct_evaluator(g1));
    DiscreteMeasure lambda = point_mass({0.0});
    FrostmanReport alpha;
    alpha.exponent = 2.0;  // Lebesgue on the square
    FrostmanReport beta;  // point mass: exponent 0
    beta.exponent = 0.0;
    const LemmaDecayReport rep = lemma_decay_report(eval, 2, lambda, 1, 2, 5, 4000, 31,
                                                    alpha, beta, g1.resolution_hint);
    CHECK(rep.predicted_exponent == doctest::Approx(0.0));
    CHECK(rep.fit.slope <= 0.25);
    // the shell values follow the sinc tail: slope near -1, comfortably passing
    CHECK(rep.fit.slope <= -0.5);
    CHECK(rep.pass);
}

TEST_CASE("shell energies are bit-identical across worker counts") {
    DiscreteMeasure mu = make_cantor_measure({2, 1.0 / 3.0, 8});
    par::set_worker_count(1);
    const McEstimate a = shell_energy(mu, 3, 0.0, 5000, 99);
    par::set_worker_count(4);
    const McEstimate b = shell_energy(mu, 3, 0.0, 5000, 99);
    par::set_worker_count(1);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
}

}  // TEST_SUITE
