#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "gmtlab/common.hpp"
#include "gmtlab/measures.hpp"
#include "gmtlab/parallel.hpp"
#include "gmtlab/rng.hpp"
#include "gmtlab/slope_fit.hpp"

namespace gmtlab {

using Complex = std::complex<double>;

/// Evaluates the Fourier transform of a (complex-weighted) measure at one
/// frequency. Algebraic factorizations (products, scaled sums) plug in here
/// without changing any of the integrators.
using FreqEval = std::function<Complex(std::span<const double>)>;

/// Direct summation: sum_j g_j w_j exp(-2 pi i <xi, p_j>).
inline Complex fourier_transform(const DiscreteMeasure& mu, std::span<const double> xi,
                                 std::span<const Complex> g = {}) {
    require(xi.size() == static_cast<std::size_t>(mu.ambient_dim),
            "fourier_transform: frequency length != ambient_dim");
    require(g.empty() || g.size() == mu.size(),
            "fourier_transform: per-atom weight length mismatch");
    const int d = mu.ambient_dim;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        const double* p = mu.coords.data() + j * d;
        double phase = 0.0;
        for (int a = 0; a < d; ++a) phase += xi[a] * p[a];
        phase *= -two_pi;
        const double c = std::cos(phase), s = std::sin(phase);
        if (g.empty()) {
            re += mu.weights[j] * c;
            im += mu.weights[j] * s;
        } else {
            const Complex v = g[j] * mu.weights[j] * Complex(c, s);
            re += v.real();
            im += v.imag();
        }
    }
    return {re, im};
}

/// Batched transform over many frequencies (flattened row-major), parallel
/// over frequencies with deterministic output.
inline void fourier_transform_batch(const DiscreteMeasure& mu, std::span<const double> xis,
                                    std::span<Complex> out, std::span<const Complex> g = {}) {
    const std::size_t d = static_cast<std::size_t>(mu.ambient_dim);
    require(xis.size() == out.size() * d, "fourier_transform_batch: shape mismatch");
    par::for_chunks(out.size(), par::kDefaultChunks,
                    [&](std::size_t, std::size_t b, std::size_t e) {
                        for (std::size_t i = b; i < e; ++i)
                            out[i] = fourier_transform(mu, xis.subspan(i * d, d), g);
                    });
}

inline FreqEval direct_evaluator(const DiscreteMeasure& mu, std::vector<Complex> g = {}) {
    return [&mu, g = std::move(g)](std::span<const double> xi) {
        return fourier_transform(mu, xi, g);
    };
}

/// Transform of a product measure: A-hat on the first dim_a coordinates times
/// B-hat on the rest. Exact algebra, not an approximation.
inline FreqEval product_evaluator(FreqEval a, int dim_a, FreqEval b) {
    return [a = std::move(a), b = std::move(b), dim_a](std::span<const double> xi) {
        return a(xi.first(dim_a)) * b(xi.subspan(dim_a));
    };
}

/// Transform of the pushforward of A x B under (p, q) -> p + x q:
/// F(xi) = A-hat(xi) * B-hat(x xi).
inline FreqEval scaled_sum_evaluator(FreqEval a, FreqEval b, double x) {
    return [a = std::move(a), b = std::move(b), x](std::span<const double> xi) {
        std::vector<double> sx(xi.size());
        for (std::size_t i = 0; i < xi.size(); ++i) sx[i] = x * xi[i];
        return a(xi) * b(sx);
    };
}

/// Closed form for the depth-level Cantor measure with left-endpoint atoms:
/// product over levels of the branch-average exponential. Exactly equal to the
/// direct atom sum.
inline Complex cantor_transform(const CantorSpec& spec, double t) {
    spec.validate();
    const std::vector<double> offsets = spec.resolved_offsets();
    constexpr double two_pi = 2.0 * std::numbers::pi;
    Complex prod = 1.0;
    double scale = 1.0;
    for (int level = 0; level < spec.depth; ++level) {
        Complex avg = 0.0;
        for (double o : offsets) {
            const double phase = -two_pi * t * o * scale;
            avg += Complex(std::cos(phase), std::sin(phase));
        }
        prod *= avg / static_cast<double>(spec.branches);
        scale *= spec.ratio;
    }
    return prod;
}

// ---------------------------------------------------------------------------
// Annulus Monte Carlo

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

namespace detail {

/// Shells are only trusted well below the reciprocal atomic resolution;
/// beyond it the discrete transform is quasi-periodic.
inline void check_frequency_window(double resolution_hint, double r_hi) {
    if (resolution_hint > 0.0)
        require(r_hi <= 0.1 / resolution_hint,
                "frequency shell exceeds the measure's valid window (0.1/resolution)");
}

/// Uniform sample in the annulus {r_lo <= |xi| <= r_hi} of R^l by rejection
/// from the bounding box of the outer ball.
inline void annulus_point(Rng& rng, int l, double r_lo, double r_hi, std::span<double> out) {
    const double lo2 = r_lo * r_lo, hi2 = r_hi * r_hi;
    for (;;) {
        double n2 = 0.0;
        for (int a = 0; a < l; ++a) {
            out[a] = rng.uniform(-r_hi, r_hi);
            n2 += out[a] * out[a];
        }
        if (n2 >= lo2 && n2 <= hi2) return;
    }
}

inline double annulus_volume(int l, double r_lo, double r_hi) {
    return unit_ball_volume(l) * (std::pow(r_hi, l) - std::pow(r_lo, l));
}

/// Chunked deterministic MC mean of `integrand` scaled by `volume`.
template <class Integrand>
McEstimate monte_carlo(std::size_t n_samples, double volume, std::uint64_t seed,
                       std::uint64_t tag, Integrand&& integrand) {
    require(n_samples >= 2, "monte carlo: need at least 2 samples");
    const std::size_t n_chunks = std::min<std::size_t>(par::kDefaultChunks, n_samples);
    std::vector<double> sums(n_chunks, 0.0), sqs(n_chunks, 0.0);
    par::for_chunks(n_samples, n_chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
        Rng rng(seed, tag, c);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            const double v = integrand(rng);
            s += v;
            s2 += v * v;
        }
        sums[c] = s;
        sqs[c] = s2;
    });
    const double sum = pairwise_sum(sums);
    const double sq = pairwise_sum(sqs);
    const double n = static_cast<double>(n_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
    return {volume * mean, volume * std::sqrt(var / n)};
}

}  // namespace detail

/// MC estimate of the annulus integral of |F(xi)|^2 / (1+|xi|)^sigma.
/// sigma is the full weight exponent: 0 gives the raw energy, and the
/// Sobolev-dimension integrand for target dimension s uses sigma = l - s.
inline McEstimate annulus_energy(const FreqEval& eval, int l, double r_lo, double r_hi,
                                 double sigma, std::size_t n_samples, std::uint64_t seed,
                                 double resolution_hint = 0.0) {
    require(l >= 1 && l <= 8, "annulus_energy: frequency dimension out of range");
    require(r_lo >= 0.0 && r_hi > r_lo, "annulus_energy: bad annulus");
    detail::check_frequency_window(resolution_hint, r_hi);
    const double vol = detail::annulus_volume(l, r_lo, r_hi);
    return detail::monte_carlo(
        n_samples, vol, seed, 0x7368656c6cULL ^ static_cast<std::uint64_t>(r_lo * 1e6),
        [&, l, r_lo, r_hi, sigma](Rng& rng) {
            double xi[8];
            detail::annulus_point(rng, l, r_lo, r_hi, {xi, static_cast<std::size_t>(l)});
            const Complex f = eval({xi, static_cast<std::size_t>(l)});
            const double mag2 = std::norm(f);
            if (sigma == 0.0) return mag2;
            const double w =
                std::pow(1.0 + norm({xi, static_cast<std::size_t>(l)}), sigma);
            return mag2 / w;
        });
}

/// Dyadic shell {2^j <= |xi| <= 2^{j+1}}.
inline McEstimate shell_energy(const FreqEval& eval, int l, int j, double sigma,
                               std::size_t n_samples, std::uint64_t seed,
                               double resolution_hint = 0.0) {
    return annulus_energy(eval, l, std::exp2(j), std::exp2(j + 1), sigma, n_samples, seed,
                          resolution_hint);
}

inline McEstimate shell_energy(const DiscreteMeasure& mu, int j, double sigma,
                               std::size_t n_samples, std::uint64_t seed) {
    mu.validate();
    return shell_energy(direct_evaluator(mu), mu.ambient_dim, j, sigma, n_samples, seed,
                        mu.resolution_hint);
}

// ---------------------------------------------------------------------------
// Sobolev dimension

struct ShellEnergyProfile {
    struct Shell {
        int j = 0;
        double energy = 0.0;
        double mc_stderr = 0.0;
    };
    std::vector<Shell> shells;
    double sigma = 0.0;
    int l = 0;
    std::size_t samples_per_shell = 0;
    std::uint64_t seed = 0;
};

inline ShellEnergyProfile shell_energy_profile(const FreqEval& eval, int l, int j_lo, int j_hi,
                                               double sigma, std::size_t n_samples,
                                               std::uint64_t seed, double resolution_hint = 0.0) {
    require(j_hi >= j_lo, "shell profile: empty j range");
    ShellEnergyProfile profile;
    profile.sigma = sigma;
    profile.l = l;
    profile.samples_per_shell = n_samples;
    profile.seed = seed;
    for (int j = j_lo; j <= j_hi; ++j) {
        const McEstimate e = shell_energy(eval, l, j, sigma, n_samples,
                                          seed + static_cast<std::uint64_t>(j - j_lo + 1),
                                          resolution_hint);
        profile.shells.push_back({j, e.value, e.stderr_});
    }
    return profile;
}

/// sigma_max = l - s where s is the fitted slope of log2(shell energy at
/// sigma = 0) against j: E_j ~ 2^{s j} makes sum_j 2^{j(sigma - l)} E_j
/// converge exactly when sigma < l - s.
struct SobolevEstimate {
    double sigma_max = 0.0;
    ShellEnergyProfile profile;
    SlopeFit fit;
    bool low_confidence = false;
    double residual_threshold = 0.5;
};

inline SobolevEstimate sobolev_from_profile(const ShellEnergyProfile& profile,
                                            double residual_threshold = 0.5) {
    require(profile.shells.size() >= 4, "sobolev estimate: need at least 4 shells");
    std::vector<std::pair<double, double>> pts;
    for (const auto& sh : profile.shells) {
        require(sh.energy > 0.0, "sobolev estimate: zero shell energy");
        pts.emplace_back(static_cast<double>(sh.j), std::log2(sh.energy));
    }
    SobolevEstimate est;
    est.profile = profile;
    est.fit = fit_line(pts);
    est.sigma_max = profile.l - est.fit.slope;
    est.residual_threshold = residual_threshold;
    est.low_confidence = est.fit.residual > residual_threshold;
    return est;
}

inline SobolevEstimate sobolev_dimension_estimate(const FreqEval& eval, int l, int j_lo,
                                                  int j_hi, std::size_t n_samples,
                                                  std::uint64_t seed,
                                                  double resolution_hint = 0.0) {
    return sobolev_from_profile(
        shell_energy_profile(eval, l, j_lo, j_hi, 0.0, n_samples, seed, resolution_hint));
}

inline SobolevEstimate sobolev_dimension_estimate(const DiscreteMeasure& mu, int j_lo, int j_hi,
                                                  std::size_t n_samples, std::uint64_t seed) {
    mu.validate();
    return sobolev_dimension_estimate(direct_evaluator(mu), mu.ambient_dim, j_lo, j_hi,
                                      n_samples, seed, mu.resolution_hint);
}

// ---------------------------------------------------------------------------
// Decay verifier for the projected-energy bound

/// MC estimate of the double integral over {R <= |xi| <= 2R} x lambda of
/// |F(xi, T_x xi)|^2, where x runs over lambda's atoms reshaped as l x (n-l)
/// matrices. `eval` is the transform of g d(mu) on R^n.
inline McEstimate lemma_shell_integral(const FreqEval& eval, int n, const DiscreteMeasure& lambda,
                                       int l, double R, std::size_t n_samples,
                                       std::uint64_t seed, double resolution_hint = 0.0) {
    lambda.validate();
    require(l >= 1 && l < n, "lemma_shell_integral: need 1 <= l < n");
    require(n <= 16, "lemma_shell_integral: total frequency dimension out of range");
    const int m = n - l;
    require(lambda.ambient_dim == l * m,
            "lemma_shell_integral: lambda dimension must be l(n-l)");
    require(R > 0.0, "lemma_shell_integral: R must be positive");
    detail::check_frequency_window(resolution_hint, 2.0 * R);

    const double lambda_mass = lambda.total_mass();
    std::vector<double> cumulative(lambda.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        acc += lambda.weights[i] / lambda_mass;
        cumulative[i] = acc;
    }
    cumulative.back() = 1.0;

    const double vol = detail::annulus_volume(l, R, 2.0 * R) * lambda_mass;
    return detail::monte_carlo(
        n_samples, vol, seed, 0x6c656d6d61ULL, [&, l, m, R](Rng& rng) {
            double freq[16];
            detail::annulus_point(rng, l, R, 2.0 * R, {freq, static_cast<std::size_t>(l)});
            const double u = rng.uniform01();
            const std::size_t a = static_cast<std::size_t>(
                std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            const double* xm = lambda.coords.data() + a * lambda.ambient_dim;
            for (int j = 0; j < m; ++j) {
                double v = 0.0;
                for (int i = 0; i < l; ++i) v += xm[i * m + j] * freq[i];
                freq[l + j] = v;
            }
            return std::norm(eval({freq, static_cast<std::size_t>(l + m)}));
        });
}

inline McEstimate lemma_shell_integral(const DiscreteMeasure& mu, const DiscreteMeasure& lambda,
                                       int l, double R, std::size_t n_samples,
                                       std::uint64_t seed, std::vector<Complex> g = {}) {
    mu.validate();
    return lemma_shell_integral(direct_evaluator(mu, std::move(g)), mu.ambient_dim, lambda, l,
                                R, n_samples, seed, mu.resolution_hint);
}

struct LemmaDecayReport {
    int n = 0;
    int l = 0;
    double alpha = 0.0;
    double beta = 0.0;
    struct Shell {
        int j = 0;
        double R = 0.0;
        double value = 0.0;
        double mc_stderr = 0.0;
    };
    std::vector<Shell> shells;
    SlopeFit fit;
    double predicted_exponent = 0.0;
    double tolerance = 0.25;
    double residual_threshold = 0.5;
    bool pass = false;
    std::size_t samples_per_shell = 0;
    std::uint64_t seed = 0;
};

/// Runs the shell integral across a dyadic range R = 2^j and checks the fitted
/// slope against the predicted exponent n - alpha - beta.
inline LemmaDecayReport lemma_decay_report(const FreqEval& eval, int n,
                                           const DiscreteMeasure& lambda, int l, int j_lo,
                                           int j_hi, std::size_t n_samples, std::uint64_t seed,
                                           const FrostmanReport& alpha_report,
                                           const FrostmanReport& beta_report,
                                           double resolution_hint = 0.0, double tolerance = 0.25,
                                           double residual_threshold = 0.5) {
    require(j_hi - j_lo + 1 >= 3, "lemma_decay_report: need at least 3 shells");
    LemmaDecayReport report;
    report.n = n;
    report.l = l;
    report.alpha = alpha_report.exponent;
    report.beta = beta_report.exponent;
    report.predicted_exponent = n - report.alpha - report.beta;
    report.tolerance = tolerance;
    report.residual_threshold = residual_threshold;
    report.samples_per_shell = n_samples;
    report.seed = seed;
    std::vector<std::pair<double, double>> pts;
    for (int j = j_lo; j <= j_hi; ++j) {
        const double R = std::exp2(j);
        const McEstimate e = lemma_shell_integral(
            eval, n, lambda, l, R, n_samples, seed + static_cast<std::uint64_t>(j - j_lo + 1),
            resolution_hint);
        report.shells.push_back({j, R, e.value, e.stderr_});
        require(e.value > 0.0, "lemma_decay_report: zero shell value");
        pts.emplace_back(static_cast<double>(j), std::log2(e.value));
    }
    report.fit = fit_line(pts);
    report.pass = report.fit.slope <= report.predicted_exponent + tolerance &&
                  report.fit.residual < residual_threshold;
    return report;
}

inline LemmaDecayReport lemma_decay_report(const DiscreteMeasure& mu,
                                           const DiscreteMeasure& lambda, int l, int j_lo,
                                           int j_hi, std::size_t n_samples, std::uint64_t seed,
                                           const FrostmanReport& alpha_report,
                                           const FrostmanReport& beta_report,
                                           std::vector<Complex> g = {}) {
    mu.validate();
    return lemma_decay_report(direct_evaluator(mu, std::move(g)), mu.ambient_dim, lambda, l,
                              j_lo, j_hi, n_samples, seed, alpha_report, beta_report,
                              mu.resolution_hint);
}

}  // namespace gmtlab
