#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmtlab {

/// Input failed a precondition or invariant check.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A construction would exceed the configured atom budget.
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// Default cap on atom counts for measure constructors.
inline constexpr std::size_t kDefaultAtomBudget = std::size_t(1) << 24;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

/// Sum with a fixed tree order: bit-identical regardless of how callers
/// partition work, and rounding error O(log n) instead of O(n).
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Volume of the unit ball in dimension m.
inline double unit_ball_volume(int m) {
    return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

}  // namespace gmtlab
