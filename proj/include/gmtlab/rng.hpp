#pragma once

#include <cstdint>
#include <span>

namespace gmtlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// xoshiro256** with a splitmix-expanded seed. Self-contained so that streams
/// are reproducible across standard libraries and platforms.
class Rng {
public:
    /// Independent stream identified by (seed, tag, stream).
    Rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t stream = 0) {
        std::uint64_t x = splitmix64(seed ^ splitmix64(tag ^ splitmix64(stream)));
        for (auto& si : s_) {
            x = splitmix64(x);
            si = x;
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
    }

    /// Uniform point in a box, written into out.
    void box_point(std::span<const double> lo, std::span<const double> hi,
                   std::span<double> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = uniform(lo[i], hi[i]);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace gmtlab
