#ifndef TGMRF_RNG_HPP
#define TGMRF_RNG_HPP

#include <cstdint>
#include <cmath>
#include <numbers>

namespace tgmrf {

/// Counter-based 64-bit generator (splitmix64 finalizer over a Weyl
/// sequence). Output at position i depends only on (seed, i), so streams
/// are reproducible bit-for-bit regardless of how they are consumed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return at(counter_++); }

    /// Uniform on the open interval (0,1); never returns 0 or 1, so it is
    /// safe to feed into log().
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    std::uint64_t position() const { return counter_; }

private:
    std::uint64_t at(std::uint64_t i) const {
        std::uint64_t z = seed_ + (i + 1) * 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

/// Standard-normal stream: Box-Muller over CounterRng uniforms. Draws are
/// produced in pairs; the second value is cached so consumers see a plain
/// sequential stream.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = rng_.next_uniform();
        const double u2 = rng_.next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(phi);
        has_cached_ = true;
        return r * std::cos(phi);
    }

private:
    CounterRng rng_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

} // namespace tgmrf

#endif
