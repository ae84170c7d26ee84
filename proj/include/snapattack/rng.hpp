#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace snapattack {

// Seedable 64-bit generator. Every randomized operation takes one explicitly;
// the helpers below avoid std:: distributions so streams are identical across
// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    std::uint8_t next_byte() { return static_cast<std::uint8_t>(engine_() >> 56); }

    bool next_bit() { return (engine_() >> 63) != 0; }

    // Uniform in [0, bound), rejection sampling, bound > 0.
    std::uint64_t uniform(std::uint64_t bound)
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = unit();
        } while (u1 <= 0.0);
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    // Derives an independent child stream, e.g. one per bench trial.
    Rng fork(std::uint64_t salt) const
    {
        std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (salt + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace snapattack
