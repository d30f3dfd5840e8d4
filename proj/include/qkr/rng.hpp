#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace qkr {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Mixes a master seed with a sequence of salts (stream purpose, realization
/// index, ...) into an independent stream seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> salts) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t v : salts) s = splitmix64(s ^ v);
    return s;
}

/// Seeded random stream with bit-stable draws.
///
/// Doubles are produced directly from engine output (53-bit mantissa trick)
/// so sequences do not depend on the standard library's distribution
/// implementations; identical seeds give identical sequences everywhere.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, 2*pi).
    double angle() { return 2.0 * std::numbers::pi * uniform01(); }

    /// Uniform in [-1/2, 1/2).
    double symmetric_unit() { return uniform01() - 0.5; }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const auto wide = static_cast<unsigned __int128>(eng_()) * span;
        return lo + static_cast<int>(wide >> 64);
    }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

/// Stream purposes used when deriving per-realization seeds from a master
/// seed. Keeping them distinct guarantees e.g. disorder phases do not change
/// when imperfection strengths change.
enum class StreamPurpose : std::uint64_t {
    Disorder = 1,
    Profile = 2,
    Measurement = 3,
};

inline RngStream make_stream(std::uint64_t master, StreamPurpose purpose, std::uint64_t realization) {
    return RngStream(derive_seed(master, {static_cast<std::uint64_t>(purpose), realization}));
}

} // namespace qkr
