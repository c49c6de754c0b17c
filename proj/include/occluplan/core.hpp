#pragma once

// Shared primitives: integer cells, angle wrapping, deterministic RNG
// helpers and the error types thrown across the library.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace occluplan {

inline constexpr double kPi = 3.14159265358979323846;

// Raster cell. x is the column, y the row; y grows downward.
struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell& a, const Cell& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(const Cell& a, const Cell& b) { return !(a == b); }
};

inline double cell_distance(const Cell& a, const Cell& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

/// Smallest absolute difference between two headings, in [0, pi].
inline double angle_difference(double a, double b) {
    double d = std::fabs(wrap_angle(a - b));
    return d > kPi ? 2.0 * kPi - d : d;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

// ---- deterministic RNG ----
// splitmix64-seeded xoshiro-style generator. std::mt19937_64 would do, but
// the distributions on top of it are not pinned by the standard; these
// helpers keep every sampled value identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next() % span);
    }

    /// Uniform real in [a, b).
    double uniform_real(double a, double b) {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return a + u * (b - a);
    }

    bool chance(double p) { return uniform_real(0.0, 1.0) < p; }

private:
    std::uint64_t state_;
};

// ---- errors ----

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct UndeclaredClassError : FormatError {
    using FormatError::FormatError;
};
struct EmptyGridError : Error {
    using Error::Error;
};
struct DimensionMismatchError : Error {
    using Error::Error;
};
struct InvalidArgumentError : Error {
    using Error::Error;
};
struct NoPathError : Error {
    using Error::Error;
};

}  // namespace occluplan
