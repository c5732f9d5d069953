#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace angiokit::detail {

// Distribution helpers with a fixed bit recipe, so seeded output does not
// depend on the standard library's distribution implementations.
inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_double(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(rng() % span);
}

inline double standard_normal(std::mt19937_64& rng) {
    double u1 = unit_double(rng);
    while (u1 <= 0.0) u1 = unit_double(rng);
    const double u2 = unit_double(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace angiokit::detail
