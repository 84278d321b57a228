#include "veh/rng.hpp"

#include <cmath>

namespace veh {

double GaussianRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianRng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * factor;
    has_cached_ = true;
    return u * factor;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return splitmix64(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

} // namespace veh
