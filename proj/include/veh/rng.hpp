#pragma once

#include <cstdint>
#include <random>

namespace veh {

/// Recorded in output metadata so runs can be reproduced elsewhere.
inline constexpr const char* kGeneratorName = "mt19937_64+marsaglia_polar";

/**
 * @brief Seeded standard-normal source.
 *
 * std::mt19937_64 (fully specified by the C++ standard, period 2^19937 - 1)
 * feeds 53-bit uniforms into the Marsaglia polar transform. The transform
 * only uses sqrt and log, so draws are identical across conforming
 * platforms; std::normal_distribution is avoided because its algorithm is
 * implementation defined.
 */
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double uniform();  ///< uniform on [0, 1) with 53 random bits
    double normal();   ///< standard normal

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for the index-th member of an ensemble: splitmix64(base + (index + 1) * golden gamma).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

} // namespace veh
