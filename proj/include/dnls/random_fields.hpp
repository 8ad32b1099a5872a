#pragma once

#include <cstdint>

#include "dnls/grid.hpp"

namespace dnls {

/// Seeded complex Gaussian noise on every scalar component, smoothed by
/// (1 - Laplacian)^{-1} and normalized to unit H^1 norm. Deterministic in
/// (grid, seed).
State smooth_random_state(const Grid& g, std::uint64_t seed);

/// Same construction with the noise multiplied by exp(-|x - center|^2 / width^2)
/// before smoothing, for perturbations localized near a profile.
State localized_random_state(const Grid& g, std::uint64_t seed, double width, const Vec3& center = {0, 0, 0});

}  // namespace dnls
