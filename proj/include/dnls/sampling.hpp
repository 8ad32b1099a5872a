#pragma once

#include <cstddef>
#include <cstdint>

#include "dnls/functionals.hpp"
#include "dnls/grid.hpp"

namespace dnls {

struct GroundStateResult;

enum class WellBranch { plus, minus };

/// t V with S(tV) < mu, with t below (plus) or above (minus) the point where
/// the ray through V meets K = 0; `u` in [0, 1) picks t inside the allowed
/// interval. For the minus branch V's u3 is negated first when N(V) >= 0, so
/// that the ray crosses K = 0.
State sublevel_on_ray(const State& V, const PhysParams& phys, const WaveParams& wave, double mu, WellBranch branch,
                      double u);

struct WellSampleReport {
  std::size_t samples = 0;
  std::size_t aplus = 0, aminus = 0;
  /// States with Aplus != Bplus or Aminus != Bminus.
  std::size_t disagreements = 0;
  /// States with S >= mu (construction failures; should stay 0).
  std::size_t outside = 0;
};
/// Random states below the ground-state level on both sides of the Nehari
/// manifold: whole-box smooth fields and small perturbations of the profile.
WellSampleReport well_equality_sample(const GroundStateResult& gs, std::size_t samples, std::uint64_t seed);

struct CoercivitySample {
  CoercivityCertificate cert;
  std::size_t samples = 0;
  std::size_t nonpositive = 0;
  /// min Lqc / ||U||_{H^1}^2 over the samples.
  double min_ratio = 0;
  /// max |Lqc - lower_bound - remainder| / Lqc.
  double max_split_error = 0;
  /// min remainder / Lqc (the completed squares are nonnegative).
  double min_remainder = 0;
};
/// Lqc on seeded random states, half of them modulated by carriers near the
/// minimizing wavevector c / (2 kappa_j) of each component.
CoercivitySample coercivity_sample(const Grid& g, const PhysParams& phys, const WaveParams& wave, std::size_t samples,
                                   std::uint64_t seed);

}  // namespace dnls
