#include "dnls/random_fields.hpp"

#include <cmath>
#include <random>

#include "dnls/spectral.hpp"

namespace dnls {

namespace {

State noise_state(const Grid& g, std::uint64_t seed, double width, const Vec3& center) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto& xi2 = spectral_tables(g).xi2;
  State U(g);
  ScalarField hat(g);
  U.for_each_component([&](int, int, ScalarField& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      double env = 1.0;
      if (width > 0.0) {
        const auto idx = g.unflatten(i);
        double r2 = 0.0;
        for (int k = 0; k < g.dim(); ++k) {
          const double x = g.coordinate(k, idx[k]) - center[k];
          r2 += x * x;
        }
        env = std::exp(-r2 / (width * width));
      }
      const double re = normal(rng);
      const double im = normal(rng);
      f[i] = env * cplx(re, im);
    }
    fft_forward(g, f.data(), hat.data());
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] /= 1.0 + xi2[i];
    fft_inverse(g, hat.data(), f.data());
  });
  U *= 1.0 / norm_h1(U);
  return U;
}

}  // namespace

State smooth_random_state(const Grid& g, std::uint64_t seed) { return noise_state(g, seed, 0.0, {0, 0, 0}); }

State localized_random_state(const Grid& g, std::uint64_t seed, double width, const Vec3& center) {
  return noise_state(g, seed, width, center);
}

}  // namespace dnls
