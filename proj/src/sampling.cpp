#include "dnls/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dnls/errors.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/random_fields.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

namespace {

// S(tV) = a t^2 + n t^3 along the ray.
struct Ray {
  double a, n;
  double S(double t) const { return t * t * (a + n * t); }
};

// Root of S(t) = mu on [lo, hi], where S(lo) and S(hi) straddle mu.
double solve_level(const Ray& ray, double mu, double lo, double hi) {
  const bool rising = ray.S(hi) > ray.S(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((ray.S(mid) < mu) == rising)
      lo = mid;
    else
      hi = mid;
  }
  return rising ? lo : hi;
}

}  // namespace

State sublevel_on_ray(const State& V, const PhysParams& phys, const WaveParams& wave, double mu, WellBranch branch,
                      double u) {
  if (!(mu > 0.0)) throw NonpositiveLevel("sublevel sampling needs a positive level");
  State W = V;
  FunctionalReport r = action(W, phys, wave);
  if (!(r.Lqc > 0.0)) throw InadmissibleParameters("Lqc must be positive on the sampled ray");
  if (branch == WellBranch::minus && r.N >= 0.0) {
    for (int k = 0; k < W.grid().dim(); ++k) W[2][k] *= -1.0;
    r = action(W, phys, wave);
  }
  if (branch == WellBranch::minus && !(r.N < 0.0))
    throw DegenerateNonlinearity("N vanishes on the sampled ray; no state with K < 0 exists on it");
  const Ray ray{0.5 * r.Lqc, r.N};
  double t = 0.0;
  if (branch == WellBranch::plus) {
    double top;
    if (r.N < 0.0) {
      const double crit = -r.Lqc / (3.0 * r.N);
      top = ray.S(crit) < mu ? crit : solve_level(ray, mu, 0.0, crit);
    } else {
      double hi = 1.0;
      while (ray.S(hi) < mu) hi *= 2.0;
      top = solve_level(ray, mu, 0.0, hi);
    }
    t = u * top;
  } else {
    const double crit = -r.Lqc / (3.0 * r.N);
    double bottom = crit;
    if (!(ray.S(crit) < mu)) {
      double hi = 2.0 * crit;
      while (!(ray.S(hi) < mu)) hi *= 2.0;
      bottom = solve_level(ray, mu, crit, hi);
    }
    // Stay strictly beyond the level crossing.
    t = bottom * (1.0 + 1e-9 + u);
  }
  W *= t;
  return W;
}

WellSampleReport well_equality_sample(const GroundStateResult& gs, std::size_t samples, std::uint64_t seed) {
  const Grid& g = gs.phi.grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double phi_norm = norm_h1(gs.phi);
  WellSampleReport rep;
  rep.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const std::uint64_t field_seed = rng();
    const double u = 0.02 + 0.96 * unit(rng);
    const double eps = 0.05 + 0.25 * unit(rng);
    const WellBranch branch = (i % 2 == 0) ? WellBranch::plus : WellBranch::minus;
    State v = smooth_random_state(g, field_seed);
    remove_nyquist(v);
    State V = (i % 4 < 2) ? v : gs.phi + cplx(eps * phi_norm / norm_h1(v)) * v;
    const State U = sublevel_on_ray(V, gs.phys, gs.wave, gs.mu, branch, u);
    const FunctionalReport r = action(U, gs.phys, gs.wave);
    if (!(r.S < gs.mu)) {
      ++rep.outside;
      continue;
    }
    const WellMembership m = classify_well(r, gs.mu);
    rep.aplus += m.Aplus;
    rep.aminus += m.Aminus;
    if (m.Aplus != m.Bplus || m.Aminus != m.Bminus) ++rep.disagreements;
  }
  return rep;
}

CoercivitySample coercivity_sample(const Grid& g, const PhysParams& phys, const WaveParams& wave, std::size_t samples,
                                   std::uint64_t seed) {
  CoercivitySample out;
  out.cert = coercivity_certificate(phys, wave);
  out.samples = samples;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.min_remainder = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> offset(-2, 2);
  const int d = g.dim();
  for (std::size_t i = 0; i < samples; ++i) {
    State U = smooth_random_state(g, rng());
    if (i % 2 == 1) {
      for (int j = 0; j < 3; ++j) {
        Vec3 q{0, 0, 0};
        for (int k = 0; k < d; ++k) {
          const double dk = 2.0 * std::numbers::pi / g.extent(k);
          const long m = std::lround(wave.c[k] / (2.0 * phys.kappa(j)) / dk) + offset(rng);
          q[k] = m * dk;
        }
        for (int k = 0; k < d; ++k) {
          ScalarField& f = U[j][k];
          for (std::size_t p = 0; p < f.size(); ++p) {
            const auto idx = g.unflatten(p);
            double phase = 0.0;
            for (int a = 0; a < d; ++a) phase += q[a] * g.coordinate(a, idx[a]);
            f[p] *= std::polar(1.0, phase);
          }
        }
      }
    }
    const CoercivitySplit s = coercivity_split(U, phys, wave, out.cert);
    const double h1 = norm_h1(U);
    if (!(s.lqc > 0.0)) ++out.nonpositive;
    out.min_ratio = std::min(out.min_ratio, s.lqc / (h1 * h1));
    out.max_split_error = std::max(out.max_split_error, std::abs(s.lqc - s.lower_bound - s.remainder) / std::abs(s.lqc));
    out.min_remainder = std::min(out.min_remainder, s.remainder / std::abs(s.lqc));
  }
  return out;
}

}  // namespace dnls
