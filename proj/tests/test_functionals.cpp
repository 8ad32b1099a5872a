#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dnls/errors.hpp"
#include "dnls/functionals.hpp"
#include "dnls/random_fields.hpp"
#include "dnls/spectral.hpp"
#include "oracles.hpp"

using namespace dnls;

namespace {

// Analytic 1-D profile g(x) = a (x - x0)^p exp(-(x - x0)^2 / s^2 + i k x) and its derivative.
struct Profile {
  cplx a;
  double x0, s, k;
  int p;
  cplx value(double x) const {
    const double y = x - x0;
    return a * std::pow(y, p) * std::exp(-y * y / (s * s)) * std::polar(1.0, k * x);
  }
  cplx deriv(double x) const {
    const double y = x - x0;
    const cplx base = std::exp(-y * y / (s * s)) * std::polar(1.0, k * x);
    const cplx poly = (p > 0 ? p * std::pow(y, p - 1) : 0.0) + std::pow(y, p) * (-2.0 * y / (s * s) + cplx(0, k));
    return a * base * poly;
  }
};

cplx integrate(const std::function<cplx(double)>& f, double lo, double hi) {
  return {oracle::simpson([&](double x) { return f(x).real(); }, lo, hi),
          oracle::simpson([&](double x) { return f(x).imag(); }, lo, hi)};
}

ScalarField sample1(const Grid& g, const Profile& p) {
  ScalarField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = p.value(g.coordinate(0, i));
  return f;
}

// Periodic wavenumbers must fit the box for the oracle to be exact.
double fit(double k, double L) { return std::round(k * L / (2 * std::numbers::pi)) * 2 * std::numbers::pi / L; }

State random_state(const Grid& g, std::uint64_t seed, double scale = 1.0) {
  State U = smooth_random_state(g, seed);
  remove_nyquist(U);
  U *= scale;
  return U;
}

}  // namespace

TEST_CASE("one-dimensional functionals against adaptive quadrature") {
  const double L = 30.0;
  const Grid g(1, {256, 1, 1}, {L, 1, 1});
  const PhysParams phys{1.3, 0.7, 2.1};
  const WaveParams wave{2.0, {0.8, 0, 0}};
  const Profile p1{{1.2, 0.3}, 0.5, 1.6, fit(0.7, L), 0};
  const Profile p2{{0.4, -0.9}, -0.3, 1.9, fit(-0.4, L), 0};
  const Profile p3{{0.8, 0.0}, 0.1, 1.4, fit(0.2, L), 1};
  State U(g);
  U[0][0] = sample1(g, p1);
  U[1][0] = sample1(g, p2);
  U[2][0] = sample1(g, p3);

  const double lo = -L / 2, hi = L / 2;
  const Profile* ps[3] = {&p1, &p2, &p3};
  double Q = 0, Lk = 0, P = 0;
  for (int j = 0; j < 3; ++j) {
    const Profile& q = *ps[j];
    const double mass = oracle::simpson([&](double x) { return std::norm(q.value(x)); }, lo, hi);
    const double grad = oracle::simpson([&](double x) { return std::norm(q.deriv(x)); }, lo, hi);
    const double mom = oracle::simpson([&](double x) { return (std::conj(q.value(x)) * q.deriv(x)).imag(); }, lo, hi);
    Q += kChargeWeight[j] * mass;
    Lk += 0.5 * phys.kappa(j) * grad;
    P += -0.5 * mom;
  }
  const double N =
      -integrate([&](double x) { return p3.deriv(x) * std::conj(p1.value(x) * std::conj(p2.value(x))); }, lo, hi).real();

  const FunctionalReport r = action(U, phys, wave);
  CHECK(r.Q == doctest::Approx(Q).epsilon(1e-11));
  CHECK(r.L == doctest::Approx(Lk).epsilon(1e-11));
  CHECK(r.P[0] == doctest::Approx(P).epsilon(1e-10));
  CHECK(r.N == doctest::Approx(N).epsilon(1e-10));
  CHECK(r.E == doctest::Approx(Lk + N).epsilon(1e-10));
  CHECK(r.S == doctest::Approx(Lk + N + wave.omega * Q + wave.c[0] * P).epsilon(1e-10));
  CHECK(r.G_display == doctest::Approx(wave.omega * Q + wave.c[0] * P).epsilon(1e-10));
  CHECK(r.G == doctest::Approx(2 * wave.omega * Q + 2 * wave.c[0] * P).epsilon(1e-10));

  CHECK(charge(U) == doctest::Approx(r.Q).epsilon(1e-14));
  CHECK(kinetic(U, phys) == doctest::Approx(r.L).epsilon(1e-14));
  CHECK(potential_N(U) == doctest::Approx(r.N).epsilon(1e-13));
  CHECK(energy(U, phys) == doctest::Approx(r.E).epsilon(1e-13));
  CHECK(momentum(U)[0] == doctest::Approx(r.P[0]).epsilon(1e-13));
}

TEST_CASE("two-dimensional potential on separable fields") {
  const double L = 24.0;
  const Grid g(2, {64, 64, 1}, {L, L, 1});
  const Profile f1{{1.0, 0.2}, 0.3, 1.5, fit(0.5, L), 0}, g1{{0.9, 0}, -0.2, 1.7, 0.0, 0};
  const Profile f2{{0.7, -0.3}, -0.1, 1.8, 0.0, 0}, g2{{1.1, 0.4}, 0.2, 1.6, fit(-0.5, L), 0};
  const Profile pa{{0.6, 0}, 0.0, 1.6, 0.0, 1}, qa{{1.0, 0}, 0.1, 2.0, 0.0, 0};
  const Profile ra{{0.5, 0.5}, 0.2, 1.7, 0.0, 0}, sa{{0.8, 0}, -0.1, 1.5, 0.0, 1};
  State U(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    const double x = g.coordinate(0, idx[0]), y = g.coordinate(1, idx[1]);
    U[0][0][i] = f1.value(x) * g1.value(y);
    U[1][0][i] = f2.value(x) * g2.value(y);
    U[2][0][i] = pa.value(x) * qa.value(y);
    U[2][1][i] = ra.value(x) * sa.value(y);
  }
  const double lo = -L / 2, hi = L / 2;
  auto w = [&](const Profile& a, const Profile& b, double x) { return a.value(x) * std::conj(b.value(x)); };
  const cplx Ix1 = integrate([&](double x) { return pa.deriv(x) * std::conj(w(f1, f2, x)); }, lo, hi);
  const cplx Iy1 = integrate([&](double y) { return qa.value(y) * std::conj(w(g1, g2, y)); }, lo, hi);
  const cplx Ix2 = integrate([&](double x) { return ra.value(x) * std::conj(w(f1, f2, x)); }, lo, hi);
  const cplx Iy2 = integrate([&](double y) { return sa.deriv(y) * std::conj(w(g1, g2, y)); }, lo, hi);
  const double N = -(Ix1 * Iy1 + Ix2 * Iy2).real();
  CHECK(potential_N(U) == doctest::Approx(N).epsilon(1e-10));
}

TEST_CASE("property: report identities hold to roundoff") {
  oracle::Gen gen(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = gen.integer(1, 3);
    const std::size_t n = d == 1 ? 64 : (d == 2 ? 16 : 8);
    const Grid g = Grid::cube(d, n, gen.uniform(5, 20));
    const PhysParams phys{gen.uniform(0.2, 3), gen.uniform(0.2, 3), gen.uniform(0.2, 3)};
    WaveParams wave{gen.uniform(0.1, 5), {0, 0, 0}};
    for (int k = 0; k < d; ++k) wave.c[k] = gen.uniform(-1, 1);
    const State U = random_state(g, gen.bits(), gen.uniform(0.1, 10));
    const FunctionalReport r = action(U, phys, wave);
    const ReportIdentities ids = report_identities(r);
    CHECK(ids.max() < 1e-13);
    const double s = gen.uniform(0.1, 3);
    const FunctionalReport rs = action(cplx(s) * U, phys, wave);
    CHECK(rs.S == doctest::Approx(s * s * r.Lqc / 2 + s * s * s * r.N).epsilon(1e-12));
    CHECK(rs.K == doctest::Approx(s * s * r.Lqc + 3 * s * s * s * r.N).epsilon(1e-11).scale(std::abs(s * s * r.Lqc)));
  }
}

TEST_CASE("property: functionals are translation invariant") {
  // Sums of Gaussians are resolved to roundoff, so the cubic term has no
  // aliasing error that could depend on the shift.
  oracle::Gen gen(8);
  const Grid g(2, {64, 64, 1}, {24, 24, 1});
  const PhysParams phys;
  const WaveParams wave{1.0, {0.3, -0.2, 0}};
  for (int trial = 0; trial < 10; ++trial) {
    State U(g);
    U.for_each_component([&](int, int, ScalarField& f) {
      for (int b = 0; b < 3; ++b) {
        const cplx a = gen.cnormal();
        const double cx = gen.uniform(-3, 3), cy = gen.uniform(-3, 3), w = gen.uniform(1.2, 2.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const auto idx = g.unflatten(i);
          const double x = g.coordinate(0, idx[0]) - cx, y = g.coordinate(1, idx[1]) - cy;
          f[i] += a * std::exp(-(x * x + y * y) / (w * w));
        }
      }
    });
    const Vec3 y{gen.uniform(-5, 5), gen.uniform(-5, 5), 0};
    const FunctionalReport a = action(U, phys, wave), b = action(translate(U, y), phys, wave);
    CHECK(b.S == doctest::Approx(a.S).epsilon(1e-12));
    CHECK(b.N == doctest::Approx(a.N).epsilon(1e-11));
    CHECK(b.P[0] == doctest::Approx(a.P[0]).epsilon(1e-11));
  }
}

TEST_CASE("action gradient matches central differences") {
  oracle::Gen gen(4);
  for (int d = 1; d <= 2; ++d) {
    const Grid g = Grid::cube(d, d == 1 ? 64 : 16, 10.0);
    const PhysParams phys{1.0, 0.5, 2.0};
    const WaveParams wave{1.5, {0.4, 0.2, 0}};
    const State U = random_state(g, gen.bits(), 2.0);
    const State G = action_gradient(U, phys, wave);
    for (int trial = 0; trial < 5; ++trial) {
      const State V = random_state(g, gen.bits());
      const double h = 1e-4;
      const double fd = (action(U + cplx(h) * V, phys, wave).S - action(U - cplx(h) * V, phys, wave).S) / (2 * h);
      const double an = inner_l2(G, V).real();
      CHECK(an == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("Nehari rescaling lands on K = 0") {
  oracle::Gen gen(2);
  const Grid g(1, {128, 1, 1}, {20, 1, 1});
  const PhysParams phys;
  const WaveParams wave{1.0, {0.5, 0, 0}};
  for (int trial = 0; trial < 10; ++trial) {
    State U = random_state(g, gen.bits());
    if (action(U, phys, wave).N > 0)
      for (int k = 0; k < 1; ++k) U[2][k] *= -1.0;
    const NehariProjection p = nehari_rescale(U, phys, wave);
    const FunctionalReport r = action(p.state, phys, wave);
    CHECK(p.lambda > 0);
    CHECK(std::abs(r.K) < 1e-12 * r.Lqc);
  }
  CHECK_THROWS_AS(nehari_rescale(State(g), phys, wave), DegenerateNonlinearity);
}

TEST_CASE("admissibility boundary") {
  const PhysParams phys{1.0, 0.5, 2.0};  // sigma = 1 / min(2, 0.5, 2) = 2
  CHECK(phys.sigma() == doctest::Approx(2.0));
  CHECK(phys.sigma0() == doctest::Approx(std::min({2.0, 2.0, 0.5})));
  const double cmax = 2.0 * std::sqrt(1.0 / phys.sigma());
  CHECK(admissible(phys, {1.0, {0.999 * cmax, 0, 0}}));
  CHECK_FALSE(admissible(phys, {1.0, {cmax, 0, 0}}));
  CHECK_THROWS_AS(require_admissible(phys, {1.0, {1.01 * cmax, 0, 0}}), InadmissibleParameters);
  CHECK_THROWS_AS(require_admissible({1.0, -1.0, 1.0}, {1.0, {0, 0, 0}}), InvalidParameters);
  CHECK(PhysParams{1.0, 1.0, 1.0}.outside_wellposed_regime());
  CHECK_FALSE(PhysParams{2.0, 1.0, 1.0}.outside_wellposed_regime());
}

TEST_CASE("property: coercivity certificate and completed-square split") {
  oracle::Gen gen(17);
  for (int trial = 0; trial < 30; ++trial) {
    const PhysParams phys{gen.uniform(0.3, 3), gen.uniform(0.3, 3), gen.uniform(0.3, 3)};
    const double omega = gen.uniform(0.2, 4);
    const double cmax = 2 * std::sqrt(omega / phys.sigma());
    const double c = gen.uniform(0, 0.99) * cmax;
    const WaveParams wave{omega, {c, 0, 0}};
    const CoercivityCertificate cert = coercivity_certificate(phys, wave);
    CHECK(cert.min_coeff > 0);
    const Grid g(1, {128, 1, 1}, {30, 1, 1});
    const State U = random_state(g, gen.bits());
    const CoercivitySplit s = coercivity_split(U, phys, wave, cert);
    CHECK(s.lqc > 0);
    CHECK(s.remainder >= 0);
    CHECK(s.lower_bound + s.remainder == doctest::Approx(s.lqc).epsilon(1e-12));
  }
}

TEST_CASE("well classification") {
  FunctionalReport r;
  r.S = 1.0;
  r.K = 0.5;
  r.N = -0.5;
  WellMembership m = classify_well(r, 2.0);
  CHECK(m.Aplus);
  CHECK(m.Bplus);
  CHECK_FALSE(m.Aminus);
  r.K = -1.0;
  r.N = -5.0;
  m = classify_well(r, 2.0);
  CHECK(m.Aminus);
  CHECK(m.Bminus);
  r.S = 3.0;
  CHECK(classify_well(r, 2.0).none());
  CHECK_THROWS_AS(classify_well(r, 0.0), NonpositiveLevel);
}

TEST_CASE("G and its display form by dimension") {
  oracle::Gen gen(30);
  const WaveParams wave{1.3, {0.2, 0.1, -0.1}};
  for (int d = 1; d <= 3; ++d) {
    const Grid g = Grid::cube(d, d == 3 ? 8 : 16, 8.0);
    const FunctionalReport r = action(random_state(g, gen.bits()), PhysParams{}, wave);
    const double cP = wave.c_dot(r.P);
    CHECK(r.G == doctest::Approx((4.0 - 2 * d) * wave.omega * r.Q + (3.0 - d) * cP));
    const double disp = d == 1 ? wave.omega * r.Q + cP : (d == 2 ? cP : r.G);
    CHECK(r.G_display == doctest::Approx(disp));
  }
}

TEST_CASE("L2 scaling keeps the charge and scales the kinetic term") {
  const Grid g(1, {512, 1, 1}, {40, 1, 1});
  State U(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(0, i);
    U[0][0][i] = std::exp(-x * x);
    U[2][0][i] = x * std::exp(-x * x / 2);
  }
  double lost = 1.0;
  const State V = l2_scaling(U, 1.5, &lost);
  CHECK(lost < 1e-8);
  CHECK(charge(V) == doctest::Approx(charge(U)).epsilon(1e-10));
  CHECK(kinetic(V, PhysParams{}) == doctest::Approx(2.25 * kinetic(U, PhysParams{})).epsilon(1e-9));
  CHECK_THROWS_AS(l2_scaling(U, 0.1), ResolutionLoss);
  CHECK_THROWS_AS(l2_scaling(U, 40.0), ResolutionLoss);
}
