#include "dnls/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dnls/errors.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/log.hpp"
#include "dnls/random_fields.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

namespace {

constexpr std::array<int, 3> kGaugeCharge{2, 1, 1};
constexpr std::array<int, 3> kSecondCharge{0, 1, -1};

double momentum_scale(const State& U) {
  double s = 0.0;
  for (int j = 0; j < 3; ++j) {
    double mass = 0.0, grad = 0.0;
    for (int k = 0; k < U.grid().dim(); ++k) {
      const double m = norm_l2(U[j][k]);
      mass += m * m;
      grad += gradient_norm2(U[j][k]);
    }
    s += 0.5 * std::sqrt(mass * grad);
  }
  return s;
}
constexpr double kReferenceSpacing = 40.0 / 512.0;

// Drop the Nyquist modes (and with `dealias` everything beyond 2/3) of f in place.
void filter_in_place(ScalarField& f, ScalarField& scratch, bool dealias) {
  const Grid& g = f.grid();
  fft_forward(g, f.data(), scratch.data());
  remove_nyquist(g, scratch.data());
  if (dealias) dealias_spectrum(g, scratch.data());
  fft_inverse(g, scratch.data(), f.data());
}

std::vector<cplx> propagator_symbol(const Grid& g, double kappa, double t) {
  const auto& xi2 = spectral_tables(g).xi2;
  std::vector<cplx> sym(g.size());
  for (std::size_t i = 0; i < sym.size(); ++i) sym[i] = std::polar(1.0, -kappa * xi2[i] * t);
  return sym;
}

// Holds the propagator symbols for one (grid, phys, dt) so a long run does
// not rebuild them every step.
class Stepper {
 public:
  Stepper(const Grid& g, const PhysParams& phys, double dt, Scheme scheme, bool dealias)
      : grid_(g), dt_(dt), scheme_(scheme), dealias_(dealias), scratch_(g) {
    for (int j = 0; j < 3; ++j) {
      half_[j] = propagator_symbol(g, phys.kappa(j), 0.5 * dt);
      full_[j] = propagator_symbol(g, phys.kappa(j), dt);
    }
  }

  State advance(const State& U, double t_end) {
    State out = scheme_ == Scheme::strang ? strang(U) : if_rk4(U);
    if (!out.all_finite()) throw NonFinite(t_end);
    return out;
  }

 private:
  State propagate(State U, const std::array<std::vector<cplx>, 3>& sym) {
    U.for_each_component([&](int j, int, ScalarField& f) {
      fft_forward(grid_, f.data(), scratch_.data());
      for (std::size_t i = 0; i < f.size(); ++i) scratch_[i] *= sym[j][i];
      fft_inverse(grid_, scratch_.data(), f.data());
    });
    return U;
  }

  State strang(const State& U) {
    const double h = dt_;
    State v = propagate(U, half_);
    const State k1 = coupling_rhs(v, dealias_);
    const State k2 = coupling_rhs(v + (0.5 * h) * k1, dealias_);
    const State k3 = coupling_rhs(v + (0.5 * h) * k2, dealias_);
    const State k4 = coupling_rhs(v + h * k3, dealias_);
    v.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4);
    return propagate(std::move(v), half_);
  }

  // Lawson integrating-factor RK4 with E(s) the linear flow.
  State if_rk4(const State& U) {
    const double h = dt_;
    const State k1 = coupling_rhs(U, dealias_);
    const State Eu_half = propagate(U, half_);
    const State k2 = coupling_rhs(propagate(U + (0.5 * h) * k1, half_), dealias_);
    const State k3 = coupling_rhs(Eu_half + (0.5 * h) * k2, dealias_);
    const State k4 = coupling_rhs(propagate(U, full_) + h * propagate(k3, half_), dealias_);
    State out = propagate(U, full_);
    out.axpy(h / 6.0, propagate(k1, full_));
    out.axpy(h / 3.0, propagate(k2 + k3, half_));
    out.axpy(h / 6.0, k4);
    return out;
  }

  Grid grid_;
  double dt_;
  Scheme scheme_;
  bool dealias_;
  ScalarField scratch_;
  std::array<std::vector<cplx>, 3> half_, full_;
};

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace

double default_dt(const Grid& g) {
  const double r = g.min_spacing() / kReferenceSpacing;
  return 1e-3 * r * r;
}

void EvolveConfig::validate() const {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw InvalidParameters("evolve.dt must be positive (or 0 for the default)");
  if (!(T_final >= 0.0) || !std::isfinite(T_final)) throw InvalidParameters("evolve.T_final must be nonnegative");
  if (record_stride == 0) throw InvalidParameters("evolve.record_stride must be at least 1");
}

State coupling_rhs(const State& U, bool dealias) {
  const Grid& g = U.grid();
  const int d = g.dim();
  const auto& t = spectral_tables(g);
  const cplx I(0.0, 1.0);

  const ScalarField div3 = divergence(U[2]);
  State out(g);
  ScalarField scratch(g);
  for (int k = 0; k < d; ++k) {
    cplx* o1 = out[0][k].data();
    cplx* o2 = out[1][k].data();
    const cplx* u1 = U[0][k].data();
    const cplx* u2 = U[1][k].data();
    for (std::size_t i = 0; i < div3.size(); ++i) {
      o1[i] = I * div3[i] * u2[i];
      o2[i] = I * std::conj(div3[i]) * u1[i];
    }
    filter_in_place(out[0][k], scratch, dealias);
    filter_in_place(out[1][k], scratch, dealias);
  }

  // -i d_k (u1 . conj u2) = xi_k w_hat in Fourier space.
  const ScalarField w = dot_conj(U[0], U[1]);
  ScalarField w_hat(g);
  fft_forward(g, w.data(), w_hat.data());
  remove_nyquist(g, w_hat.data());
  if (dealias) dealias_spectrum(g, w_hat.data());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < w_hat.size(); ++i) scratch[i] = t.xi[k][i] * w_hat[i];
    fft_inverse(g, scratch.data(), out[2][k].data());
  }
  return out;
}

State rhs(const State& U, const PhysParams& phys, bool dealias) {
  State out = coupling_rhs(U, dealias);
  const cplx I(0.0, 1.0);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < U.grid().dim(); ++k) out[j][k].axpy(I * phys.kappa(j), laplacian(U[j][k]));
  return out;
}

State linear_propagator(const State& U, const PhysParams& phys, double t) {
  const Grid& g = U.grid();
  State out = U;
  ScalarField hat(g);
  for (int j = 0; j < 3; ++j) {
    const auto sym = propagator_symbol(g, phys.kappa(j), t);
    for (int k = 0; k < g.dim(); ++k) {
      fft_forward(g, U[j][k].data(), hat.data());
      for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= sym[i];
      fft_inverse(g, hat.data(), out[j][k].data());
    }
  }
  return out;
}

State step(const State& U, const PhysParams& phys, double dt, Scheme scheme, bool dealias, double t_end) {
  Stepper s(U.grid(), phys, dt, scheme, dealias);
  return s.advance(U, t_end);
}

Evolution evolve(const State& U0, const PhysParams& phys, const WaveParams& wave, const EvolveConfig& config,
                 const Monitors& monitors) {
  phys.validate();
  config.validate();
  if (phys.outside_wellposed_regime())
    log::warn_once("lwp-regime", "(alpha - gamma)(beta + gamma) = 0: no local well-posedness result covers this case");
  const Grid& g = U0.grid();
  const double dt_req = config.resolved_dt(g);
  const std::size_t steps = config.T_final > 0.0
                                ? static_cast<std::size_t>(std::ceil(config.T_final / dt_req - 1e-9))
                                : 0;
  const double dt = steps > 0 ? config.T_final / static_cast<double>(steps) : dt_req;

  Evolution ev{U0, {}};
  EvolutionTrace& tr = ev.trace;
  auto record = [&](double t, const State& U) {
    const FunctionalReport r = action(U, phys, wave);
    tr.times.push_back(t);
    tr.Q.push_back(r.Q);
    tr.E.push_back(r.E);
    tr.P.push_back(r.P);
    tr.S.push_back(r.S);
    tr.K.push_back(r.K);
    tr.K_sign.push_back(sign_of(r.K));
    tr.h1_norm.push_back(norm_h1(U));
    if (tr.size() == 1) tr.P_scale = momentum_scale(U);
    if (monitors.orbit_reference)
      tr.orbit_distance.push_back(orbit_distance(U, *monitors.orbit_reference, monitors.orbit_group).dist);
    if (monitors.mu > 0.0) tr.wells.push_back(classify_well(r, monitors.mu));
    if (monitors.on_record) monitors.on_record(t, U);
  };

  record(0.0, ev.final_state);
  Stepper stepper(g, phys, dt, config.scheme, config.dealias);
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    try {
      ev.final_state = stepper.advance(ev.final_state, t);
    } catch (const NonFinite& e) {
      tr.diverged = true;
      tr.divergence_time = e.time();
      break;
    }
    if (n % config.record_stride == 0 || n == steps) record(t, ev.final_state);
  }
  return ev;
}

double Drift::max() const { return std::max({Q, E, P[0], P[1], P[2]}); }

Drift conservation_drift(const EvolutionTrace& trace) {
  Drift d;
  if (trace.size() == 0) return d;
  const double h1sq = trace.h1_norm[0] * trace.h1_norm[0];
  auto rel = [&](auto get) {
    const double x0 = get(0);
    const double scale = std::abs(x0) < 1e-6 * h1sq ? h1sq : std::abs(x0);
    double worst = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) worst = std::max(worst, std::abs(get(i) - x0));
    return scale > 0.0 ? worst / scale : worst;
  };
  d.Q = rel([&](std::size_t i) { return trace.Q[i]; });
  d.E = rel([&](std::size_t i) { return trace.E[i]; });
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < trace.size(); ++i)
      d.P_abs[k] = std::max(d.P_abs[k], std::abs(trace.P[i][k] - trace.P[0][k]));
    d.P[k] = trace.P_scale > 0.0 ? d.P_abs[k] / trace.P_scale : d.P_abs[k];
  }
  return d;
}

State gauge_apply(const State& U, double theta, double psi) {
  State out = U;
  for (int j = 0; j < 3; ++j) {
    const cplx ph = std::polar(1.0, kGaugeCharge[j] * theta + kSecondCharge[j] * psi);
    for (int k = 0; k < U.grid().dim(); ++k) out[j][k] *= ph;
  }
  return out;
}

State solitary_wave(const State& phi, const WaveParams& wave, double t) {
  const Vec3 y{wave.c[0] * t, wave.c[1] * t, wave.c[2] * t};
  return gauge_apply(translate(phi, y), wave.omega * t);
}

State time_reverse(const State& U) {
  State out = U;
  out.for_each_component([](int, int, ScalarField& f) { f = conj(f); });
  return out;
}

namespace {

// F(z) = Re sum_j sum_xi a_j(xi) e^{i (xi.y - m_j theta - n_j psi)}, the H^1
// overlap of U with Lambda(theta) Gamma(psi) phi(. - y), and its derivatives
// in z = (y_1..y_d, theta[, psi]).
struct Overlap {
  const Grid* grid;
  bool with_psi;
  std::array<std::vector<cplx>, 3> a;

  double eval(const std::vector<double>& z, std::vector<double>* grad, std::vector<double>* hess) const {
    const int d = grid->dim();
    const int D = static_cast<int>(z.size());
    const auto& t = spectral_tables(*grid);
    double F = 0.0;
    if (grad) grad->assign(D, 0.0);
    if (hess) hess->assign(D * D, 0.0);
    double dpsi[5];
    for (int j = 0; j < 3; ++j) {
      const double phase = kGaugeCharge[j] * z[d] + (with_psi ? kSecondCharge[j] * z[d + 1] : 0.0);
      for (std::size_t i = 0; i < a[j].size(); ++i) {
        if (a[j][i] == 0.0) continue;
        double psi = -phase;
        for (int k = 0; k < d; ++k) psi += t.xi[k][i] * z[k];
        const cplx e = a[j][i] * std::polar(1.0, psi);
        F += e.real();
        if (!grad) continue;
        for (int k = 0; k < d; ++k) dpsi[k] = t.xi[k][i];
        dpsi[d] = -kGaugeCharge[j];
        if (with_psi) dpsi[d + 1] = -kSecondCharge[j];
        for (int u = 0; u < D; ++u) {
          (*grad)[u] -= e.imag() * dpsi[u];
          if (hess)
            for (int v = 0; v < D; ++v) (*hess)[u * D + v] -= e.real() * dpsi[u] * dpsi[v];
        }
      }
    }
    return F;
  }
};

// Solve A x = b for a small symmetric positive-definite A; false if not SPD.
bool cholesky_solve(std::vector<double> A, std::vector<double> b, int D, std::vector<double>& x) {
  for (int c = 0; c < D; ++c) {
    double s = A[c * D + c];
    for (int k = 0; k < c; ++k) s -= A[c * D + k] * A[c * D + k];
    if (!(s > 0.0)) return false;
    const double l = std::sqrt(s);
    A[c * D + c] = l;
    for (int r = c + 1; r < D; ++r) {
      double v = A[r * D + c];
      for (int k = 0; k < c; ++k) v -= A[r * D + k] * A[c * D + k];
      A[r * D + c] = v / l;
    }
  }
  for (int r = 0; r < D; ++r) {
    for (int k = 0; k < r; ++k) b[r] -= A[r * D + k] * b[k];
    b[r] /= A[r * D + r];
  }
  for (int r = D - 1; r >= 0; --r) {
    for (int k = r + 1; k < D; ++k) b[r] -= A[k * D + r] * b[k];
    b[r] /= A[r * D + r];
  }
  x = std::move(b);
  return true;
}

double wrap(double v, double period) {
  v = std::fmod(v, period);
  if (v < -0.5 * period) v += period;
  if (v >= 0.5 * period) v -= period;
  return v;
}

}  // namespace

OrbitDistance orbit_distance(const State& U, const State& phi, OrbitGroup group) {
  const Grid& g = U.grid();
  require_same_grid(g, phi.grid());
  const int d = g.dim();
  const bool full = group == OrbitGroup::full;
  const std::size_t Npts = g.size();
  const auto& t = spectral_tables(g);

  // H^1 cross spectra, Nyquist modes excluded.
  Overlap ov{&g, full, {}};
  ScalarField uh(g), ph(g);
  for (int j = 0; j < 3; ++j) {
    ov.a[j].assign(Npts, 0.0);
    for (int k = 0; k < d; ++k) {
      fft_forward(g, U[j][k].data(), uh.data());
      fft_forward(g, phi[j][k].data(), ph.data());
      for (std::size_t i = 0; i < Npts; ++i)
        if (!t.nyquist[i]) ov.a[j][i] += (1.0 + t.xi2[i]) * uh[i] * std::conj(ph[i]) * g.cell_volume();
    }
  }

  // Coarse search over every grid shift and 64 angles. With the full group
  // the angle is the phase p of u2; the phase q of u3 is then optimal in
  // closed form, since u1 carries p + q.
  std::array<std::vector<cplx>, 3> C;
  const double root_n = std::sqrt(static_cast<double>(Npts));
  for (int j = 0; j < 3; ++j) {
    C[j].resize(Npts);
    fft_inverse(g, ov.a[j].data(), C[j].data());
    for (auto& c : C[j]) c *= root_n;
  }
  constexpr int kAngles = 64;
  double best = -HUGE_VAL, best_p = 0.0, best_q = 0.0;
  std::size_t best_i = 0;
  for (int s = 0; s < kAngles; ++s) {
    const double p = 2.0 * std::numbers::pi * s / kAngles;
    const cplx rp = std::polar(1.0, -p);
    for (std::size_t i = 0; i < Npts; ++i) {
      double F, q;
      if (full) {
        const cplx b = rp * C[0][i] + C[2][i];
        q = std::arg(b);
        F = std::abs(b) + (rp * C[1][i]).real();
      } else {
        q = p;
        F = (rp * rp * C[0][i] + rp * C[1][i] + rp * C[2][i]).real();
      }
      if (F > best) {
        best = F;
        best_i = i;
        best_p = p;
        best_q = q;
      }
    }
  }

  const int D = d + (full ? 2 : 1);
  std::vector<double> z(D);
  const auto idx = g.unflatten(best_i);
  for (int k = 0; k < d; ++k) z[k] = static_cast<double>(idx[k]) * g.spacing(k);
  z[d] = 0.5 * (best_p + best_q);
  if (full) z[d + 1] = 0.5 * (best_p - best_q);

  // Damped Newton ascent on F.
  std::vector<double> grad, hess, dz;
  double F = ov.eval(z, &grad, &hess);
  double damping = 0.0;
  for (int it = 0; it < 100; ++it) {
    std::vector<double> A(D * D);
    for (int u = 0; u < D * D; ++u) A[u] = -hess[u];
    double scale = 0.0;
    for (int u = 0; u < D; ++u) scale = std::max(scale, std::abs(A[u * D + u]));
    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      std::vector<double> M = A;
      for (int u = 0; u < D; ++u) M[u * D + u] += damping * scale;
      if (cholesky_solve(M, grad, D, dz)) {
        std::vector<double> zt(D);
        for (int u = 0; u < D; ++u) zt[u] = z[u] + dz[u];
        if (ov.eval(zt, nullptr, nullptr) >= F - 1e-15 * std::abs(F)) {
          z = zt;
          accepted = true;
          damping = damping < 1e-11 ? 0.0 : 0.1 * damping;
          break;
        }
      }
      damping = damping == 0.0 ? 1e-6 : damping * 10.0;
    }
    if (!accepted) break;
    double step = 0.0;
    for (double v : dz) step = std::max(step, std::abs(v));
    F = ov.eval(z, &grad, &hess);
    if (step < 1e-12) break;
  }

  OrbitDistance res;
  for (int k = 0; k < d; ++k) res.y_star[k] = wrap(z[k], g.extent(k));
  res.theta_star = wrap(z[d], 2.0 * std::numbers::pi);
  if (full) res.psi_star = wrap(z[d + 1], 2.0 * std::numbers::pi);
  res.dist = norm_h1(U - gauge_apply(translate(phi, res.y_star), res.theta_star, res.psi_star));
  const double plain = norm_h1(U - phi);
  if (plain <= res.dist) return {plain, {0, 0, 0}, 0.0, 0.0};
  return res;
}

bool in_sandwich(const State& U, const PhysParams& phys, const StabilityReport& levels) {
  const FunctionalReport rp = action(U, phys, WaveParams{levels.omega_plus, levels.c_plus});
  const FunctionalReport rm = action(U, phys, WaveParams{levels.omega_minus, levels.c_minus});
  return classify_well(rp, levels.mu_plus).Bplus && classify_well(rm, levels.mu_minus).Bminus;
}

StabilityReport stability_experiment(const GroundStateResult& gs, const StabilityConfig& config) {
  const State& phi = gs.phi;
  const Grid& g = phi.grid();
  const int d = g.dim();
  if (d > 2) throw WrongDimension("stability experiments need d = 1 or 2");
  if (!(config.delta >= 0.0)) throw InvalidParameters("perturbation size must be nonnegative");
  const PhysParams& phys = gs.phys;
  const WaveParams& wave = gs.wave;

  StabilityReport rep;
  rep.delta = config.delta;
  rep.seed = config.seed;
  rep.mu = gs.mu;
  const double s = std::sqrt(wave.omega);
  rep.tau0 = 0.05 * s;
  rep.omega_plus = (s + rep.tau0) * (s + rep.tau0);
  rep.omega_minus = (s - rep.tau0) * (s - rep.tau0);
  for (int k = 0; k < 3; ++k) {
    rep.c_plus[k] = wave.c[k] * (s + rep.tau0) / s;
    rep.c_minus[k] = wave.c[k] * (s - rep.tau0) / s;
  }
  rep.mu_plus = mu_on_curve(gs.mu, wave.omega, -rep.tau0, d);
  rep.mu_minus = mu_on_curve(gs.mu, wave.omega, rep.tau0, d);

  State v = smooth_random_state(g, config.seed);
  remove_nyquist(v);
  v *= 1.0 / norm_h1(v);

  // Directional sandwich threshold: geometric bracket, then bisection.
  auto member = [&](double delta) { return in_sandwich(phi + delta * v, phys, rep); };
  double lo = 0.0, hi = 1e-8;
  const double cap = 10.0 * norm_h1(phi);
  while (hi < cap && member(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  if (lo > 0.0)
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (member(mid) ? lo : hi) = mid;
    }
  rep.threshold = lo;

  // Radial shrink into {S < mu, K > 0}; S(sU) = s^2 Lqc/2 + s^3 N.
  State U0 = phi + config.delta * v;
  if (config.delta > 0.0) {
    const FunctionalReport r = action(U0, phys, wave);
    const double target = gs.mu * (1.0 - 1e-2 * config.delta * config.delta);
    auto S_of = [&](double f) { return f * f * (0.5 * r.Lqc + f * r.N); };
    if (!(r.K > 0.0 && r.S < target)) {
      // S(sU) increases on (0, lambda*), where lambda* puts sU on K = 0.
      double a = 0.0, b = r.N < 0.0 ? std::min(1.0, -r.Lqc / (3.0 * r.N)) : 1.0;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        (S_of(m) < target ? a : b) = m;
      }
      rep.shrink = a;
    }
    U0 *= rep.shrink;
  }
  rep.initial_in_sandwich = member(0.0) && in_sandwich(U0, phys, rep);

  std::size_t inside = 0;
  Monitors mon;
  mon.orbit_reference = &phi;
  mon.mu = gs.mu;
  mon.on_record = [&](double, const State& U) {
    rep.distance_lambda.push_back(orbit_distance(U, phi, OrbitGroup::lambda).dist);
    const bool m = in_sandwich(U, phys, rep);
    rep.sandwich.push_back(m);
    inside += m ? 1 : 0;
  };
  Evolution ev = evolve(U0, phys, wave, config.evolve, mon);
  rep.trace = std::move(ev.trace);
  const EvolutionTrace& tr = rep.trace;
  rep.initial_distance = tr.orbit_distance.front();
  rep.sup_distance = *std::max_element(tr.orbit_distance.begin(), tr.orbit_distance.end());
  rep.sup_distance_lambda = *std::max_element(rep.distance_lambda.begin(), rep.distance_lambda.end());
  rep.initial_K_sign = tr.K_sign.front();
  rep.K_sign_constant = std::all_of(tr.K_sign.begin(), tr.K_sign.end(), [&](int k) { return k == tr.K_sign.front(); });
  rep.sandwich_fraction = static_cast<double>(inside) / static_cast<double>(tr.size());
  return rep;
}

DecayReport decay_rate_fit(const State& phi, const PhysParams& phys, const WaveParams& wave) {
  require_admissible(phys, wave);
  const Grid& g = phi.grid();
  const int d = g.dim();
  DecayReport rep;
  double half_box = HUGE_VAL, bin = 0.0;
  for (int k = 0; k < d; ++k) {
    half_box = std::min(half_box, 0.5 * g.extent(k));
    bin = std::max(bin, g.spacing(k));
  }
  rep.window_lo = 0.5 * half_box;
  rep.window_hi = 0.9 * half_box;
  rep.p_max = std::sqrt(4.0 * wave.omega * phys.sigma0()) *
              (1.0 - std::sqrt(phys.sigma() / (4.0 * wave.omega)) * std::sqrt(wave.c_norm2()));
  rep.half_bound = 0.5 * rep.p_max;

  std::vector<double> radius(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) r2 += g.coordinate(k, idx[k]) * g.coordinate(k, idx[k]);
    radius[i] = std::sqrt(r2);
  }

  rep.min_rate = HUGE_VAL;
  for (int j = 0; j < 3; ++j) {
    // (r, log amplitude) samples: single points in 1-D, shell means otherwise.
    std::vector<double> xs, ys;
    if (d == 1) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (radius[i] < rep.window_lo || radius[i] > rep.window_hi) continue;
        xs.push_back(radius[i]);
        ys.push_back(std::log(std::abs(phi[j][0][i]) + 1e-300));
      }
    } else {
      const auto nbins = static_cast<std::size_t>(std::ceil((rep.window_hi - rep.window_lo) / bin));
      std::vector<double> rsum(nbins, 0.0), asum(nbins, 0.0);
      std::vector<std::size_t> count(nbins, 0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (radius[i] < rep.window_lo || radius[i] > rep.window_hi) continue;
        const auto b = std::min(nbins - 1, static_cast<std::size_t>((radius[i] - rep.window_lo) / bin));
        double a2 = 0.0;
        for (int k = 0; k < d; ++k) a2 += std::norm(phi[j][k][i]);
        rsum[b] += radius[i];
        asum[b] += std::sqrt(a2);
        ++count[b];
      }
      for (std::size_t b = 0; b < nbins; ++b) {
        if (count[b] == 0) continue;
        const double n = static_cast<double>(count[b]);
        xs.push_back(rsum[b] / n);
        ys.push_back(std::log(asum[b] / n + 1e-300));
      }
    }
    if (xs.size() < 3) throw FitWindowEmpty("fewer than three samples in the decay window");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - (my + slope * (xs[i] - mx));
      ss += e * e;
    }
    rep.rates[j] = -slope;
    rep.fit_residual[j] = std::sqrt(ss / n);
    rep.min_rate = std::min(rep.min_rate, rep.rates[j]);
  }
  return rep;
}

}  // namespace dnls
