#include "dnls/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dnls/errors.hpp"
#include "dnls/log.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

double PhysParams::sigma() const { return 1.0 / std::min({2.0 * alpha, beta, gamma}); }

double PhysParams::sigma0() const { return std::min({2.0 / alpha, 1.0 / beta, 1.0 / gamma}); }

void PhysParams::validate() const {
  for (double v : {alpha, beta, gamma})
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidParameters("alpha, beta, gamma must be positive and finite");
}

bool PhysParams::outside_wellposed_regime() const { return (alpha - gamma) * (beta + gamma) == 0.0; }

bool admissible(const PhysParams& phys, const WaveParams& wave) {
  return wave.omega > phys.sigma() * wave.c_norm2() / 4.0;
}

void require_admissible(const PhysParams& phys, const WaveParams& wave) {
  phys.validate();
  if (!admissible(phys, wave))
    throw InadmissibleParameters("omega=" + std::to_string(wave.omega) + " does not exceed sigma|c|^2/4=" +
                                 std::to_string(phys.sigma() * wave.c_norm2() / 4.0));
}

namespace {

// Spectra of every scalar component, in storage order.
struct Spectra {
  explicit Spectra(const State& U) : grid(U.grid()) {
    U.for_each_component([&](int j, int, const ScalarField& f) {
      ScalarField hat(grid);
      fft_forward(grid, f.data(), hat.data());
      comps[j].push_back(std::move(hat));
    });
  }
  Grid grid;
  std::array<std::vector<ScalarField>, 3> comps;
};

// div u3 in physical space, computed from its spectrum.
ScalarField divergence_from(const Spectra& s) {
  const Grid& g = s.grid;
  const auto& t = spectral_tables(g);
  ScalarField acc(g);
  for (int k = 0; k < g.dim(); ++k) {
    const ScalarField& h = s.comps[2][k];
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += cplx(0.0, t.xi[k][i]) * h[i];
  }
  ScalarField out(g);
  fft_inverse(g, acc.data(), out.data());
  return out;
}

double potential_from(const State& U, const ScalarField& div3) {
  const ScalarField w = dot_conj(U[0], U[1]);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += (div3[i] * std::conj(w[i])).real();
  return -s * U.grid().cell_volume();
}

}  // namespace

double charge(const State& U) {
  double q = 0.0;
  for (int j = 0; j < 3; ++j) q += kChargeWeight[j] * inner_l2(U[j], U[j]).real();
  return q;
}

double kinetic(const State& U, const PhysParams& phys) {
  double l = 0.0;
  U.for_each_component([&](int j, int, const ScalarField& f) { l += 0.5 * phys.kappa(j) * gradient_norm2(f); });
  return l;
}

double potential_N(const State& U) { return potential_from(U, divergence(U[2])); }

double energy(const State& U, const PhysParams& phys) { return kinetic(U, phys) + potential_N(U); }

Vec3 momentum(const State& U) {
  const Grid& g = U.grid();
  const auto& t = spectral_tables(g);
  Vec3 p{0, 0, 0};
  U.for_each_component([&](int, int, const ScalarField& f) {
    const ScalarField hat = forward_transform(f);
    for (int k = 0; k < g.dim(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < hat.size(); ++i) s += t.xi[k][i] * std::norm(hat[i]);
      p[k] -= 0.5 * s;
    }
  });
  for (int k = 0; k < g.dim(); ++k) p[k] *= g.cell_volume();
  return p;
}

FunctionalReport action(const State& U, const PhysParams& phys, const WaveParams& wave) {
  const Grid& g = U.grid();
  const int d = g.dim();
  const auto& t = spectral_tables(g);
  const double dv = g.cell_volume();
  const Spectra spec(U);

  FunctionalReport r;
  r.dim = d;
  r.admissible = admissible(phys, wave);
  if (!r.admissible) log::warn_once("inadmissible-action", "functionals evaluated at inadmissible (omega, c)");

  for (int j = 0; j < 3; ++j) {
    double mass = 0.0, grad2 = 0.0;
    for (const ScalarField& h : spec.comps[j]) {
      for (std::size_t i = 0; i < h.size(); ++i) {
        const double a = std::norm(h[i]);
        mass += a;
        grad2 += t.xi2[i] * a;
        for (int k = 0; k < d; ++k) r.P[k] -= 0.5 * t.xi[k][i] * a;
      }
    }
    r.Q += kChargeWeight[j] * mass * dv;
    r.L += 0.5 * phys.kappa(j) * grad2 * dv;
  }
  for (int k = 0; k < d; ++k) r.P[k] *= dv;
  r.N = potential_from(U, divergence_from(spec));

  const double cP = wave.c_dot(r.P);
  r.E = r.L + r.N;
  r.S = r.E + wave.omega * r.Q + cP;
  r.Lqc = 2.0 * r.L + 2.0 * wave.omega * r.Q + 2.0 * cP;
  r.K = r.Lqc + 3.0 * r.N;
  r.G = (4.0 - 2.0 * d) * wave.omega * r.Q + (3.0 - d) * cP;
  r.G_display = d == 1 ? wave.omega * r.Q + cP : (d == 2 ? cP : r.G);
  return r;
}

State action_gradient(const State& U, const PhysParams& phys, const WaveParams& wave) {
  const Grid& g = U.grid();
  const int d = g.dim();
  const auto& t = spectral_tables(g);
  const Spectra spec(U);
  State G(g);

  // Linear part: (kappa_j |xi|^2 + omega_j - c.xi) u_j in Fourier space.
  ScalarField tmp(g);
  for (int j = 0; j < 3; ++j) {
    const double kap = phys.kappa(j);
    const double om = wave.omega_j(j);
    for (int k = 0; k < d; ++k) {
      const ScalarField& h = spec.comps[j][k];
      for (std::size_t i = 0; i < h.size(); ++i) {
        double cxi = 0.0;
        for (int a = 0; a < d; ++a) cxi += wave.c[a] * t.xi[a][i];
        tmp[i] = (kap * t.xi2[i] + om - cxi) * h[i];
      }
      fft_inverse(g, tmp.data(), G[j][k].data());
    }
  }

  // Coupling: -(div u3) u2, -conj(div u3) u1, +grad(u1 . conj u2).
  const ScalarField div3 = divergence_from(spec);
  for (int k = 0; k < d; ++k) {
    cplx* g1 = G[0][k].data();
    cplx* g2 = G[1][k].data();
    const cplx* u1 = U[0][k].data();
    const cplx* u2 = U[1][k].data();
    for (std::size_t i = 0; i < div3.size(); ++i) {
      g1[i] -= div3[i] * u2[i];
      g2[i] -= std::conj(div3[i]) * u1[i];
    }
  }
  const ScalarField w = dot_conj(U[0], U[1]);
  ScalarField w_hat(g), dw(g);
  fft_forward(g, w.data(), w_hat.data());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = cplx(0.0, t.xi[k][i]) * w_hat[i];
    fft_inverse(g, tmp.data(), dw.data());
    G[2][k] += dw;
  }
  return G;
}

NehariProjection nehari_rescale(const State& U, const PhysParams& phys, const WaveParams& wave) {
  const FunctionalReport r = action(U, phys, wave);
  if (std::abs(r.N) < 1e-14 * (1.0 + std::abs(r.Lqc)))
    throw DegenerateNonlinearity("N(U) vanishes; the state has no coupling to rescale onto K = 0");
  const double lambda = -r.Lqc / (3.0 * r.N);
  return {lambda, lambda * U};
}

CoercivityCertificate coercivity_certificate(const PhysParams& phys, const WaveParams& wave) {
  require_admissible(phys, wave);
  const double c2 = wave.c_norm2();
  const double w = wave.omega;
  CoercivityCertificate cert;
  cert.A1 = 0.25 * (phys.alpha + c2 / (8.0 * w));
  cert.A2 = 0.25 * (phys.beta + c2 / (4.0 * w));
  cert.A3 = 0.25 * (phys.gamma + c2 / (4.0 * w));
  cert.coeffs = {phys.alpha - 2.0 * cert.A1,     phys.beta - 2.0 * cert.A2,  phys.gamma - 2.0 * cert.A3,
                 2.0 * w - c2 / (8.0 * cert.A1), w - c2 / (8.0 * cert.A2), w - c2 / (8.0 * cert.A3)};
  cert.min_coeff = *std::min_element(cert.coeffs.begin(), cert.coeffs.end());
  return cert;
}

CoercivitySplit coercivity_split(const State& U, const PhysParams& phys, const WaveParams& wave,
                                 const CoercivityCertificate& cert) {
  const Grid& g = U.grid();
  const int d = g.dim();
  const auto& t = spectral_tables(g);
  const double dv = g.cell_volume();
  const std::array<double, 3> A{cert.A1, cert.A2, cert.A3};
  CoercivitySplit out;
  out.lqc = action(U, phys, wave).Lqc;
  U.for_each_component([&](int j, int, const ScalarField& f) {
    const ScalarField hat = forward_transform(f);
    double mass = 0.0, grad2 = 0.0, squares = 0.0;
    for (std::size_t i = 0; i < hat.size(); ++i) {
      const double a = std::norm(hat[i]);
      mass += a;
      grad2 += t.xi2[i] * a;
      // |A d_k u - (c_k/4) i u|^2 in Fourier space is (A xi_k - c_k/4)^2 |u_hat|^2
      for (int k = 0; k < d; ++k) {
        const double m = A[j] * t.xi[k][i] - 0.25 * wave.c[k];
        squares += m * m * a;
      }
    }
    out.lower_bound += (cert.coeffs[j] * grad2 + cert.coeffs[3 + j] * mass) * dv;
    out.remainder += 2.0 * squares * dv / A[j];
  });
  return out;
}

ReportIdentities report_identities(const FunctionalReport& r) {
  auto rel = [](double diff, double scale) { return scale > 0.0 ? std::abs(diff) / scale : std::abs(diff); };
  ReportIdentities out;
  out.S_from_K_Lqc = rel(r.S - r.K / 3.0 - r.Lqc / 6.0, std::abs(r.S) + std::abs(r.K / 3.0) + std::abs(r.Lqc / 6.0));
  out.N_from_S_Lqc = rel(r.N - r.S + r.Lqc / 2.0, std::abs(r.N) + std::abs(r.S) + std::abs(r.Lqc / 2.0));
  return out;
}

WellMembership classify_well(const FunctionalReport& r, double mu) {
  if (!(mu > 0.0)) throw NonpositiveLevel("potential-well level must be positive, got " + std::to_string(mu));
  WellMembership m;
  if (r.S < mu) {
    m.Aplus = r.K > 0.0;
    m.Aminus = r.K < 0.0;
    m.Bplus = r.N > -2.0 * mu;
    m.Bminus = r.N < -2.0 * mu;
  }
  return m;
}

WellMembership classify_well(const State& U, const PhysParams& phys, const WaveParams& wave, double mu) {
  require_admissible(phys, wave);
  return classify_well(action(U, phys, wave), mu);
}

double stability_G(const State& U, const PhysParams& phys, const WaveParams& wave) {
  return action(U, phys, wave).G;
}

double stability_G_display(const State& U, const PhysParams& phys, const WaveParams& wave) {
  return action(U, phys, wave).G_display;
}

State dilate(const State& U, double lambda, double amplitude, double* lost_fraction) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameters("dilation factor must be positive");
  State out(U.grid());
  double lost = 0.0;
  U.for_each_component([&](int j, int k, const ScalarField& f) {
    double part = 0.0;
    out[j][k] = resample_dilated(f, lambda, &part);
    out[j][k] *= amplitude;
    lost = std::max(lost, part);
  });
  if (lost_fraction) *lost_fraction = lost;
  if (lost > 1e-8)
    throw ResolutionLoss("dilation by " + std::to_string(lambda) + " loses mass fraction " + std::to_string(lost));
  return out;
}

State l2_scaling(const State& U, double lambda, double* lost_fraction) {
  return dilate(U, lambda, std::pow(lambda, 0.5 * U.grid().dim()), lost_fraction);
}

}  // namespace dnls
