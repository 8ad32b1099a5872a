#pragma once

#include <array>

#include "dnls/grid.hpp"

namespace dnls {

/// Dispersion coefficients. Only the positive octant is supported; the
/// all-negative case maps onto it under (t, x) -> (-t, -x).
struct PhysParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  double sigma() const;   ///< 1 / min(2 alpha, beta, gamma)
  double sigma0() const;  ///< min(2/alpha, 1/beta, 1/gamma)
  double kappa(int j) const { return j == 0 ? alpha : (j == 1 ? beta : gamma); }
  /// Throws InvalidParameters unless all coefficients are positive and finite.
  void validate() const;
  /// True when (alpha - gamma)(beta + gamma) == 0, where the known local
  /// well-posedness theory does not apply.
  bool outside_wellposed_regime() const;
};

struct WaveParams {
  double omega = 1.0;
  Vec3 c{0.0, 0.0, 0.0};

  double c_norm2() const { return c[0] * c[0] + c[1] * c[1] + c[2] * c[2]; }
  double c_dot(const Vec3& p) const { return c[0] * p[0] + c[1] * p[1] + c[2] * p[2]; }
  /// Frequency weight of component j in S: 2 omega, omega, omega.
  double omega_j(int j) const { return j == 0 ? 2.0 * omega : omega; }
};

/// omega > sigma |c|^2 / 4
bool admissible(const PhysParams& phys, const WaveParams& wave);
/// Throws InadmissibleParameters (and InvalidParameters for bad coefficients).
void require_admissible(const PhysParams& phys, const WaveParams& wave);

/// Charge weights of the three components: 1, 1/2, 1/2.
constexpr std::array<double, 3> kChargeWeight{1.0, 0.5, 0.5};

struct FunctionalReport {
  int dim = 1;
  double Q = 0, L = 0, N = 0, E = 0;
  Vec3 P{0, 0, 0};
  double S = 0, K = 0, Lqc = 0;
  double G = 0;          ///< (4-2d) omega Q + (3-d) c.P
  double G_display = 0;  ///< omega Q + c.P (d=1), c.P (d=2), G (d=3)
  bool admissible = true;
};

/// Residuals of S = K/3 + Lqc/6 and N = S - Lqc/2, each relative to the sum
/// of the absolute values of its terms.
struct ReportIdentities {
  double S_from_K_Lqc = 0;
  double N_from_S_Lqc = 0;
  double max() const { return S_from_K_Lqc > N_from_S_Lqc ? S_from_K_Lqc : N_from_S_Lqc; }
};
ReportIdentities report_identities(const FunctionalReport& r);

double charge(const State& U);
double kinetic(const State& U, const PhysParams& phys);
double potential_N(const State& U);
double energy(const State& U, const PhysParams& phys);
Vec3 momentum(const State& U);

/// All functionals in one pass. Inadmissible parameters only produce a
/// one-time warning and `admissible = false`.
FunctionalReport action(const State& U, const PhysParams& phys, const WaveParams& wave);

/// Real L^2 gradient of S: d/de S(U + eV) = Re<G, V>.
State action_gradient(const State& U, const PhysParams& phys, const WaveParams& wave);

struct NehariProjection {
  double lambda;
  State state;
};
/// Scale U onto K = 0 with lambda = -Lqc / (3N).
NehariProjection nehari_rescale(const State& U, const PhysParams& phys, const WaveParams& wave);

struct CoercivityCertificate {
  double A1 = 0, A2 = 0, A3 = 0;
  /// alpha-2A1, beta-2A2, gamma-2A3, 2w-|c|^2/(8A1), w-|c|^2/(8A2), w-|c|^2/(8A3)
  std::array<double, 6> coeffs{};
  double min_coeff = 0;
};
CoercivityCertificate coercivity_certificate(const PhysParams& phys, const WaveParams& wave);

/// Lqc(U) split as lower_bound + remainder, where lower_bound is the
/// certificate-weighted sum of ||grad u_j||^2 and ||u_j||^2 and remainder is
/// the nonnegative sum of completed squares.
struct CoercivitySplit {
  double lqc = 0;
  double lower_bound = 0;
  double remainder = 0;
};
CoercivitySplit coercivity_split(const State& U, const PhysParams& phys, const WaveParams& wave,
                                 const CoercivityCertificate& cert);

struct WellMembership {
  bool Aplus = false, Aminus = false, Bplus = false, Bminus = false;
  bool none() const { return !(Aplus || Aminus || Bplus || Bminus); }
};
WellMembership classify_well(const FunctionalReport& r, double mu);
WellMembership classify_well(const State& U, const PhysParams& phys, const WaveParams& wave, double mu);

double stability_G(const State& U, const PhysParams& phys, const WaveParams& wave);
double stability_G_display(const State& U, const PhysParams& phys, const WaveParams& wave);

/// lambda^{d/2} U(lambda x) on the same grid. Throws ResolutionLoss when the
/// unrepresentable mass fraction exceeds 1e-8; it is reported otherwise.
State l2_scaling(const State& U, double lambda, double* lost_fraction = nullptr);

/// Generic dilation a * U(lambda x), shared by the L^2 scaling and the
/// frequency scaling of solitary waves. Same error contract as l2_scaling.
State dilate(const State& U, double lambda, double amplitude, double* lost_fraction = nullptr);

}  // namespace dnls
