#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dnls/functionals.hpp"
#include "dnls/grid.hpp"

namespace dnls {

/// Gaussian seed profile: u1 = u2 = a g e_1, u3 = -d_1(a g) e_1 with
/// g = exp(-|x - center|^2 / w^2).
struct AnsatzConfig {
  double amplitude = 1.0;
  double width = 1.5;
  /// Multiply component j by exp(i c.x / (2 kappa_j)), the phase that
  /// minimizes kappa_j |xi|^2 - c.xi.
  bool carrier = false;
  /// Negate u3 (reverses the sign of N).
  bool flip_u3 = false;
  Vec3 center{0, 0, 0};
};

struct SolverConfig {
  std::size_t max_iter = 20000;
  /// Preconditioned-gradient H^1 norm relative to ||phi||_{H^1}.
  double residual_tol = 1e-9;
  double step_size = 0.5;
  AnsatzConfig ansatz;
  std::uint64_t seed = 0;
  /// Attempts from perturbed starts; the converged one with the lowest S wins.
  /// Once one attempt has converged, later attempts stop early when the
  /// residual fails to halve over 500 iterations.
  int restarts = 3;
  /// H^1 size of the seeded perturbation added to the ansatz on restarts
  /// 1, 2, ..., relative to the ansatz norm.
  double restart_noise = 0.05;
  /// Keep the accepted S values (for monotonicity diagnostics).
  bool record_history = false;
  void validate() const;
};

struct GroundStateResult {
  GroundStateResult(State phi_, const PhysParams& phys_, const WaveParams& wave_)
      : phi(std::move(phi_)), phys(phys_), wave(wave_) {}
  State phi;
  PhysParams phys;
  WaveParams wave;
  double mu = 0;
  std::size_t iterations = 0;
  double final_residual = 0;
  FunctionalReport report;
  double pohozaev_residual = 0;
  double fourd_residual = 0;
  double stability_margin = 0;
  double tail_mass = 0;
  /// tail_mass above 1e-8: the box is marginal for this profile.
  bool domain_flag = false;
  int best_restart = 0;
  /// Largest |K| / max(1, Lqc) over accepted iterates.
  double max_nehari_defect = 0;
  std::vector<double> s_history;
};

State initial_ansatz(const Grid& g, const PhysParams& phys, const WaveParams& wave, const AnsatzConfig& ansatz);

/// Componentwise Fourier inverse of (kappa_j |xi|^2 + omega_j - c.xi).
State precondition(const State& grad, const PhysParams& phys, const WaveParams& wave);

GroundStateResult solve_ground_state(const Grid& g, const PhysParams& phys, const WaveParams& wave,
                                     const SolverConfig& config);

/// |2L + (d/2+1)N + c.P| normalized by the sum of the absolute terms.
double pohozaev_residual(const State& phi, const PhysParams& phys, const WaveParams& wave);
double pohozaev_residual(const FunctionalReport& r, const WaveParams& wave);

/// |2 omega Q + c.P - (4-d) mu| / ((4-d) mu).
double identity_4minusd_check(const GroundStateResult& result);
double identity_4minusd_residual(const FunctionalReport& r, const WaveParams& wave, double mu);

/// Fraction of the weighted L^2 mass outside the central 80% of the box.
double tail_mass(const State& U);

struct MuScalingPoint {
  double omega = 0;
  Vec3 c{0, 0, 0};
  double mu = 0;            ///< solved at (omega, sqrt(omega) c0)
  double mu_predicted = 0;  ///< omega^{2-d/2} mu(1, c0)
  double rel_error = 0;
  /// Q of the dilated profile sqrt(omega) Psi(sqrt(omega) x) against omega^{1-d/2} Q(Psi).
  /// NaN (with a warning) when the dilation does not fit the grid.
  double charge_scaling_error = 0;
  /// S_{omega,c} of the dilated profile against the solved mu.
  double action_scaling_error = 0;
  std::size_t iterations = 0;
};
struct MuScalingReport {
  double mu_reference = 0;  ///< mu(1, c0)
  std::vector<MuScalingPoint> points;
};
MuScalingReport mu_scaling_check(const Grid& g, const PhysParams& phys, const Vec3& c0,
                                 const std::vector<double>& omegas, const SolverConfig& config);

struct HCurvePoint {
  double tau = 0;
  double omega = 0;
  Vec3 c{0, 0, 0};
  double mu = 0;        ///< solved directly
  double h_closed = 0;  ///< (sqrt(omega) - tau)^{4-d} mu(1, c/sqrt(omega))
};
struct HCurveReport {
  double tau0 = 0;
  std::vector<HCurvePoint> points;  ///< requested taus plus the stencil points
  double h0 = 0;
  double mu_direct = 0;
  double h0_rel_error = 0;
  double h1_fd = 0, h1_closed = 0, h1_rel_error = 0;
  double h2_fd = 0, h2_closed = 0, h2_rel_error = 0;
};
/// Finite-difference derivatives of mu along the scaling curve, compared
/// with the closed forms evaluated on the ground state at tau = 0.
HCurveReport h_curve(const Grid& g, const PhysParams& phys, const WaveParams& wave, const std::vector<double>& taus,
                     const SolverConfig& config);

struct StabilityMargin {
  double margin = 0;
  bool in_Mstar = false;
};
/// margin = G / (2 omega); membership tested with G_display >= eta_probe.
StabilityMargin stability_margin(const GroundStateResult& result, double eta_probe);

/// Q(phi) - E(phi) for a two-dimensional ground state at omega = 1.
double gwp2d_threshold(const GroundStateResult& result);

/// mu along the scaling curve from a known mu at (omega, c):
/// ((sqrt(omega) - tau) / sqrt(omega))^{4-d} mu.
double mu_on_curve(double mu, double omega, double tau, int d);

}  // namespace dnls
