#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "dnls/functionals.hpp"
#include "dnls/grid.hpp"

namespace dnls {

struct GroundStateResult;

enum class Scheme { strang, if_rk4 };

/// Symmetries searched by orbit_distance: translations with Lambda alone, or
/// with the full two-torus of phases Lambda(theta) Gamma(psi).
enum class OrbitGroup { lambda, full };

/// Default time step: 1e-3 scaled by (min spacing / (40/512))^2, i.e. 1e-3 on
/// the reference 1-D grid and shrinking with the square of the spacing like
/// the stiffness of the coupling terms.
double default_dt(const Grid& g);

struct EvolveConfig {
  /// 0 selects default_dt(grid).
  double dt = 0.0;
  double T_final = 1.0;
  std::size_t record_stride = 1;
  Scheme scheme = Scheme::strang;
  /// 2/3-rule truncation of the coupling terms.
  bool dealias = false;
  void validate() const;
  double resolved_dt(const Grid& g) const { return dt > 0.0 ? dt : default_dt(g); }
};

/// Optional per-record diagnostics of evolve().
struct Monitors {
  /// Profile whose symmetry orbit is tracked by orbit_distance.
  const State* orbit_reference = nullptr;
  OrbitGroup orbit_group = OrbitGroup::full;
  /// Ground-state level for the A/B well flags; 0 disables them.
  double mu = 0.0;
  /// Called with every recorded state.
  std::function<void(double, const State&)> on_record;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> Q, E, S, K, h1_norm;
  std::vector<Vec3> P;
  std::vector<int> K_sign;
  std::vector<double> orbit_distance;
  std::vector<WellMembership> wells;
  /// (1/2) sum_j ||u_j|| ||grad u_j|| at the first record, an upper bound for |P_k|.
  double P_scale = 0.0;
  bool diverged = false;
  double divergence_time = 0.0;
  std::size_t size() const { return times.size(); }
};

struct Evolution {
  State final_state;
  EvolutionTrace trace;
};

/// Time derivative of the full system with spectral derivatives.
State rhs(const State& U, const PhysParams& phys, bool dealias = false);

/// Coupling part of rhs() alone. Its output carries no Nyquist modes.
State coupling_rhs(const State& U, bool dealias = false);

/// Exact flow of the decoupled linear system: exp(-i kappa_j |xi|^2 t) per mode.
State linear_propagator(const State& U, const PhysParams& phys, double t);

/// One step. Throws NonFinite(t_end) if the result overflows.
State step(const State& U, const PhysParams& phys, double dt, Scheme scheme, bool dealias = false, double t_end = 0);

Evolution evolve(const State& U0, const PhysParams& phys, const WaveParams& wave, const EvolveConfig& config,
                 const Monitors& monitors = {});

/// Largest |X(t) - X(0)| over the trace, relative to |X(0)|, or to
/// ||U0||_{H^1}^2 when |X(0)| is below 1e-6 of it.
/// max_t |X(t) - X(0)| relative to |X(0)|. Momentum components are measured
/// against P_scale since P(0) vanishes for resting waves; P_abs keeps the
/// unnormalized drift.
struct Drift {
  double Q = 0, E = 0;
  Vec3 P{0, 0, 0};
  Vec3 P_abs{0, 0, 0};
  double max() const;
};
Drift conservation_drift(const EvolutionTrace& trace);

/// Lambda(theta) U = (e^{2i theta} u1, e^{i theta} u2, e^{i theta} u3), optionally
/// composed with the second phase symmetry Gamma(psi) = (1, e^{i psi}, e^{-i psi}).
/// Both leave every functional and the flow invariant.
State gauge_apply(const State& U, double theta, double psi = 0.0);
/// Lambda(omega t) phi(x - c t).
State solitary_wave(const State& phi, const WaveParams& wave, double t);
/// Complex conjugation, which maps solutions to solutions run backwards in time.
State time_reverse(const State& U);

struct OrbitDistance {
  double dist = 0;
  Vec3 y_star{0, 0, 0};
  double theta_star = 0;
  double psi_star = 0;
};
/// Minimum over translations y and phases of ||U - Lambda(theta) Gamma(psi) phi(. - y)||_{H^1}
/// (psi fixed at 0 for OrbitGroup::lambda). Every such image of a minimizer is
/// a minimizer, so this bounds the distance to the minimizer set from above.
OrbitDistance orbit_distance(const State& U, const State& phi, OrbitGroup group = OrbitGroup::full);

struct StabilityConfig {
  double delta = 1e-2;
  std::uint64_t seed = 0;
  EvolveConfig evolve;
};

struct StabilityReport {
  double delta = 0;
  std::uint64_t seed = 0;
  double tau0 = 0;
  double omega_plus = 0, omega_minus = 0;
  Vec3 c_plus{0, 0, 0}, c_minus{0, 0, 0};
  double mu = 0, mu_plus = 0, mu_minus = 0;
  /// Radial factor that moved phi + delta v below the level mu with K > 0.
  double shrink = 1;
  /// Largest delta along v for which phi + delta v is in B+(omega_+) and B-(omega_-).
  double threshold = 0;
  bool initial_in_sandwich = false;
  double sandwich_fraction = 0;
  double initial_distance = 0;
  double sup_distance = 0;
  /// Same supremum with the Lambda-only orbit.
  double sup_distance_lambda = 0;
  std::vector<double> distance_lambda;
  int initial_K_sign = 0;
  bool K_sign_constant = true;
  std::vector<bool> sandwich;
  EvolutionTrace trace;
};

/// Membership of U in B+ at (omega_+, c_+) and B- at (omega_-, c_-).
bool in_sandwich(const State& U, const PhysParams& phys, const StabilityReport& levels);

/// Evolve a perturbed ground state and track its distance to the orbit.
StabilityReport stability_experiment(const GroundStateResult& gs, const StabilityConfig& config);

struct DecayReport {
  std::array<double, 3> rates{};
  std::array<double, 3> fit_residual{};
  double min_rate = 0;
  double p_max = 0;
  double half_bound = 0;
  double window_lo = 0, window_hi = 0;
};

/// Tail slope of log|phi_j| against |x| on [0.5, 0.9] of the half box,
/// averaged over radial shells of one grid spacing when d >= 2.
DecayReport decay_rate_fit(const State& phi, const PhysParams& phys, const WaveParams& wave);

}  // namespace dnls
