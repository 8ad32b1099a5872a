// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnls/cli.hpp"
#include "dnls/config.hpp"
#include "dnls/errors.hpp"
#include "dnls/evolution.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/log.hpp"
#include "dnls/random_fields.hpp"
#include "dnls/sampling.hpp"
#include "dnls/snapshot.hpp"
#include "dnls/spectral.hpp"

using namespace dnls;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Grid kLine(1, {512, 1, 1}, {40, 1, 1});

SolverConfig solver_for(const WaveParams& wave) {
  SolverConfig s;
  s.ansatz.carrier = wave.c[0] != 0.0 || wave.c[1] != 0.0 || wave.c[2] != 0.0;
  return s;
}

GroundStateResult solve(const Grid& g, const WaveParams& wave) {
  return solve_ground_state(g, PhysParams{}, wave, solver_for(wave));
}

const GroundStateResult& line_ground_state() {
  static const GroundStateResult gs = solve(kLine, WaveParams{});
  return gs;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome identity_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (double c : {0.0, 0.5}) {
    const GroundStateResult gs = solve(kLine, WaveParams{1.0, {c, 0, 0}});
    const double ids = report_identities(gs.report).max();
    ok = ok && std::abs(gs.report.K) < 1e-8 && gs.pohozaev_residual < 1e-6 && gs.fourd_residual < 1e-6 && ids < 1e-13;
    detail += fmt("c=%g: |K|=%.2e poh=%.2e 4-d=%.2e ids=%.2e; ", c, std::abs(gs.report.K), gs.pohozaev_residual,
                  gs.fourd_residual, ids);
  }
  const double t = seconds_since(t0);
  return {ok && t < 120.0, detail + fmt("runtime %.1fs < 120s", t)};
}

Outcome mu_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const MuScalingReport one = mu_scaling_check(kLine, PhysParams{}, {0, 0, 0}, {0.5, 2.0, 4.0}, SolverConfig{});
  double worst1 = 0;
  for (const auto& p : one.points) worst1 = std::max(worst1, p.rel_error);
  const Vec3 c0{0.3, 0, 0};
  const MuScalingReport two =
      mu_scaling_check(Grid(2, {128, 128, 1}, {30, 30, 1}), PhysParams{}, c0, {2.0}, solver_for(WaveParams{1.0, c0}));
  const double worst2 = two.points.at(0).rel_error;
  const double t = seconds_since(t0);
  return {worst1 < 1e-3 && worst2 < 3e-3 && t < 600.0,
          fmt("d=1 max rel %.2e < 1e-3; d=2 rel %.2e < 3e-3; runtime %.1fs < 600s", worst1, worst2, t)};
}

Outcome planar_threshold() {
  // 128^2 points on a 30-wide box leave |E|/L near 4e-5 from discretization.
  const GroundStateResult gs = solve(Grid(2, {256, 256, 1}, {24, 24, 1}), WaveParams{});
  const double ratio = std::abs(gs.report.E) / gs.report.L;
  const double thr = gwp2d_threshold(gs);
  const double rel = std::abs(thr - gs.mu) / gs.mu;
  return {ratio < 1e-6 && rel < 1e-6, fmt("|E|/L=%.2e < 1e-6; threshold %.10g vs mu %.10g rel %.2e < 1e-6", ratio, thr,
                                          gs.mu, rel)};
}

Outcome coercivity() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Grid line(1, {256, 1, 1}, {40, 1, 1});
  const Grid plane(2, {32, 32, 1}, {20, 20, 1});
  double min_coeff = INFINITY, min_ratio = INFINITY;
  std::size_t nonpositive = 0, states = 0;
  for (int i = 0; i < 50; ++i) {
    const PhysParams phys{0.5 + 1.5 * unit(rng), 0.5 + 1.5 * unit(rng), 0.5 + 1.5 * unit(rng)};
    const double omega = 0.2 + 4.8 * unit(rng);
    const double cmax = 0.99 * 2.0 * std::sqrt(omega / phys.sigma());
    const double mag = (i % 5 == 0) ? cmax : cmax * unit(rng);
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const bool planar = i % 2 == 1;
    WaveParams wave{omega, {0, 0, 0}};
    if (planar) {
      wave.c = {mag * std::cos(angle), mag * std::sin(angle), 0};
    } else {
      wave.c[0] = angle < std::numbers::pi ? mag : -mag;
    }
    const CoercivitySample s = coercivity_sample(planar ? plane : line, phys, wave, 1000, 100 + i);
    min_coeff = std::min(min_coeff, s.cert.min_coeff);
    min_ratio = std::min(min_ratio, s.min_ratio);
    nonpositive += s.nonpositive;
    states += s.samples;
  }
  return {min_coeff > 0 && nonpositive == 0 && states == 50000,
          fmt("min certificate coefficient %.3e > 0; %zu states, %zu with Lqc <= 0, min Lqc/||U||^2 %.3e", min_coeff,
              states, nonpositive, min_ratio)};
}

Outcome well_equality() {
  const WellSampleReport r = well_equality_sample(line_ground_state(), 200, 11);
  return {r.samples == 200 && r.disagreements == 0 && r.outside == 0,
          fmt("%zu states (%zu in A+, %zu in A-), %zu disagreements, %zu at or above mu", r.samples, r.aplus, r.aminus,
              r.disagreements, r.outside)};
}

State perturbed_ground_state(const GroundStateResult& gs, double delta, std::uint64_t seed) {
  State v = smooth_random_state(gs.phi.grid(), seed);
  remove_nyquist(v);
  v *= 1.0 / norm_h1(v);
  return gs.phi + delta * v;
}

Outcome conservation() {
  const GroundStateResult& gs = line_ground_state();
  const State U0 = perturbed_ground_state(gs, 1e-2, 0);
  auto run = [&](double dt) {
    EvolveConfig cfg;
    cfg.dt = dt;
    cfg.T_final = 1.0;
    cfg.record_stride = 10;
    return conservation_drift(evolve(U0, gs.phys, gs.wave, cfg).trace);
  };
  const Drift a = run(1e-3), b = run(5e-4);
  const double ratio = a.E / b.E;
  const bool ok = a.Q < 1e-8 && a.E < 1e-8 && a.P[0] < 1e-8 && ratio >= 3.5 && ratio <= 4.5;
  return {ok, fmt("dt=1e-3: Q %.2e E %.2e P %.2e (each < 1e-8); dt=5e-4: E %.2e; E drift ratio %.3f in [3.5, 4.5]", a.Q,
                  a.E, a.P[0], b.E, ratio)};
}

Outcome solitary_wave_run() {
  const WaveParams wave{1.0, {0.5, 0, 0}};
  const GroundStateResult gs = solve(kLine, wave);
  EvolveConfig cfg;
  cfg.dt = 1e-3;
  cfg.T_final = 1.0;
  cfg.record_stride = 1000;
  const Evolution ev = evolve(gs.phi, gs.phys, wave, cfg);
  const double err = norm_h1(ev.final_state - solitary_wave(gs.phi, wave, 1.0)) / norm_h1(gs.phi);
  return {err < 1e-4, fmt("relative H1 error %.2e < 1e-4", err)};
}

Outcome orbital_stability() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (double c : {0.0, 0.2}) {
    const GroundStateResult gs = solve(kLine, WaveParams{1.0, {c, 0, 0}});
    StabilityConfig cfg;
    cfg.delta = 1e-2;
    cfg.evolve.dt = 1e-3;
    cfg.evolve.T_final = 50.0;
    cfg.evolve.record_stride = 100;
    const StabilityReport r = stability_experiment(gs, cfg);
    ok = ok && r.sup_distance < 10 * cfg.delta && r.K_sign_constant;
    detail += fmt("c=%g: sup dist %.3e < 1e-1, K sign %s; ", c, r.sup_distance,
                  r.K_sign_constant ? "constant" : "changes");
  }
  const double t = seconds_since(t0);
  return {ok && t < 900.0, detail + fmt("runtime %.1fs < 900s", t)};
}

Outcome scaling_curve() {
  const HCurveReport h = h_curve(kLine, PhysParams{}, WaveParams{}, {}, SolverConfig{});
  return {h.h1_rel_error < 0.02 && h.h2_rel_error < 0.05,
          fmt("h'(0) fd %.8g closed %.8g rel %.2e < 2e-2; h''(0) fd %.8g closed %.8g rel %.2e < 5e-2", h.h1_fd,
              h.h1_closed, h.h1_rel_error, h.h2_fd, h.h2_closed, h.h2_rel_error)};
}

Outcome decay() {
  const GroundStateResult& gs = line_ground_state();
  const DecayReport r = decay_rate_fit(gs.phi, gs.phys, gs.wave);
  State U(kLine);
  for (std::size_t i = 0; i < kLine.size(); ++i) {
    const double e = std::exp(-2.0 * std::abs(kLine.coordinate(0, i)));
    U[0][0][i] = e;
    U[1][0][i] = 0.5 * e;
    U[2][0][i] = cplx(0, 2) * e;
  }
  const DecayReport s = decay_rate_fit(U, PhysParams{}, WaveParams{});
  double worst = 0;
  for (double rate : s.rates) worst = std::max(worst, std::abs(rate - 2.0));
  return {r.min_rate >= 0.9 * r.half_bound && worst <= 1e-3,
          fmt("ground-state min rate %.4f >= %.4f; synthetic rates off by at most %.2e <= 1e-3", r.min_rate,
              0.9 * r.half_bound, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome infrastructure() {
  const State& phi = line_ground_state().phi;
  const fs::path dir = fs::temp_directory_path() / "dnlslab_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_field(phi, (dir / "phi.ldsf").string());
  const State back = load_field((dir / "phi.ldsf").string());
  bool exact = back.grid() == phi.grid();
  back.for_each_component([&](int j, int k, const ScalarField& f) {
    exact = exact && std::equal(f.values().begin(), f.values().end(), phi[j][k].values().begin());
  });

  int rejected = 0;
  for (const char* text : {R"({"wave": {"omega": 0.25, "c": [1]}})", R"({"wave": {"omega": 0.2, "c": [1]}})",
                           R"({"physics": {"alpha": 0.25}, "wave": {"omega": 0.5, "c": [1]}})",
                           R"({"grid": {"d": 2}, "wave": {"omega": 0.25, "c": [0.6, 0.8]}})"}) {
    try {
      parse_config(text);
    } catch (const ValidationError&) {
      ++rejected;
    }
  }
  bool accepts = true;
  try {
    parse_config(R"({"wave": {"omega": 0.2501, "c": [1]}})");
  } catch (const Error&) {
    accepts = false;
  }

  std::ofstream(dir / "cfg.json") << R"({"evolve": {"T_final": 0.1}, "experiment": {"samples": 50}})";
  std::size_t files = 0, differing = 0;
  bool runs_ok = true;
  for (const char* sub : {"gs", "evolve", "check", "decay"}) {
    std::vector<fs::path> outs;
    for (const char* tag : {"a", "b"}) {
      outs.push_back(dir / (std::string(sub) + "_" + tag));
      std::ostringstream out, err;
      runs_ok = runs_ok && run_cli({sub, "--config", (dir / "cfg.json").string(), "--seed", "3", "--out",
                                    outs.back().string(), "--quiet"},
                                   out, err) == kExitOk;
    }
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      ++files;
      const fs::path other = outs[1] / entry.path().filename();
      if (entry.path().filename() == "manifest.json") {
        auto ma = nlohmann::json::parse(slurp(entry.path())), mb = nlohmann::json::parse(slurp(other));
        ma.erase("wall_clock_seconds");
        mb.erase("wall_clock_seconds");
        differing += ma != mb;
      } else {
        differing += slurp(entry.path()) != slurp(other);
      }
    }
  }
  fs::remove_all(dir);
  return {exact && rejected == 4 && accepts && runs_ok && differing == 0,
          fmt("field round trip %s; %d/4 inadmissible configs rejected, boundary+ accepted %s; %zu output files, %zu "
              "differ between repeated seeded runs",
              exact ? "bit-exact" : "differs", rejected, accepts ? "yes" : "no", files, differing)};
}

}  // namespace

int main() {
  log::set_quiet(true);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"identity suite", identity_suite},
      {"mu scaling", mu_scaling},
      {"planar ground state threshold", planar_threshold},
      {"coercivity", coercivity},
      {"potential-well equality", well_equality},
      {"conservation", conservation},
      {"solitary-wave propagation", solitary_wave_run},
      {"orbital stability", orbital_stability},
      {"h-curve derivatives", scaling_curve},
      {"tail decay", decay},
      {"infrastructure", infrastructure},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const Error& e) {
      o = {false, e.kind() + ": " + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2zu %-30s %s  %s (%.1fs)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
