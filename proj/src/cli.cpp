#include "dnls/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnls/config.hpp"
#include "dnls/errors.hpp"
#include "dnls/evolution.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/log.hpp"
#include "dnls/parallel.hpp"
#include "dnls/random_fields.hpp"
#include "dnls/sampling.hpp"
#include "dnls/snapshot.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kToolVersion = "1.0.0";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json vec_json(const Vec3& v, int d) {
  ordered_json a = ordered_json::array();
  for (int k = 0; k < d; ++k) a.push_back(v[k]);
  return a;
}

ordered_json report_json(const FunctionalReport& r) {
  return {{"Q", r.Q},     {"L", r.L},     {"N", r.N},
          {"E", r.E},     {"P", vec_json(r.P, r.dim)},
          {"S", r.S},     {"K", r.K},     {"Lqc", r.Lqc},
          {"G", r.G},     {"G_display", r.G_display}};
}

ordered_json ground_state_json(const GroundStateResult& g) {
  const int d = g.phi.grid().dim();
  return {{"omega", g.wave.omega},
          {"c", vec_json(g.wave.c, d)},
          {"mu", g.mu},
          {"iterations", g.iterations},
          {"final_residual", g.final_residual},
          {"best_restart", g.best_restart},
          {"max_nehari_defect", g.max_nehari_defect},
          {"functionals", report_json(g.report)},
          {"pohozaev_residual", g.pohozaev_residual},
          {"identity_4minusd_residual", g.fourd_residual},
          {"stability_margin", g.stability_margin},
          {"tail_mass", g.tail_mass},
          {"domain_flag", g.domain_flag}};
}

int exit_code_for(const std::string& kind) {
  static const std::set<std::string> user{"ParseError",         "ValidationError",  "FormatError",
                                          "LengthMismatch",     "UnsupportedVersion", "IoError",
                                          "InvalidGrid",        "InvalidParameters", "InadmissibleParameters",
                                          "WrongDimension",     "GridMismatch",      "AxisOutOfRange"};
  return user.count(kind) ? kExitUserError : kExitFailure;
}

class Run {
 public:
  Run(RunConfig cfg, std::string subcommand) : cfg_(std::move(cfg)), sub_(std::move(subcommand)) {
    dir_ = cfg_.output.dir;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const RunConfig& cfg() const { return cfg_; }
  Grid grid() const { return cfg_.grid.make(); }
  int dim() const { return cfg_.grid.d; }

  void write_text(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + p.string() + "' failed");
    outputs_.push_back(name);
  }

  void write_json(const std::string& name, const ordered_json& j) { write_text(name, j.dump(2) + "\n"); }

  void write_field(const std::string& name, const State& U) {
    save_field(U, (dir_ / name).string());
    outputs_.push_back(name);
  }

  /// Base profile: the configured input snapshot, or a fresh ground-state solve.
  GroundStateResult base_profile() {
    const PhysParams& phys = cfg_.physics;
    const WaveParams& wave = cfg_.wave;
    if (cfg_.experiment.input.empty()) {
      GroundStateResult g = solve_ground_state(grid(), phys, wave, cfg_.solver);
      write_field("ground_state.ldsf", g.phi);
      return g;
    }
    State phi = load_field(cfg_.experiment.input);
    if (phi.grid() != grid())
      throw GridMismatch("input field '" + cfg_.experiment.input + "' does not live on the configured grid");
    GroundStateResult g(std::move(phi), phys, wave);
    g.report = action(g.phi, phys, wave);
    g.mu = g.report.S;
    g.pohozaev_residual = pohozaev_residual(g.report, wave);
    g.fourd_residual = identity_4minusd_residual(g.report, wave, g.mu);
    g.stability_margin = g.report.G / (2.0 * wave.omega);
    g.tail_mass = tail_mass(g.phi);
    g.domain_flag = g.tail_mass > 1e-8;
    g.max_nehari_defect = std::abs(g.report.K) / std::max(1.0, g.report.Lqc);
    return g;
  }

  void finish(double seconds) {
    ordered_json m;
    m["tool"] = "dnlslab";
    m["tool_version"] = kToolVersion;
    m["subcommand"] = sub_;
    m["config_sha256"] = config_hash(cfg_);
    m["seeds"] = {{"solver", cfg_.solver.seed}, {"experiment", cfg_.experiment.seed}};
    m["field_format_version"] = kFieldFormatVersion;
    m["threads"] = max_threads();
    m["outputs"] = outputs_;
    m["wall_clock_seconds"] = seconds;
    write_text("manifest.json", m.dump(2) + "\n");
  }

 private:
  RunConfig cfg_;
  std::string sub_;
  fs::path dir_;
  std::vector<std::string> outputs_;
};

int cmd_gs(Run& run) {
  const GroundStateResult g = solve_ground_state(run.grid(), run.cfg().physics, run.cfg().wave, run.cfg().solver);
  run.write_field("ground_state.ldsf", g.phi);
  run.write_json("ground_state.json", ground_state_json(g));
  return kExitOk;
}

int cmd_evolve(Run& run) {
  const RunConfig& c = run.cfg();
  const int d = run.dim();
  const State base = run.base_profile().phi;
  State U0 = base;
  if (c.experiment.perturbation > 0.0) {
    State v = smooth_random_state(base.grid(), c.experiment.seed);
    remove_nyquist(v);
    U0.axpy(c.experiment.perturbation / norm_h1(v), v);
  }
  Monitors mon;
  if (c.experiment.track_orbit) mon.orbit_reference = &base;
  const Evolution ev = evolve(U0, c.physics, c.wave, c.evolve, mon);
  const EvolutionTrace& tr = ev.trace;

  std::ostringstream csv;
  csv << "t,Q,E";
  for (int k = 0; k < d; ++k) csv << ",P_" << (k + 1);
  csv << ",S,K,h1norm";
  if (mon.orbit_reference) csv << ",orbit_dist";
  csv << "\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    csv << num(tr.times[i]) << ',' << num(tr.Q[i]) << ',' << num(tr.E[i]);
    for (int k = 0; k < d; ++k) csv << ',' << num(tr.P[i][k]);
    csv << ',' << num(tr.S[i]) << ',' << num(tr.K[i]) << ',' << num(tr.h1_norm[i]);
    if (mon.orbit_reference) csv << ',' << num(tr.orbit_distance[i]);
    csv << "\n";
  }
  run.write_text("trace.csv", csv.str());
  run.write_field("final.ldsf", ev.final_state);

  const Drift dr = conservation_drift(tr);
  ordered_json s;
  const double dt = c.evolve.resolved_dt(run.grid());
  const double steps = std::ceil(c.evolve.T_final / dt - 1e-9);
  s["dt"] = steps > 0.0 ? c.evolve.T_final / steps : dt;
  s["T_final"] = c.evolve.T_final;
  s["records"] = tr.size();
  s["diverged"] = tr.diverged;
  if (tr.diverged) s["divergence_time"] = tr.divergence_time;
  s["drift"] = {{"Q", dr.Q}, {"E", dr.E}, {"P", vec_json(dr.P, d)}, {"P_abs", vec_json(dr.P_abs, d)}};
  if (mon.orbit_reference && !tr.orbit_distance.empty())
    s["sup_orbit_distance"] = *std::max_element(tr.orbit_distance.begin(), tr.orbit_distance.end());
  run.write_json("summary.json", s);
  return kExitOk;
}

int cmd_check(Run& run) {
  const RunConfig& c = run.cfg();
  const GroundStateResult g = run.base_profile();
  const ReportIdentities ids = report_identities(g.report);
  ordered_json checks = ordered_json::array();
  bool all = true;
  auto add = [&](const std::string& name, double value, double bound, bool pass) {
    checks.push_back({{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
    all = all && pass;
  };
  add("nehari_K", std::abs(g.report.K), 1e-8, std::abs(g.report.K) < 1e-8);
  add("pohozaev", g.pohozaev_residual, 1e-6, g.pohozaev_residual < 1e-6);
  add("identity_4minusd", g.fourd_residual, 1e-6, g.fourd_residual < 1e-6);
  add("identity_S_K_Lqc", ids.S_from_K_Lqc, 1e-13, ids.S_from_K_Lqc < 1e-13);
  add("identity_N_S_Lqc", ids.N_from_S_Lqc, 1e-13, ids.N_from_S_Lqc < 1e-13);

  const CoercivitySample co = coercivity_sample(g.phi.grid(), c.physics, c.wave, c.experiment.samples, c.experiment.seed);
  add("coercivity_min_coeff", co.cert.min_coeff, 0.0, co.cert.min_coeff > 0.0);
  add("coercivity_nonpositive_Lqc", static_cast<double>(co.nonpositive), 0.0, co.nonpositive == 0);

  const WellSampleReport we = well_equality_sample(g, c.experiment.samples, c.experiment.seed);
  add("well_disagreements", static_cast<double>(we.disagreements), 0.0, we.disagreements == 0 && we.outside == 0);

  ordered_json j;
  j["profile"] = ground_state_json(g);
  j["checks"] = checks;
  j["coercivity"] = {{"A", {co.cert.A1, co.cert.A2, co.cert.A3}},
                     {"coefficients", co.cert.coeffs},
                     {"samples", co.samples},
                     {"min_ratio", co.min_ratio},
                     {"max_split_error", co.max_split_error}};
  j["wells"] = {{"samples", we.samples},
                {"Aplus", we.aplus},
                {"Aminus", we.aminus},
                {"disagreements", we.disagreements},
                {"outside", we.outside}};
  const StabilityMargin sm = stability_margin(g, c.experiment.eta_probe);
  j["stability_margin"] = {{"margin", sm.margin}, {"in_Mstar", sm.in_Mstar}, {"eta_probe", c.experiment.eta_probe}};
  if (run.dim() == 2 && c.wave.c_norm2() == 0.0) {
    j["gwp2d"] = {{"threshold", gwp2d_threshold(g)},
                  {"E_over_L", std::abs(g.report.E) / g.report.L}};
  }
  j["passed"] = all;
  run.write_json("check.json", j);
  return all ? kExitOk : kExitFailure;
}

int cmd_mu_scan(Run& run) {
  const RunConfig& c = run.cfg();
  const int d = run.dim();
  const MuScalingReport r = mu_scaling_check(run.grid(), c.physics, c.experiment.c0, c.experiment.omegas, c.solver);
  std::ostringstream csv;
  csv << "omega";
  for (int k = 0; k < d; ++k) csv << ",c_" << (k + 1);
  csv << ",mu,mu_predicted,rel_error,charge_scaling_error,action_scaling_error,iterations\n";
  for (const auto& p : r.points) {
    csv << num(p.omega);
    for (int k = 0; k < d; ++k) csv << ',' << num(p.c[k]);
    csv << ',' << num(p.mu) << ',' << num(p.mu_predicted) << ',' << num(p.rel_error) << ','
        << num(p.charge_scaling_error) << ',' << num(p.action_scaling_error) << ',' << p.iterations << "\n";
  }
  run.write_text("mu_scan.csv", csv.str());
  double worst = 0.0;
  for (const auto& p : r.points) worst = std::max(worst, p.rel_error);
  run.write_json("mu_scan.json", {{"mu_reference", r.mu_reference}, {"max_rel_error", worst}});
  return kExitOk;
}

int cmd_h_curve(Run& run) {
  const RunConfig& c = run.cfg();
  const int d = run.dim();
  const HCurveReport r = h_curve(run.grid(), c.physics, c.wave, c.experiment.taus, c.solver);
  std::ostringstream csv;
  csv << "tau,omega";
  for (int k = 0; k < d; ++k) csv << ",c_" << (k + 1);
  csv << ",mu,h_closed\n";
  for (const auto& p : r.points) {
    csv << num(p.tau) << ',' << num(p.omega);
    for (int k = 0; k < d; ++k) csv << ',' << num(p.c[k]);
    csv << ',' << num(p.mu) << ',' << num(p.h_closed) << "\n";
  }
  run.write_text("h_curve.csv", csv.str());
  run.write_json("h_curve.json", {{"tau0", r.tau0},
                                  {"h0", r.h0},
                                  {"mu_direct", r.mu_direct},
                                  {"h0_rel_error", r.h0_rel_error},
                                  {"h1_fd", r.h1_fd},
                                  {"h1_closed", r.h1_closed},
                                  {"h1_rel_error", r.h1_rel_error},
                                  {"h2_fd", r.h2_fd},
                                  {"h2_closed", r.h2_closed},
                                  {"h2_rel_error", r.h2_rel_error}});
  return kExitOk;
}

int cmd_stability(Run& run) {
  const RunConfig& c = run.cfg();
  const int d = run.dim();
  const GroundStateResult g = run.base_profile();
  StabilityConfig sc;
  sc.delta = c.experiment.delta;
  sc.seed = c.experiment.seed;
  sc.evolve = c.evolve;
  const StabilityReport r = stability_experiment(g, sc);
  const EvolutionTrace& tr = r.trace;
  std::ostringstream csv;
  csv << "t,orbit_dist,orbit_dist_lambda,Q,S,K,sandwich\n";
  for (std::size_t i = 0; i < tr.size(); ++i)
    csv << num(tr.times[i]) << ',' << num(tr.orbit_distance[i]) << ',' << num(r.distance_lambda[i]) << ','
        << num(tr.Q[i]) << ',' << num(tr.S[i]) << ',' << num(tr.K[i]) << ',' << (r.sandwich[i] ? 1 : 0) << "\n";
  run.write_text("stability.csv", csv.str());
  ordered_json j;
  j["delta"] = r.delta;
  j["seed"] = r.seed;
  j["mu"] = r.mu;
  j["tau0"] = r.tau0;
  j["omega_plus"] = r.omega_plus;
  j["omega_minus"] = r.omega_minus;
  j["c_plus"] = vec_json(r.c_plus, d);
  j["c_minus"] = vec_json(r.c_minus, d);
  j["mu_plus"] = r.mu_plus;
  j["mu_minus"] = r.mu_minus;
  j["shrink"] = r.shrink;
  j["threshold"] = r.threshold;
  j["initial_in_sandwich"] = r.initial_in_sandwich;
  j["sandwich_fraction"] = r.sandwich_fraction;
  j["initial_distance"] = r.initial_distance;
  j["sup_distance"] = r.sup_distance;
  j["sup_distance_lambda"] = r.sup_distance_lambda;
  j["bounded_by_10_delta"] = r.sup_distance < 10.0 * r.delta;
  j["initial_K_sign"] = r.initial_K_sign;
  j["K_sign_constant"] = r.K_sign_constant;
  j["diverged"] = tr.diverged;
  run.write_json("stability.json", j);
  return kExitOk;
}

int cmd_decay(Run& run) {
  const RunConfig& c = run.cfg();
  const GroundStateResult g = run.base_profile();
  const DecayReport r = decay_rate_fit(g.phi, c.physics, c.wave);
  run.write_json("decay.json", {{"rates", r.rates},
                                {"fit_residual", r.fit_residual},
                                {"min_rate", r.min_rate},
                                {"p_max", r.p_max},
                                {"half_bound", r.half_bound},
                                {"rate_over_half_bound", r.min_rate / r.half_bound},
                                {"window", {r.window_lo, r.window_hi}}});
  return kExitOk;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, const std::string& sub) {
  ordered_json e{{"error", kind}, {"message", message}};
  if (!sub.empty()) e["subcommand"] = sub;
  err << e.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ground states and dynamics of a three-component derivative NLS system"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string field;
  unsigned threads = 1;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override solver.seed and experiment.seed");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--threads", threads, "Worker threads for solver scans")->check(CLI::Range(1u, 256u));
  app.add_flag("--quiet", quiet, "Suppress warnings");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(Run&);
  };
  const std::vector<Sub> subs{
      {"gs", "Solve for the ground state", cmd_gs},
      {"evolve", "Evolve a (perturbed) profile and record conserved quantities", cmd_evolve},
      {"check", "Identity, coercivity and potential-well diagnostics", cmd_check},
      {"mu-scan", "Ground-state level against the frequency scaling law", cmd_mu_scan},
      {"h-curve", "Level derivatives along the scaling curve", cmd_h_curve},
      {"stability", "Orbital-stability experiment", cmd_stability},
      {"decay", "Exponential decay rate of the ground state", cmd_decay},
  };
  for (const auto& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    if (std::string(s.name) == "check" || std::string(s.name) == "evolve" || std::string(s.name) == "stability" ||
        std::string(s.name) == "decay")
      sc->add_option("--field", field, "Use this field snapshot instead of solving");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what(), "");
    return kExitUserError;
  }

  const auto* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  const auto& sub = *std::find_if(subs.begin(), subs.end(), [&](const Sub& s) { return name == s.name; });
  const auto start = std::chrono::steady_clock::now();
  try {
    log::set_quiet(quiet);
    set_max_threads(threads);
    RunConfig cfg = config_path.empty() ? parse_config("{}", false) : load_config(config_path, false);
    if (seed) {
      cfg.solver.seed = *seed;
      cfg.experiment.seed = *seed;
    }
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (!field.empty()) cfg.experiment.input = field;
    validate(cfg, !(name == "evolve" && !cfg.experiment.input.empty()));
    Run run(cfg, name);
    run.write_text("config.json", config_to_json(cfg) + "\n");
    const int code = sub.fn(run);
    run.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return code;
  } catch (const NoConvergence& e) {
    report_error(err, e.kind(), e.what(), name);
    return kExitFailure;
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what(), name);
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what(), name);
    return kExitFailure;
  }
}

}  // namespace dnls
