#include "dnls/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dnls/errors.hpp"

namespace dnls {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that any
// leftover key can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError("'" + path_ + "' must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ParseError("key '" + name(key) + "': " + e.what());
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, name(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ParseError("unknown key '" + name(key) + "'");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Reads a d-vector stored as a JSON array of length d.
template <class T>
void get_axes(Section& s, const std::string& key, int d, std::array<T, 3>& out) {
  if (!s.has(key)) {
    s.get(key, out);  // marks the key as seen
    return;
  }
  std::vector<T> v;
  s.get(key, v);
  if (static_cast<int>(v.size()) != d)
    throw ValidationError("field '" + s.name(key) + "': expected " + std::to_string(d) + " entries, got " +
                          std::to_string(v.size()));
  for (int k = 0; k < d; ++k) out[k] = v[k];
}

std::size_t default_points(int d) { return d == 1 ? 512 : (d == 2 ? 128 : 64); }
double default_extent(int d) { return d == 1 ? 40.0 : (d == 2 ? 30.0 : 20.0); }

json axes_json(const auto& a, int d) {
  json arr = json::array();
  for (int k = 0; k < d; ++k) arr.push_back(a[k]);
  return arr;
}

Scheme parse_scheme(const std::string& s, const std::string& field) {
  if (s == "strang") return Scheme::strang;
  if (s == "if_rk4") return Scheme::if_rk4;
  throw ValidationError("field '" + field + "': unknown scheme '" + s + "' (strang or if_rk4)");
}

json to_json_value(const RunConfig& c) {
  const int d = c.grid.d;
  json j;
  j["physics"] = {{"alpha", c.physics.alpha}, {"beta", c.physics.beta}, {"gamma", c.physics.gamma}};
  j["wave"] = {{"omega", c.wave.omega}, {"c", axes_json(c.wave.c, d)}};
  j["grid"] = {{"d", d}, {"n", axes_json(c.grid.n, d)}, {"extent", axes_json(c.grid.extent, d)}};
  const AnsatzConfig& a = c.solver.ansatz;
  j["solver"] = {{"max_iter", c.solver.max_iter},
                 {"residual_tol", c.solver.residual_tol},
                 {"step_size", c.solver.step_size},
                 {"seed", c.solver.seed},
                 {"restarts", c.solver.restarts},
                 {"restart_noise", c.solver.restart_noise},
                 {"ansatz",
                  {{"amplitude", a.amplitude},
                   {"width", a.width},
                   {"carrier", a.carrier},
                   {"flip_u3", a.flip_u3},
                   {"center", axes_json(a.center, d)}}}};
  j["evolve"] = {{"dt", c.evolve.dt},
                 {"T_final", c.evolve.T_final},
                 {"record_stride", c.evolve.record_stride},
                 {"scheme", c.evolve.scheme == Scheme::strang ? "strang" : "if_rk4"},
                 {"dealias", c.evolve.dealias}};
  const ExperimentConfig& e = c.experiment;
  j["experiment"] = {{"seed", e.seed},
                     {"input", e.input},
                     {"perturbation", e.perturbation},
                     {"track_orbit", e.track_orbit},
                     {"omegas", e.omegas},
                     {"c0", axes_json(e.c0, d)},
                     {"taus", e.taus},
                     {"delta", e.delta},
                     {"eta_probe", e.eta_probe},
                     {"samples", e.samples}};
  return j;
}

}  // namespace

void validate(const RunConfig& cfg, bool check_admissible) {
  try {
    (void)cfg.grid.make();
  } catch (const InvalidGrid& e) {
    throw ValidationError(std::string("field 'grid': ") + e.what());
  }
  try {
    cfg.physics.validate();
    cfg.solver.validate();
    cfg.evolve.validate();
  } catch (const InvalidParameters& e) {
    throw ValidationError(e.what());
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(cfg.wave.omega)) throw ValidationError("field 'wave.omega': must be finite");
  for (double v : cfg.wave.c)
    if (!finite(v)) throw ValidationError("field 'wave.c': must be finite");
  if (!(cfg.experiment.delta >= 0.0)) throw ValidationError("field 'experiment.delta': must be nonnegative");
  if (!(cfg.experiment.perturbation >= 0.0))
    throw ValidationError("field 'experiment.perturbation': must be nonnegative");
  for (double w : cfg.experiment.omegas)
    if (!(w > 0.0)) throw ValidationError("field 'experiment.omegas': entries must be positive");
  if (cfg.experiment.samples == 0) throw ValidationError("field 'experiment.samples': must be at least 1");
  if (check_admissible && !admissible(cfg.physics, cfg.wave)) {
    std::ostringstream os;
    os << "field 'wave.omega': omega=" << cfg.wave.omega << " must exceed sigma|c|^2/4="
       << cfg.physics.sigma() * cfg.wave.c_norm2() / 4.0;
    throw ValidationError(os.str());
  }
}

RunConfig parse_config(const std::string& text, bool check_admissible) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  RunConfig c;
  Section top(root, "");

  Section grid = top.sub("grid");
  grid.get("d", c.grid.d);
  if (c.grid.d < 1 || c.grid.d > 3) throw ValidationError("field 'grid.d': must be 1, 2 or 3");
  const int d = c.grid.d;
  c.grid.n = {1, 1, 1};
  c.grid.extent = {1.0, 1.0, 1.0};
  for (int k = 0; k < d; ++k) {
    c.grid.n[k] = default_points(d);
    c.grid.extent[k] = default_extent(d);
  }
  get_axes(grid, "n", d, c.grid.n);
  get_axes(grid, "extent", d, c.grid.extent);
  grid.finish();

  Section phys = top.sub("physics");
  phys.get("alpha", c.physics.alpha);
  phys.get("beta", c.physics.beta);
  phys.get("gamma", c.physics.gamma);
  phys.finish();

  Section wave = top.sub("wave");
  wave.get("omega", c.wave.omega);
  get_axes(wave, "c", d, c.wave.c);
  wave.finish();

  Section solver = top.sub("solver");
  solver.get("max_iter", c.solver.max_iter);
  solver.get("residual_tol", c.solver.residual_tol);
  solver.get("step_size", c.solver.step_size);
  solver.get("seed", c.solver.seed);
  solver.get("restarts", c.solver.restarts);
  solver.get("restart_noise", c.solver.restart_noise);
  Section ansatz = solver.sub("ansatz");
  ansatz.get("amplitude", c.solver.ansatz.amplitude);
  ansatz.get("width", c.solver.ansatz.width);
  ansatz.get("carrier", c.solver.ansatz.carrier);
  ansatz.get("flip_u3", c.solver.ansatz.flip_u3);
  get_axes(ansatz, "center", d, c.solver.ansatz.center);
  ansatz.finish();
  solver.finish();

  Section evolve = top.sub("evolve");
  evolve.get("dt", c.evolve.dt);
  evolve.get("T_final", c.evolve.T_final);
  evolve.get("record_stride", c.evolve.record_stride);
  std::string scheme = "strang";
  evolve.get("scheme", scheme);
  c.evolve.scheme = parse_scheme(scheme, "evolve.scheme");
  evolve.get("dealias", c.evolve.dealias);
  evolve.finish();

  Section exp = top.sub("experiment");
  exp.get("seed", c.experiment.seed);
  exp.get("input", c.experiment.input);
  exp.get("perturbation", c.experiment.perturbation);
  exp.get("track_orbit", c.experiment.track_orbit);
  exp.get("omegas", c.experiment.omegas);
  get_axes(exp, "c0", d, c.experiment.c0);
  exp.get("taus", c.experiment.taus);
  exp.get("delta", c.experiment.delta);
  exp.get("eta_probe", c.experiment.eta_probe);
  exp.get("samples", c.experiment.samples);
  exp.finish();

  Section out = top.sub("output");
  out.get("dir", c.output.dir);
  out.finish();

  top.finish();
  validate(c, check_admissible);
  return c;
}

RunConfig load_config(const std::string& path, bool check_admissible) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), check_admissible);
}

std::string config_to_json(const RunConfig& cfg, int indent) { return to_json_value(cfg).dump(indent); }

std::string config_hash(const RunConfig& cfg) {
  const std::string text = config_to_json(cfg, -1);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace dnls
