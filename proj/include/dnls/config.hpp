#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dnls/evolution.hpp"
#include "dnls/functionals.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/grid.hpp"

namespace dnls {

struct GridConfig {
  int d = 1;
  std::array<std::size_t, 3> n{512, 1, 1};
  Vec3 extent{40.0, 1.0, 1.0};
  Grid make() const { return Grid(d, n, extent); }
};

/// Inputs of the individual subcommands.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  /// Field snapshot used instead of a fresh ground-state solve.
  std::string input;
  /// evolve: U0 = base + perturbation * v with v a seeded unit-H^1 field.
  double perturbation = 0.0;
  /// evolve: record the orbit distance to the base profile.
  bool track_orbit = true;
  /// mu-scan
  std::vector<double> omegas{0.5, 2.0, 4.0};
  Vec3 c0{0, 0, 0};
  /// h-curve: extra curve points besides the derivative stencil.
  std::vector<double> taus{};
  /// stability
  double delta = 1e-2;
  double eta_probe = 0.0;
  /// check: random states for the coercivity and well-equality samples.
  std::size_t samples = 200;
};

struct OutputConfig {
  std::string dir = "out";
};

struct RunConfig {
  PhysParams physics;
  WaveParams wave;
  GridConfig grid;
  SolverConfig solver;
  EvolveConfig evolve;
  ExperimentConfig experiment;
  OutputConfig output;
};

/// Parse a JSON document. Missing keys take their defaults and unknown keys
/// raise ParseError. With `check_admissible`, omega <= sigma|c|^2/4 raises
/// ValidationError.
RunConfig parse_config(const std::string& text, bool check_admissible = true);
RunConfig load_config(const std::string& path, bool check_admissible = true);

/// Fully defaulted JSON echo with sorted keys. The output directory is left
/// out so that runs differing only in where they write share one hash;
/// parse_config(echo) reproduces everything else.
std::string config_to_json(const RunConfig& cfg, int indent = 2);

/// Hex SHA-256 of the compact echo.
std::string config_hash(const RunConfig& cfg);

/// Structural validation; throws ValidationError naming the field.
void validate(const RunConfig& cfg, bool check_admissible);

}  // namespace dnls
