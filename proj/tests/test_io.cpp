#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dnls/cli.hpp"
#include "dnls/config.hpp"
#include "dnls/errors.hpp"
#include "dnls/snapshot.hpp"
#include "oracles.hpp"

using namespace dnls;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dnlslab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

State tiny_state() {
  const Grid g(1, {8, 1, 1}, {2.0, 1, 1});
  State U(g);
  for (std::size_t i = 0; i < 8; ++i) {
    U[0][0][i] = cplx(1.0 + static_cast<double>(i), -0.5);
    U[1][0][i] = cplx(0.25 * static_cast<double>(i), 0);
    U[2][0][i] = cplx(0, -static_cast<double>(i));
  }
  return U;
}

}  // namespace

TEST_CASE("config defaults and echo round trip") {
  const RunConfig c = parse_config("{}");
  CHECK(c.grid.d == 1);
  CHECK(c.grid.n[0] == 512);
  CHECK(c.grid.extent[0] == 40.0);
  CHECK(c.evolve.scheme == Scheme::strang);
  const RunConfig two = parse_config(R"({"grid": {"d": 2}, "wave": {"c": [0.3, 0]}})");
  CHECK(two.grid.n[1] == 128);
  CHECK(two.grid.extent[0] == 30.0);
  CHECK(two.wave.c[0] == 0.3);

  const RunConfig custom = parse_config(R"({"grid": {"d": 2, "n": [64, 32], "extent": [20, 10]},
    "physics": {"alpha": 2, "beta": 0.5, "gamma": 1.5}, "wave": {"omega": 3, "c": [0.1, -0.2]},
    "evolve": {"scheme": "if_rk4", "dt": 0.002, "T_final": 3, "dealias": true},
    "solver": {"seed": 9, "ansatz": {"carrier": true, "center": [1, 2]}},
    "experiment": {"omegas": [1, 2], "taus": [0.1], "samples": 7}})");
  const std::string echo = config_to_json(custom);
  const RunConfig again = parse_config(echo);
  CHECK(config_to_json(again) == echo);
  CHECK(config_hash(again) == config_hash(custom));
  CHECK(again.evolve.scheme == Scheme::if_rk4);
  CHECK(again.solver.ansatz.center[1] == 2.0);
  CHECK(config_hash(custom) != config_hash(parse_config("{}")));
  CHECK(config_hash(parse_config("{}")).size() == 64);
}

TEST_CASE("config errors name the offending field") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.kind() + ": " + e.what();
    }
    return std::string("no error");
  };
  CHECK(message(R"({"wave": {"omga": 1}})").find("ParseError: unknown key 'wave.omga'") == 0);
  CHECK(message(R"({"extra": 1})").find("unknown key 'extra'") != std::string::npos);
  CHECK(message(R"({"wave": {"omega": "fast"}})").find("ParseError: key 'wave.omega'") == 0);
  CHECK(message(R"({"grid": {"d": 2, "n": [64]}})").find("ValidationError: field 'grid.n'") == 0);
  CHECK(message(R"({"grid": {"n": [100]}})").find("ValidationError: field 'grid'") == 0);
  CHECK(message(R"({"evolve": {"scheme": "euler"}})").find("field 'evolve.scheme'") != std::string::npos);
  CHECK(message("{ not json").find("ParseError") == 0);
  CHECK(message(R"({"grid": {"d": 4}})").find("field 'grid.d'") != std::string::npos);
}

TEST_CASE("config rejects inadmissible frequencies") {
  // sigma = 1 for unit coefficients, so omega must exceed c^2 / 4.
  CHECK_THROWS_AS(parse_config(R"({"wave": {"omega": 1, "c": [2]}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"wave": {"omega": 0.25, "c": [1.0]}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"wave": {"omega": 0}})"), ValidationError);
  CHECK_NOTHROW(parse_config(R"({"wave": {"omega": 0.2501, "c": [1.0]}})"));
  CHECK_NOTHROW(parse_config(R"({"wave": {"omega": 0.25, "c": [1.0]}})", false));
}

TEST_CASE("snapshot golden bytes") {
  const auto bytes = encode_field(tiny_state());
  REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 8 + 3 * 8 * 16);
  const std::vector<unsigned char> header{'L', 'D', 'S', 'F', 1, 0, 0, 0, 1, 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0,
                                          0,   0,   0,   0,   0, 0, 0, 0x40};
  CHECK(std::equal(header.begin(), header.end(), bytes.begin()));
  // u1[0] = 1 - 0.5 i
  const std::vector<unsigned char> first{0, 0, 0, 0, 0, 0, 0xf0, 0x3f, 0, 0, 0, 0, 0, 0, 0xe0, 0xbf};
  CHECK(std::equal(first.begin(), first.end(), bytes.begin() + 28));
}

TEST_CASE("property: snapshots round-trip bit-exactly") {
  oracle::Gen gen(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = gen.integer(1, 3);
    std::array<std::size_t, 3> n{1, 1, 1};
    Vec3 L{1, 1, 1};
    for (int k = 0; k < d; ++k) {
      n[k] = std::size_t{8} << gen.integer(0, 2);
      L[k] = gen.uniform(1, 50);
    }
    const Grid g(d, n, L);
    State U(g);
    U.for_each_component([&](int, int, ScalarField& f) {
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = gen.cnormal() * std::pow(10.0, gen.uniform(-300, 300));
    });
    const State V = decode_field(encode_field(U));
    CHECK(V.grid() == g);
    CHECK(encode_field(V) == encode_field(U));
  }
  const fs::path dir = scratch_dir("snap");
  save_field(tiny_state(), (dir / "a.ldsf").string());
  CHECK(encode_field(load_field((dir / "a.ldsf").string())) == encode_field(tiny_state()));
  CHECK_THROWS_AS(load_field((dir / "missing.ldsf").string()), IoError);
}

TEST_CASE("snapshot decoding errors") {
  const auto good = encode_field(tiny_state());
  auto bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_field(bad), FormatError);
  bad = good;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_field(bad), UnsupportedVersion);
  bad = good;
  bad[8] = 5;
  CHECK_THROWS_AS(decode_field(bad), FormatError);
  bad = good;
  bad[12] = 12;  // 12 points is not a power of two
  CHECK_THROWS_AS(decode_field(bad), FormatError);
  bad = good;
  bad.pop_back();
  CHECK_THROWS_AS(decode_field(bad), LengthMismatch);
  CHECK_THROWS_AS(decode_field({good.begin(), good.begin() + 14}), LengthMismatch);
}

TEST_CASE("command line: argument and configuration errors exit with 2") {
  const fs::path dir = scratch_dir("cli_err");
  CHECK(cli({}).code == kExitUserError);
  CHECK(cli({"frobnicate"}).code == kExitUserError);
  CHECK(cli({"--help"}).code == kExitOk);
  write(dir / "typo.json", R"({"wave": {"omga": 2}})");
  const CliResult r = cli({"gs", "--config", (dir / "typo.json").string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitUserError);
  const auto rec = nlohmann::json::parse(r.err);
  CHECK(rec["error"] == "ParseError");
  CHECK(rec["message"].get<std::string>().find("wave.omga") != std::string::npos);
  write(dir / "inadmissible.json", R"({"wave": {"omega": 0.1, "c": [1]}})");
  CHECK(cli({"gs", "--config", (dir / "inadmissible.json").string(), "--out", (dir / "o").string()}).code ==
        kExitUserError);
  write(dir / "junk.ldsf", "not a field");
  const CliResult j = cli({"check", "--field", (dir / "junk.ldsf").string(), "--out", (dir / "o").string()});
  CHECK(j.code == kExitUserError);
  CHECK(nlohmann::json::parse(j.err)["error"] == "FormatError");
}

TEST_CASE("command line: outputs are byte-reproducible for a seed") {
  const fs::path dir = scratch_dir("cli_repro");
  write(dir / "cfg.json", R"({"grid": {"n": [256], "extent": [30]}, "evolve": {"T_final": 0.05},
    "experiment": {"perturbation": 0.05, "samples": 20}})");
  const std::string cfg = (dir / "cfg.json").string();
  for (const char* sub : {"gs", "evolve", "check"}) {
    const fs::path a = dir / (std::string(sub) + "_a"), b = dir / (std::string(sub) + "_b");
    REQUIRE(cli({sub, "--config", cfg, "--seed", "5", "--out", a.string(), "--quiet"}).code == kExitOk);
    REQUIRE(cli({sub, "--config", cfg, "--seed", "5", "--out", b.string(), "--threads", "2", "--quiet"}).code == kExitOk);
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") {
        auto ma = nlohmann::json::parse(slurp(entry.path())), mb = nlohmann::json::parse(slurp(b / name));
        CHECK(ma["config_sha256"] == mb["config_sha256"]);
        ma.erase("wall_clock_seconds");
        mb.erase("wall_clock_seconds");
        ma.erase("threads");
        mb.erase("threads");
        CHECK(ma == mb);
      } else {
        CHECK_MESSAGE(slurp(entry.path()) == slurp(b / name), sub << "/" << name);
      }
    }
  }
  const std::string c = dir / "gs_c";
  REQUIRE(cli({"evolve", "--config", cfg, "--seed", "6", "--out", c, "--quiet"}).code == kExitOk);
  CHECK(slurp(dir / "evolve_a" / "trace.csv") != slurp(fs::path(c) / "trace.csv"));
}

TEST_CASE("command line: trace layout and manifest") {
  const fs::path dir = scratch_dir("cli_trace");
  write(dir / "cfg.json", R"({"grid": {"n": [64], "extent": [24]}, "evolve": {"T_final": 0}})");
  REQUIRE(cli({"evolve", "--config", (dir / "cfg.json").string(), "--out", (dir / "o").string()}).code == kExitOk);
  const std::string trace = slurp(dir / "o" / "trace.csv");
  CHECK(trace.rfind("t,Q,E,P_1,S,K,h1norm,orbit_dist\n0,", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 2);
  const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
  CHECK(m["subcommand"] == "evolve");
  CHECK(m["field_format_version"] == kFieldFormatVersion);
  CHECK(m["seeds"]["solver"] == 0);
  const RunConfig echoed = parse_config(slurp(dir / "o" / "config.json"));
  CHECK(config_hash(echoed) == m["config_sha256"].get<std::string>());
  const State fin = load_field((dir / "o" / "final.ldsf").string());
  CHECK(fin.grid() == Grid(1, {64, 1, 1}, {24, 1, 1}));
}
