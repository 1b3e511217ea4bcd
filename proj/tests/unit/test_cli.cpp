#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "backpar/commands.hpp"
#include "backpar/error.hpp"

using namespace backpar;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("backpar_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config_text(
      "[case]\nname = gl3\n[method]\nname = qr-clipped\nc = 0.2\n[noise]\ndelta = 1e-2, 1e-3\ntrials = 7\n");
  CHECK(cfg.case_name == "gl3");
  CHECK(cfg.method_cfg.method == Method::QRClipped);
  CHECK(cfg.method_cfg.c == doctest::Approx(0.2));
  CHECK(cfg.deltas.size() == 2);
  CHECK(cfg.trials == 7);
}

TEST_CASE("config errors name the key") {
  auto key_of = [](const std::string& text) {
    try {
      build_case(parse_config_text(text));
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of("[case]\nu0 = 1\n") == "T");
  CHECK(key_of("[case]\nname = gl3\nbogus = 1\n") == "case.bogus");
  CHECK(key_of("[case]\nname = gl3\n[method]\nc = abc\n") == "method.c");
  CHECK(key_of("[case]\nname = gl3\n[extra]\nx = 1\n") == "extra");
  CHECK(key_of("[case]\nname = gl3\n[method]\nname = tikhonov\n") == "method.name");
}

TEST_CASE("unknown method lists the valid ones") {
  try {
    parse_config_text("[case]\nname = gl3\n[method]\nname = tikhonov\n");
    FAIL("expected rejection");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& m : method_names()) CHECK(msg.find(m) != std::string::npos);
  }
}

TEST_CASE("forward writes g = e^{-T} e_1 deterministically") {
  const auto dir = scratch("forward");
  const auto cfg_path = write_config(dir, "[case]\nu0 = 1\nT = 0.7\nsource = zero\n");
  std::ostringstream log, err;
  CommandOverrides o;
  o.config = cfg_path.string();
  o.out = (dir / "a").string();
  REQUIRE(run_command("forward", o, log, err) == kExitOk);
  const auto g = parse_config_text("[case]\nu0 = 1\nT = 0.7\n");
  const auto mc = build_case(g);
  CHECK(mc.g[0] == doctest::Approx(std::exp(-0.7)));
  o.out = (dir / "b").string();
  REQUIRE(run_command("forward", o, log, err) == kExitOk);
  CHECK(slurp(dir / "a" / "g.csv") == slurp(dir / "b" / "g.csv"));
  CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
}

TEST_CASE("missing T exits with the config status") {
  const auto dir = scratch("missing_t");
  CommandOverrides o;
  o.config = write_config(dir, "[case]\nu0 = 1\n").string();
  o.out = dir.string();
  std::ostringstream log, err;
  CHECK(run_command("forward", o, log, err) == kExitConfig);
  CHECK(err.str().find("'T'") != std::string::npos);
}

TEST_CASE("invert reports quasi-reversibility diagnostics") {
  const auto dir = scratch("invert");
  CommandOverrides o;
  o.config = write_config(dir,
                          "[case]\nname = gl3\n[method]\nname = qr-clipped\nc = 0.25\nm = 0.95\nM = 3\nk_rule = 0.05\n"
                          "[noise]\ndelta = 1e-3\n")
                 .string();
  o.out = dir.string();
  std::ostringstream log, err;
  REQUIRE(run_command("invert", o, log, err) == kExitOk);
  const auto diag = slurp(dir / "diagnostics.txt");
  for (const char* key : {"N = ", "beta = ", "R_delta = ", "K_R = "}) CHECK(diag.find(key) != std::string::npos);
  CHECK(fs::exists(dir / "reconstruction.csv"));
}

TEST_CASE("mise rejects zero trials") {
  const auto dir = scratch("mise0");
  CommandOverrides o;
  o.config = write_config(dir, "[case]\nname = gl3\n").string();
  o.out = dir.string();
  o.trials = 0;
  std::ostringstream log, err;
  CHECK(run_command("mise", o, log, err) == kExitConfig);
}

TEST_CASE("mise output depends only on config and seed") {
  const auto dir = scratch("mise");
  CommandOverrides o;
  o.config = write_config(dir, "[case]\nname = gl3\n[method]\nclip_radius = 0.5\na = 1\n[noise]\ndelta = 1e-2, 1e-3, 1e-4\n").string();
  o.trials = 12;
  o.seed = 5;
  std::ostringstream log, err;
  o.out = (dir / "a").string();
  o.threads = 1;
  REQUIRE(run_command("mise", o, log, err) == kExitOk);
  o.out = (dir / "b").string();
  o.threads = 3;
  REQUIRE(run_command("mise", o, log, err) == kExitOk);
  CHECK(slurp(dir / "a" / "mise.csv") == slurp(dir / "b" / "mise.csv"));
  CHECK(slurp(dir / "a" / "mise.csv").rfind(kMiseHeader, 0) == 0);
  CHECK(slurp(dir / "a" / "mise_summary.txt").find("case.name = gl3") != std::string::npos);
}

TEST_CASE("illposed emits both comparison columns") {
  const auto dir = scratch("illposed");
  CommandOverrides o;
  o.config = write_config(dir, "[illposed]\nT = 1\ndelta = 1e-1, 1e-2\n").string();
  o.out = dir.string();
  o.trials = 20;
  std::ostringstream log, err;
  run_command("illposed", o, log, err);
  const auto csv = slurp(dir / "illposed.csv");
  CHECK(csv.find("data_predicted") != std::string::npos);
  CHECK(csv.find("solution_bound") != std::string::npos);
}

TEST_CASE("validate passes on a clean build") {
  std::ostringstream log;
  CHECK(cmd_validate(log) == kExitOk);
  CHECK(log.str().find("FAIL") == std::string::npos);
}
