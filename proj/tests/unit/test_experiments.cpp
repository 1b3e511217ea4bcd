#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "backpar/error.hpp"
#include "backpar/experiments.hpp"

using namespace backpar;

TEST_CASE("rate fits") {
  const auto f = fit_rate({{1e-1, 1e-2}, {1e-2, 1e-4}, {1e-3, 1e-6}});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(fit_rate({{1e-1, 3.0}, {1e-2, 3.0}, {1e-3, 3.0}}).slope == doctest::Approx(0.0).epsilon(1e-12));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<std::pair<double, double>> pts;
  for (double d = 1e-1; d > 1e-6; d /= 3.0) pts.emplace_back(d, std::pow(d, 1.5) * (1.0 + 0.1 * n01(rng)));
  CHECK(std::abs(fit_rate(pts).slope - 1.5) < 0.2);
  CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.01, 0.0}, {0.001, 1.0}}), DomainError);
  CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.01, 2.0}}), DomainError);
}

TEST_CASE("CSV roundtrip and fixed schema") {
  MISEReport r;
  CHECK(report_csv(r) == std::string(kMiseHeader) + "\n");
  r.rows.push_back({"qr-clipped", 1e-3, 0.25, 50, 0.0123, 1e-5, 4.5e10, 0.04, 0.07});
  r.rows.push_back({"qr-clipped", 1e-4, 0.25, 50, 0.011, 1e-6, INFINITY, NAN, NAN});
  const auto csv = report_csv(r);
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) CHECK(std::count(line.begin(), line.end(), ',') == 8);
  const auto back = parse_report_text(csv);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0] == r.rows[0]);
  CHECK(std::isinf(back.rows[1].envelope));
  CHECK(std::isnan(back.rows[1].slope));

  const auto dir = std::filesystem::temp_directory_path() / "backpar_csv_test";
  std::filesystem::create_directories(dir);
  emit_report(r, (dir / "m.csv").string(), (dir / "s.txt").string(), {"case.name = gl3"});
  CHECK(parse_report((dir / "m.csv").string()).rows[0] == r.rows[0]);
  CHECK(std::filesystem::file_size(dir / "s.txt") > 0);
  CHECK_THROWS(emit_report(r, "/nonexistent/dir/m.csv"));
}

TEST_CASE("observe-only MISE matches delta^2 N") {
  const auto mc = registered_case("heat1");
  MethodConfig cfg;
  cfg.method = Method::ObserveOnly;
  cfg.observe_N = 16;
  const auto r = run_mise(mc, cfg, {1e-2}, {}, 500, 3, 2);
  REQUIRE(r.rows.size() == 1);
  CHECK(std::abs(r.rows[0].mise_mean - 1.6e-3) <= 3.0 * r.rows[0].mise_stderr);
}

TEST_CASE("MISE is independent of the worker count") {
  const auto mc = registered_case("gl3");
  MethodConfig cfg;
  cfg.clip_radius = 0.5;
  cfg.a = 1.0;
  const auto a = run_mise(mc, cfg, {1e-2, 1e-3, 1e-4}, {0.25}, 16, 9, 1);
  const auto b = run_mise(mc, cfg, {1e-2, 1e-3, 1e-4}, {0.25}, 16, 9, 4);
  CHECK(report_csv(a) == report_csv(b));
  CHECK_THROWS_AS(run_mise(mc, cfg, {1e-2}, {0.25}, 0, 9), DomainError);
}

TEST_CASE("naive backward diverges while truncation converges") {
  const auto mc = registered_case("heat1");
  MethodConfig naive;
  naive.method = Method::NaiveBackward;
  naive.b = 0.3;
  MethodConfig trunc = naive;
  trunc.method = Method::Truncation;
  const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  const auto rn = run_mise(mc, naive, deltas, {0.5}, 20, 1, 2);
  const auto rt = run_mise(mc, trunc, deltas, {0.5}, 20, 1, 2);
  REQUIRE(rn.failures.empty());
  CHECK(rn.rows[2].mise_mean > rn.rows[0].mise_mean);
  CHECK(rt.rows[2].mise_mean < rt.rows[0].mise_mean);
  CHECK(rn.rows[0].slope < 0.0);
  CHECK(rt.rows[0].slope > 0.0);
}

TEST_CASE("ill-posedness demo skips the degenerate delta") {
  const auto rows = illposed_demo(1.0, {1.0, 1e-1}, 20, 1, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].N_modes == 0);
  CHECK(rows[0].note.find("skipped") != std::string::npos);
  CHECK(rows[1].data_mean > 0.0);
  CHECK(illposed_csv(rows).find("solution_bound") != std::string::npos);
}

TEST_CASE("registered cases") {
  for (const auto& name : case_names()) {
    const auto c = case_spec(name);
    CHECK_FALSE(c.manufactured());
    CHECK(c.name == name);
  }
  CHECK_THROWS_AS(case_spec("nope"), DomainError);
  CHECK(method_from_name("qr-structural") == Method::QRStructural);
  try {
    method_from_name("tikhonov");
    FAIL("expected rejection");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("qr-clipped") != std::string::npos);
  }
}
