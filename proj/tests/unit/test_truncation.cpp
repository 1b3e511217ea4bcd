#include <doctest.h>

#include <cmath>

#include "backpar/error.hpp"
#include "backpar/experiments.hpp"

using namespace backpar;

TEST_CASE("truncation parameter rule") {
  const auto p = choose_params_truncation(1e-4, 1.0, 1.0, 1.0, 1, 0.5, 0.5);
  CHECK(p.N == 100);
  CHECK(p.alpha == doctest::Approx(2.302585).epsilon(1e-6));
  CHECK(std::exp(p.k * p.T * p.alpha) == doctest::Approx(std::pow(100.0, p.a)));
  const auto q = choose_params_truncation(1e-8, 1.0, 1.0, 1.0, 1, 0.5, 0.5);
  CHECK(q.N > p.N);
  CHECK(q.alpha > p.alpha);
  CHECK_THROWS_AS(choose_params_truncation(0.01, 1.0, 1.0, 1.0, 1, 2.5, 0.5), DomainError);
}

TEST_CASE("ill-posed mode count") {
  const auto c = choose_N_illposed(std::exp(-1.0), 0.5);
  CHECK(c.raw == doctest::Approx(1.0));
  CHECK(c.modes == 1);
  CHECK(choose_N_illposed(1.0, 1.0).modes == 0);
  double prev = 1.0;
  for (double d : {1e-2, 1e-4, 1e-8}) {
    const double v = d * d * choose_N_illposed(d, 1.0).raw;
    CHECK(v < prev);
    prev = v;
  }
  // with the raw N, e^{2 T N^2} = 1/delta, so (2/5) delta^2 e^{2 T N^2} = (2/5) delta
  const double d = 1e-3, T = 1.0;
  const double N = choose_N_illposed(d, T).raw;
  CHECK(0.4 * d * d * std::exp(2.0 * T * N * N) == doctest::Approx(0.4 * d));
}

TEST_CASE("noiseless linear inversion recovers u0") {
  const auto mc = registered_case("heat1");
  const auto obs = observe_final(mc.g, {0.0, 8, 0, 0});
  const auto sol = solve_backward_truncated(obs, zero_source(), 10.0, mc.T);
  const auto err = error_report(sol.trajectory, mc.reference, NormKind::l2(), {0.0, 0.5});
  CHECK(err[0] < 1e-6);
  CHECK(err[1] < 1e-6);
  CHECK(sol.retained == 3);
}

TEST_CASE("F0 iteration contracts") {
  DomainSpec d;
  const auto b = build_basis_fitting(d, 3);
  const auto g = SpectralField(b, {0.1, -0.05, 0.02});
  const auto obs = observe_final(g, {0.01, 3, 4, 0});
  for (std::uint64_t s = 0; s < 5; ++s) {
    MildSolveConfig cfg;
    cfg.random_start = s;
    const auto r = solve_backward_truncated(obs, f0_source(1.0), b->eigenvalue(2), 1.0, cfg);
    CHECK_FALSE(r.ratios.empty());
    CHECK(r.max_ratio() <= 0.55);
  }
}

TEST_CASE("clipped Ginzburg-Landau error decreases with delta") {
  const auto mc = registered_case("gl3");
  const auto F = clip(mc.source, 1.0);
  std::vector<double> errs;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    const auto p = choose_params_truncation(delta, F.K_R, mc.T, 1.0, 1, 1.0, 0.5);
    double s = 0.0;
    for (std::uint64_t t = 0; t < 20; ++t) {
      DomainSpec od = mc.domain;
      const auto ob = build_basis_fitting(od, std::max(p.N, mc.g.size()));
      const auto obs = observe_final(mc.g.rebased(ob), {delta, p.N, 1, t});
      const auto sol = solve_backward_truncated(obs, F.as_source(), p);
      s += error_report(sol.trajectory, mc.reference, NormKind::l2(), {mc.T / 2})[0];
    }
    errs.push_back(s / 20);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
}

TEST_CASE("error report norms") {
  DomainSpec d;
  const auto b = build_basis_fitting(d, 3);
  Trajectory u, v;
  u.times = v.times = {0.0, 1.0};
  u.states = {SpectralField(b, {1.0, 2.0, 0.0}), SpectralField(b, {1.0, 2.0, 0.0})};
  v.states = u.states;
  CHECK(error_report(u, v, NormKind::l2(), {0.5})[0] == 0.0);
  v.states = {SpectralField(b, {1.1, 2.0, 0.0}), SpectralField(b, {1.1, 2.0, 0.0})};
  CHECK(error_report(u, v, NormKind::l2(), {0.5})[0] == doctest::Approx(0.1));
  CHECK(error_report(u, v, NormKind::sobolev(2.0), {0.5})[0] == doctest::Approx(0.1));
  v.states = {SpectralField(b, {1.0, 2.1, 0.3}), SpectralField(b, {1.0, 2.1, 0.3})};
  // weights lambda^p: 4^2 on mode 2, 9^2 on mode 3
  CHECK(error_report(u, v, NormKind::sobolev(2.0), {0.5})[0] ==
        doctest::Approx(std::sqrt(16.0 * 0.01 + 81.0 * 0.09)));
}

TEST_CASE("truncation envelope forms agree at T = 1") {
  const auto p = choose_params_truncation(1e-3, 1.0, 1.0, 1.0, 1, 0.5, 0.5);
  TruncationEnvelopeInputs in{static_cast<double>(p.N * p.N), 1.0, 1.0, 1.0};
  CHECK(truncation_envelope(p, 0.5, in, GronwallForm::Short) ==
        doctest::Approx(truncation_envelope(p, 0.5, in, GronwallForm::Long)));
  CHECK(truncation_envelope(p, 0.25, in) > truncation_envelope(p, 0.75, in));
}
