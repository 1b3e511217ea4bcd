#include <doctest.h>

#include <cmath>
#include <string>

#include "backpar/error.hpp"
#include "backpar/experiments.hpp"

using namespace backpar;

TEST_CASE("quasi-reversibility rule rejects inadmissible beta") {
  try {
    choose_params_qr(1e-4, 0.25, 0.5, 1.0, 1, 1.0, 1.0, 1.0);
    FAIL("expected rejection");
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("0.632") != std::string::npos);
  }
  const auto p = choose_params_qr(1e-4, 0.25, 0.5, 1.0, 1, 1.0, 1.0, 3.0);
  CHECK(p.N == 4);
  CHECK(p.beta == doctest::Approx(std::pow(4.0, -0.25)));
}

TEST_CASE("beta shrinks and N grows as delta decreases") {
  double prev_beta = 1.0, prev_ratio = 1e300;
  std::size_t prev_N = 0;
  for (double d : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const auto p = choose_params_qr(d, 0.25, 0.95, 1.0, 1, 1.0, 1.0, 3.0);
    CHECK(p.beta <= prev_beta);
    CHECK(p.N >= prev_N);
    const double ratio = d * std::sqrt(static_cast<double>(p.N)) / p.beta;
    CHECK(ratio < prev_ratio);
    prev_beta = p.beta, prev_N = p.N, prev_ratio = ratio;
  }
}

TEST_CASE("assembled reversed problem") {
  DomainSpec d;
  const auto b = build_basis_fitting(d, 4);
  const auto g = SpectralField(b, {0.3, 0.1, 0.0, 0.0});
  const auto obs = observe_final(g, {0.0, 4, 0, 0});
  const auto coeff = perturb_coefficient(Coefficient::constant(1.0), 0.0, {{0.0, 1.0}, {0.0, 0.0}}, 2.0);
  const auto p = choose_params_qr(1e-2, 0.25, 0.95, 1.0, 1, 1.0, 1.0, 2.0);
  SourceSpec s;
  s.name = "tlin";
  s.f = [](const Point&, double t, double u) { return t * u; };
  const auto ep = assemble_reversed(obs, coeff, p, s, {});
  CHECK(ep.diffusion({1.0, 0.0}, 0.3) == doctest::Approx(1.0));
  for (std::size_t j = 0; j < 4; ++j) {
    const double lam = b->eigenvalue(j);
    CHECK(ep.drift[j] == doctest::Approx(-std::log(p.beta + std::exp(-2.0 * lam)) / p.T));
    CHECK(ep.drift[j] <= std::log(1.0 / p.beta) / p.T + 1e-12);
  }
  CHECK(ep.source.eval({1.0, 0.0}, 0.25, 2.0) == doctest::Approx(-(0.75 * 2.0)));
}

TEST_CASE("linear reconstruction error decreases with beta") {
  const auto mc = registered_case("heat1");
  const auto coeff = perturb_coefficient(mc.a, 0.0, {{0.0, mc.T}, {0.0, 0.0}}, 2.0);
  const auto obs = observe_final(mc.g, {0.0, 4, 0, 0});
  double prev = 1e300;
  for (double beta : {1e-1, 1e-2, 1e-3}) {
    QRParams p;
    p.T = mc.T, p.M = 2.0, p.beta = beta, p.N = 4, p.c = 0.25, p.m = 0.5, p.delta = 0.01;
    const auto sol = solve_qr(obs, coeff, p, zero_source(), QRSourceMode::Clipped, {});
    const double e = error_report(sol.u, mc.reference, NormKind::l2(), {0.5})[0];
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("clip radius rule") {
  const auto p = choose_params_qr(1e-3, 0.25, 0.95, 1.0, 1, 0.05, 0.5, 3.0);
  const auto c = choose_clip_radius(ginzburg_landau(), p);
  const double bound = std::log(std::log(static_cast<double>(p.N))) / (0.05 * 0.5);
  CHECK(c.K_R <= bound * (1 + 1e-12));
  CHECK(1.0 + 3.0 * c.R * c.R == doctest::Approx(bound).epsilon(1e-9));
}

TEST_CASE("case comparison ratio") {
  const auto cmp = compare_clipped_structural(ginzburg_landau(), 0.0, {1e-2, 1e-3, 1e-4}, 0.25, 0.95, 1.0, 1, 0.05, 0.5, 3.0);
  CHECK(cmp.ratio_increasing);
  for (const auto& r : cmp.rows) CHECK(r.ratio == doctest::Approx(std::exp(2.0 * (r.K_R - r.gamma_bar) * 0.5)));
}

TEST_CASE("envelope at equal constants") {
  const auto p = choose_params_qr(1e-3, 0.25, 0.95, 1.0, 1, 0.05, 0.5, 3.0);
  QREnvelopeInputs in;
  in.lambda_N = 4.0;
  in.g_norm_h2gamma = 1.0;
  in.u_wmt_sup = 1.0;
  in.u_h1_sup = 1.0;
  in.b0 = 1.0;
  CHECK(qr_envelope(p, 0.25, 2.0, in) == doctest::Approx(qr_envelope(p, 0.25, 2.0, in)));
  CHECK(qr_envelope(p, 0.0, 0.0, in) == doctest::Approx(std::exp(0.5) * qr_constant(p, in)));
}
