#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "backpar/error.hpp"
#include "backpar/spectral.hpp"

using namespace backpar;

namespace {

DomainSpec line(int n = 63) {
  DomainSpec d;
  d.grid = {n, 1};
  return d;
}

DomainSpec square(int n = 31) {
  DomainSpec d;
  d.dim = 2;
  d.grid = {n, n};
  return d;
}

}  // namespace

TEST_CASE("eigenvalues on the unit-pi interval and square") {
  const auto b = build_basis(line(), 5);
  CHECK(b->eigenvalue(0) == doctest::Approx(1.0));
  CHECK(b->eigenvalue(2) == doctest::Approx(9.0));
  const auto b2 = build_basis(square(), 6);
  CHECK(b2->mode(0) == ModeIndex{1, 1});
  CHECK(b2->eigenvalue(0) == doctest::Approx(2.0));
  // (1,2) and (2,1) tie at 5; the tuple order decides
  CHECK(b2->mode(1) == ModeIndex{1, 2});
  CHECK(b2->mode(2) == ModeIndex{2, 1});
}

TEST_CASE("eigenvalues match the 5-point Laplacian at fine resolution") {
  // the discrete eigenvalue of mode (1,1) is sum_i (4/h^2) sin^2(h/2)
  const double h = std::numbers::pi / 257;
  const double discrete = 2.0 * 4.0 / (h * h) * std::pow(std::sin(h / 2.0), 2);
  CHECK(discrete == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("capacity precondition rejects coarse grids") {
  CHECK_THROWS_AS(build_basis(line(8), 10), DomainError);
  const auto b = build_basis_fitting(line(8), 10);
  CHECK(b->domain().grid[0] >= 22);
}

TEST_CASE("synthesize evaluates the sine series at nodes") {
  const auto b = build_basis(line(63), 4);
  // node 31 of 63 sits at pi/2
  const auto e1 = synthesize(SpectralField::unit(b, 0, 4));
  CHECK(e1.values[31] == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
  const auto e2 = synthesize(SpectralField::unit(b, 1, 4));
  CHECK(std::abs(e2.values[31]) < 1e-15);
  const auto z = synthesize(SpectralField::zeros(b, 4));
  for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("analyze inverts synthesize and satisfies Parseval") {
  for (const auto& dom : {line(63), square(31)}) {
    const auto b = build_basis(dom, 12);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    std::vector<double> c(12);
    for (auto& x : c) x = n01(rng);
    const SpectralField f(b, c);
    const auto g = synthesize(f);
    const auto back = analyze(g, b, 12);
    double e = 0.0;
    for (std::size_t j = 0; j < 12; ++j) {
      CHECK(back[j] == doctest::Approx(c[j]).epsilon(1e-12));
      e += c[j] * c[j];
    }
    CHECK(g.norm_l2() * g.norm_l2() == doctest::Approx(e).epsilon(1e-10));
  }
}

TEST_CASE("analyze of a sampled sine recovers the unit vector") {
  const auto b = build_basis(line(63), 4);
  GridField g{b->domain(), {}};
  for (int i = 0; i < 63; ++i) g.values.push_back(std::sqrt(2.0 / std::numbers::pi) * std::sin(2.0 * b->domain().node(0, i)));
  const auto c = analyze(g, b, 4);
  CHECK(c[1] == doctest::Approx(1.0));
  CHECK(std::abs(c[0]) < 1e-14);
  GridField zero{b->domain(), std::vector<double>(63, 0.0)};
  const auto zc = analyze(zero, b, 4);
  for (double x : zc.coefficients()) CHECK(x == 0.0);
}

TEST_CASE("spectral cut-off keeps modes below alpha") {
  const auto b = build_basis(line(), 3);
  const SpectralField f(b, {1.0, 1.0, 1.0});
  const auto p = project_truncate(f, 5.0);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 1.0);
  CHECK(p[2] == 0.0);
  CHECK(project_truncate(f, 9.0)[2] == 1.0);
  const auto none = project_truncate(f, 0.0);
  for (double x : none.coefficients()) CHECK(x == 0.0);
}

TEST_CASE("quasi-reversibility multipliers") {
  // ln(1 + 0.1 e) and ln(0.1 + 1/e)
  CHECK(q_beta_multiplier(1.0, 0.1, 1.0, 1.0) == doctest::Approx(0.2404547).epsilon(1e-6));
  CHECK(p_beta_multiplier(1.0, 0.1, 1.0, 1.0) == doctest::Approx(-0.7595453).epsilon(1e-6));
  CHECK(q_beta_multiplier(1.0, 1e-300, 1.0, 1.0) < 1e-299);
  // no overflow for huge M T lambda
  CHECK(std::isfinite(q_beta_multiplier(1e6, 0.1, 1.0, 1.0)));
  CHECK(p_beta_admissibility_bound(1.0, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("operator bounds and the P = -M lambda + Q identity") {
  const auto b = build_basis(line(), 20);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  const double beta = 0.05, M = 1.5, T = 0.7;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> c(20);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = n01(rng) / (1.0 + j * j);
    const SpectralField f(b, c);
    const auto q = apply_q_beta(f, beta, M, T);
    const auto p = apply_p_beta(f, beta, M, T);
    CHECK(norm(q, NormKind::l2()) <= beta / T * norm(f, NormKind::gevrey(M * T)));
    CHECK(norm(p, NormKind::l2()) <= std::log(1.0 / beta) / T * norm(f, NormKind::l2()));
    for (std::size_t j = 0; j < 20; ++j) {
      const double expect = -M * b->eigenvalue(j) * c[j] + q[j];
      CHECK(p[j] == doctest::Approx(expect).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(apply_p_beta(SpectralField::unit(b, 0, 20), 0.9, 1.0, 1.0), DomainError);
}

TEST_CASE("norms of the first mode") {
  const auto b = build_basis(line(), 4);
  const auto e1 = SpectralField::unit(b, 0, 4);
  CHECK(norm(e1, NormKind::l2()) == doctest::Approx(1.0));
  CHECK(norm(e1, NormKind::sobolev(2.0)) == doctest::Approx(1.0));
  CHECK(norm(e1, NormKind::gevrey(1.0)) == doctest::Approx(std::exp(1.0)));
  // Gevrey sums past the double range report +inf, not nan
  const auto e4 = SpectralField::unit(b, 3, 4);
  CHECK(std::isinf(norm(e4, NormKind::gevrey(100.0))));
  CHECK(log_norm_squared(e4, NormKind::gevrey(100.0)) == doctest::Approx(2.0 * 100.0 * 16.0));
}
