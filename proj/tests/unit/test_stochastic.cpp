#include <doctest.h>

#include <cmath>

#include "backpar/stochastic.hpp"

using namespace backpar;

namespace {

SpectralField g_two_modes() {
  DomainSpec d;
  const auto b = build_basis_fitting(d, 16);
  std::vector<double> c(16, 0.0);
  c[0] = 1.0;
  c[2] = 0.5;
  return SpectralField(b, c);
}

}  // namespace

TEST_CASE("noiseless observation copies the projection") {
  const auto g = g_two_modes();
  const auto o = observe_final(g, {0.0, 5, 1, 0});
  CHECK(o.data.size() == 5);
  for (std::size_t j = 0; j < 5; ++j) CHECK(o.data[j] == g[j]);
}

TEST_CASE("same seed and trial give identical observations") {
  const auto g = g_two_modes();
  const auto a = observe_final(g, {0.1, 16, 42, 7});
  const auto b = observe_final(g, {0.1, 16, 42, 7});
  const auto c = observe_final(g, {0.1, 16, 42, 8});
  bool differs = false;
  for (std::size_t j = 0; j < 16; ++j) {
    CHECK(a.data[j] == b.data[j]);
    differs = differs || a.data[j] != c.data[j];
  }
  CHECK(differs);
  CHECK(substream_seed(1, 2, Purpose::Observation) != substream_seed(1, 2, Purpose::Brownian));
}

TEST_CASE("noise energy matches delta^2 N") {
  const auto g = g_two_modes();
  const int trials = 1000;
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto o = observe_final(g, {0.01, 16, 99, static_cast<std::uint64_t>(t)});
    const double e = std::pow(norm(subtract(o.data, g), NormKind::l2()), 2);
    s += e;
    s2 += e * e;
  }
  const double mean = s / trials;
  const double se = std::sqrt((s2 / trials - mean * mean) / (trials - 1));
  CHECK(std::abs(mean - 1.6e-3) <= 3.0 * se);
  CHECK(mean <= mise_bound(0.01, 16, 1.0, norm(g, NormKind::sobolev(2.0)), 256.0) + 3.0 * se);
}

TEST_CASE("mise bound arithmetic") {
  CHECK(mise_bound(0.01, 16, 1.0, 1.0, 256.0) == doctest::Approx(0.0016153).epsilon(1e-4));
  CHECK(mise_bound(0.0, 16, 1.0, 2.0, 256.0) == doctest::Approx(4.0 / (256.0 * 256.0)));
  CHECK(mise_bound(0.1, 4, 0.0, 3.0, 16.0) == doctest::Approx(0.04 + 9.0));
}

TEST_CASE("Brownian paths start at zero and have variance T") {
  const auto p = brownian_path(2.0, 50, 5);
  CHECK(p.at(0.0) == 0.0);
  const auto q = brownian_path(2.0, 50, 5);
  CHECK(p.values == q.values);
  const int n = 10000;
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = brownian_path(2.0, 4, substream_seed(17, i, Purpose::Brownian)).at(2.0);
    s += v;
    s2 += v * v;
    s4 += v * v * v * v;
  }
  const double var = s2 / n;
  const double se = std::sqrt((s4 / n - var * var) / n);
  CHECK(std::abs(var - 2.0) <= 3.0 * se);
}

TEST_CASE("coefficient perturbation") {
  const auto a = Coefficient::constant(1.0);
  const auto psi = brownian_path(1.0, 20, 3);
  const auto same = perturb_coefficient(a, 0.0, psi, 2.0);
  CHECK(same.a({1.0, 0.0}, 0.4) == 1.0);
  const auto p = perturb_coefficient(a, 0.1, psi, 2.0);
  CHECK(p.valid);
  for (double t : {0.0, 0.3, 0.77, 1.0}) CHECK(p.b({1.0, 0.0}, t) == doctest::Approx(1.0 - 0.1 * psi.at(t)));
  // a large excursion pushes a_delta past M
  const BrownianPath big{{0.0, 1.0}, {0.0, 50.0}};
  CHECK_FALSE(perturb_coefficient(a, 0.1, big, 2.0).valid);
  const auto dflt = perturb_coefficient(a, 0.1, psi, 0.0);
  CHECK(dflt.M > 0.0);
}
