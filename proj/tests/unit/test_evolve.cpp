#include <doctest.h>

#include <cmath>

#include "backpar/error.hpp"
#include "backpar/evolve.hpp"

using namespace backpar;

namespace {

BasisPtr line_basis(std::size_t modes, int n = 32) {
  DomainSpec d;
  d.grid = {n, 1};
  return build_basis_fitting(d, modes);
}

}  // namespace

TEST_CASE("heat flow of the first mode") {
  EvolutionProblem p;
  p.initial = SpectralField::unit(line_basis(4), 0, 4);
  const auto tr = solve_forward(p);
  CHECK(tr.final_state()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == doctest::Approx(1.0));
}

TEST_CASE("grid-implicit scheme converges at first order in time") {
  EvolutionProblem p;
  p.initial = SpectralField::unit(line_basis(4, 63), 0, 4);
  p.scheme = DiffusionScheme::GridImplicit;
  std::vector<double> errs;
  for (std::size_t steps : {20, 40, 80}) {
    p.steps = steps;
    errs.push_back(std::abs(solve_forward(p).final_state()[0] - std::exp(-1.0)));
  }
  CHECK(errs[0] / errs[1] >= 1.8);
  CHECK(errs[1] / errs[2] >= 1.8);
}

TEST_CASE("pure drift is an exact integrating factor") {
  EvolutionProblem p;
  p.diffusion_enabled = false;
  p.drift = {0.5, -1.0, 0.25};
  p.initial = SpectralField(line_basis(3), {1.0, 2.0, -1.0});
  p.T = 2.0;
  const auto v = solve_forward(p).final_state();
  CHECK(v[0] == doctest::Approx(std::exp(1.0)));
  CHECK(v[1] == doctest::Approx(2.0 * std::exp(-2.0)));
  CHECK(v[2] == doctest::Approx(-std::exp(0.5)));
}

TEST_CASE("Ginzburg-Landau stays inside [-1, 1]") {
  EvolutionProblem p;
  p.source = ginzburg_landau();
  p.initial = SpectralField(line_basis(8, 64), {0.5, 0.2, 0.1, 0, 0, 0, 0, 0});
  p.T = 2.0;
  p.steps = 400;
  for (const auto& s : solve_forward(p).states) {
    for (double v : synthesize(s).values) CHECK(std::abs(v) <= 1.0 + 1e-8);
  }
}

TEST_CASE("blow-up guard") {
  EvolutionProblem p;
  p.diffusion_enabled = false;
  p.drift = {40.0};
  p.initial = SpectralField(line_basis(1), {1.0});
  CHECK_THROWS_AS(solve_forward(p), DivergenceError);
}

TEST_CASE("exact propagator") {
  const auto b = line_basis(4);
  const auto e1 = SpectralField::unit(b, 0, 4);
  CHECK(propagate_exact(e1, 0.0, Direction::Forward)[0] == 1.0);
  CHECK(propagate_exact(e1, 1.0, Direction::Forward)[0] == doctest::Approx(std::exp(-1.0)));
  const auto e4 = SpectralField::unit(b, 3, 4);
  CHECK(propagate_exact(e4, 0.5, Direction::Backward)[3] == doctest::Approx(std::exp(8.0)));
  CHECK_THROWS_AS(propagate_exact(e4, 100.0, Direction::Backward), OverflowError);
}

TEST_CASE("trajectory interpolation") {
  Trajectory tr;
  const auto b = line_basis(1);
  tr.times = {0.0, 1.0};
  tr.states = {SpectralField(b, {0.0}), SpectralField(b, {2.0})};
  CHECK(tr.at(0.25)[0] == doctest::Approx(0.5));
}
