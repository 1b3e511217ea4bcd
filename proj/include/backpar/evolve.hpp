#pragma once

// IMEX stepping for v_t = div(c grad v) + D v + S(x, t, v), D diagonal in
// the eigenbasis.

#include <cstddef>
#include <vector>

#include "backpar/sources.hpp"
#include "backpar/spectral.hpp"
#include "backpar/stochastic.hpp"

namespace backpar {

// Auto picks the exact per-mode propagator when c does not depend on x.
enum class DiffusionScheme { Auto, SpectralExact, GridImplicit };

struct EvolutionProblem {
  Coefficient diffusion = Coefficient::constant(1.0);
  bool diffusion_enabled = true;
  std::vector<double> drift;  // D_j per mode; empty means zero
  SourceSpec source = zero_source();
  SpectralField initial;
  double T = 1.0;
  std::size_t steps = 0;  // 0 selects T / 200 steps
  DiffusionScheme scheme = DiffusionScheme::Auto;
  double blowup_factor = 1e6;

  void validate() const;
  std::size_t step_count() const { return steps == 0 ? 200 : steps; }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;

  std::size_t size() const { return states.size(); }
  const SpectralField& final_state() const { return states.back(); }
  // Linear interpolation in time between stored nodes.
  SpectralField at(double t) const;
};

Trajectory solve_forward(const EvolutionProblem& problem);

enum class Direction { Forward, Backward };

// c_j -> exp(-/+ a lambda_j t) c_j for constant diffusivity a.
SpectralField propagate_exact(const SpectralField& f, double t, Direction direction, double diffusivity = 1.0);

}  // namespace backpar
