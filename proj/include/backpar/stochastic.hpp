#pragma once

// Seeded white-noise observations of the final state and Brownian
// perturbations of the diffusion coefficient.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "backpar/spectral.hpp"

namespace backpar {

enum class Purpose : std::uint64_t { Observation = 1, Brownian = 2, InitialGuess = 3, Auxiliary = 4 };

// Counter-based split of one global seed: independent of how many other
// trials or purposes are drawn.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial, Purpose purpose);
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t trial, Purpose purpose);

struct NoiseConfig {
  double delta = 0.0;
  std::size_t N = 1;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  void validate() const;
};

struct NoisyObservation {
  SpectralField data;  // exactly N coefficients
  NoiseConfig config;
};

// <g, phi_j> + delta xi_j for j < N. g's basis must hold at least N modes;
// missing coefficients of g count as zero.
NoisyObservation observe_final(const SpectralField& g, const NoiseConfig& cfg);

// delta^2 N + lambda_N^{-2 gamma} ||g||^2_{H^{2 gamma}}.
double mise_bound(double delta, double N, double gamma, double g_norm_h2gamma, double lambda_N);

struct BrownianPath {
  std::vector<double> times;
  std::vector<double> values;

  // Piecewise-linear interpolation; clamps outside [0, T].
  double at(double t) const;
  double min() const;
  double max() const;
};

BrownianPath brownian_path(double T, std::size_t K, std::uint64_t seed);

// A scalar field on the domain, possibly time dependent, with recorded bounds.
struct Coefficient {
  std::function<double(const Point&, double)> eval;
  double lower = 0.0;
  double upper = 0.0;
  bool x_independent = true;

  double operator()(const Point& x, double t) const { return eval(x, t); }
  static Coefficient constant(double value);
};

struct PerturbedCoefficient {
  Coefficient a;  // a + delta psi(t)
  Coefficient b;  // M - a_delta
  double M = 0.0;
  double b0 = 0.0;  // lower bound of b over the path nodes
  bool valid = true;
  std::string reason;
};

// M <= 0 selects the default 2 sup a_delta over the path nodes.
PerturbedCoefficient perturb_coefficient(const Coefficient& a, double delta, const BrownianPath& psi, double M);

}  // namespace backpar
