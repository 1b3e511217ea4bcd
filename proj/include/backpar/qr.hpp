#pragma once

// Quasi-reversibility: the backward problem with M Delta replaced by the
// bounded operator P_beta, integrated forward in reversed time.

#include <optional>
#include <string>
#include <vector>

#include "backpar/evolve.hpp"
#include "backpar/sources.hpp"
#include "backpar/stochastic.hpp"

namespace backpar {

struct QRParams {
  double delta = 0.0;
  double c = 0.25;
  double m = 0.5;
  double gamma = 1.0;
  int d = 1;
  double k = 1.0;  // constant in the clip-radius rule
  double T = 1.0;
  double M = 2.0;
  std::size_t N = 1;
  double beta = 1.0;
  double admissibility_bound = 0.0;  // 1 - e^{-M T lambda_1}

  // Slope of MISE against delta at time t: 2 m c (1/2 - c) t / T.
  double predicted_slope(double t) const;
  // delta^{m c (1/2 - c) t / T} ln(1/delta).
  double predicted_order(double t) const;
};

// N = ceil((1/delta)^{m (1/2 - c)}), beta = N^{-c}; rejects inadmissible beta.
QRParams choose_params_qr(double delta, double c, double m, double gamma, int d, double k, double T, double M,
                          double lambda1 = 1.0);

struct ClipChoice {
  double R = 0.0;
  double K_R = 0.0;
  double bound = 0.0;  // (1 / (k T)) ln ln N
};

// Largest R with K(R) <= (1 / (k T)) ln ln N.
ClipChoice choose_clip_radius(const SourceSpec& source, const QRParams& params);

enum class QRSourceMode { Clipped, Structural };

struct QRSolveConfig {
  std::size_t steps = 0;  // 0 selects T / 200 steps
  int min_grid = 16;
  DiffusionScheme scheme = DiffusionScheme::Auto;
  double structural_range = 10.0;  // |z| sample range for the structural check
};

// c = b_delta(x, T - t), D_j = (1/T) ln(1 / (beta + e^{-M T lambda_j})),
// S = -F(x, T - t, v), initial value the observation.
EvolutionProblem assemble_reversed(const NoisyObservation& obs, const PerturbedCoefficient& coeff,
                                   const QRParams& params, const SourceSpec& F, const QRSolveConfig& cfg = {});

struct QRSolution {
  Trajectory u;  // u(t) = v(T - t)
  double beta = 0.0;
  std::size_t N = 0;
  double R = 0.0;    // clip radius, 0 in structural mode
  double K_R = 0.0;  // Lipschitz constant of the clipped source
  double max_drift = 0.0;
};

QRSolution solve_qr(const NoisyObservation& obs, const PerturbedCoefficient& coeff, const QRParams& params,
                    const SourceSpec& F, QRSourceMode mode, const QRSolveConfig& cfg = {});

struct QREnvelopeInputs {
  double lambda_N = 1.0;
  double g_norm_h2gamma = 0.0;
  double u_wmt_sup = 0.0;  // ||u||_{C([0,T]; W_MT)}
  double u_h1_sup = 0.0;   // ||u||_{L^inf(0,T; H^1_0)}
  double b0 = 1.0;
};

// C(delta) of the error bound: four terms, summed.
double qr_constant(const QRParams& p, const QREnvelopeInputs& in);
// beta^{2t/T} e^{(2 K + 1) T} C(delta); K is K(R_delta) or gamma_bar.
double qr_envelope(const QRParams& p, double t, double K, const QREnvelopeInputs& in);

struct CaseComparisonRow {
  double delta = 0.0;
  std::size_t N = 0;
  double beta = 0.0;
  double R = 0.0;
  double K_R = 0.0;
  double gamma_bar = 0.0;
  double ratio = 0.0;  // e^{2 (K_R - gamma_bar) T}
};

struct CaseComparison {
  std::vector<CaseComparisonRow> rows;
  bool ratio_increasing = false;  // as delta decreases
};

// Envelope ratio between the clipped and structural bounds along a delta grid.
CaseComparison compare_clipped_structural(const SourceSpec& source, double gamma_bar, const std::vector<double>& deltas,
                                   double c, double m, double gamma, int d, double k, double T, double M);

}  // namespace backpar
