#pragma once

// Spectral cut-off regularization: the truncated mild equation solved by
// Picard iteration, with the parameter rules that pair N and alpha with delta.

#include <cstdint>
#include <optional>
#include <vector>

#include "backpar/evolve.hpp"
#include "backpar/sources.hpp"
#include "backpar/stochastic.hpp"

namespace backpar {

struct TruncationParams {
  double delta = 0.0;
  double k = 1.0;
  double T = 1.0;
  double gamma = 1.0;
  int d = 1;
  double a = 0.5;
  double b = 0.5;
  std::size_t N = 1;
  double alpha = 0.0;

  // Predicted error order delta^{(b a + b/2) a t / (k T)}.
  double predicted_slope(double t) const;
};

// N = ceil((1/delta)^{b a + b/2}), alpha = (a / (k T)) ln N.
TruncationParams choose_params_truncation(double delta, double k, double T, double gamma, int d, double a, double b);

struct IllposedChoice {
  double raw = 0.0;       // sqrt(ln(1/delta) / (2T))
  std::size_t modes = 0;  // ceil(raw)
};

IllposedChoice choose_N_illposed(double delta, double T);

struct MildSolveConfig {
  std::size_t nodes = 101;
  double tolerance = 1e-10;
  std::size_t max_iterations = 200;
  int min_grid = 16;
  double diffusivity = 1.0;
  // Start from a random trajectory instead of the linear part.
  std::optional<std::uint64_t> random_start;
  double random_scale = 1.0;

  void validate() const;
};

struct TruncationResult {
  Trajectory trajectory;
  std::vector<double> ratios;  // successive iterate distance ratios
  std::size_t iterations = 0;
  std::size_t retained = 0;    // modes with lambda_j <= alpha
  bool relaxed = false;
  double residual = 0.0;

  double max_ratio() const;
};

// Keeps modes with lambda_j <= alpha; diffusivity and tolerances from cfg.
TruncationResult solve_backward_truncated(const NoisyObservation& obs, const SourceSpec& F, double alpha, double T,
                                          const MildSolveConfig& cfg = {});
TruncationResult solve_backward_truncated(const NoisyObservation& obs, const SourceSpec& F,
                                          const TruncationParams& params, const MildSolveConfig& cfg = {});

// ||u_hat(t) - u_ref(t)|| per requested time.
std::vector<double> error_report(const Trajectory& u_hat, const Trajectory& u_ref, const NormKind& kind,
                                 const std::vector<double>& times);

// The two Gronwall factors printed for the error bound: exp(2 k^2 (T - t))
// and exp(2 k^2 T (T - t)). They agree when T = 1.
enum class GronwallForm { Short, Long };

struct TruncationEnvelopeInputs {
  double lambda_N = 1.0;
  double g_norm_h2gamma = 0.0;
  double A_prime = 0.0;
  double smoothness = 1.0;  // beta in sum lambda^{2 beta} e^{2 t lambda} u_j^2 < A'
};

double truncation_envelope(const TruncationParams& p, double t, const TruncationEnvelopeInputs& in,
                           GronwallForm form = GronwallForm::Short);

}  // namespace backpar
