#include "backpar/qr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "backpar/error.hpp"

namespace backpar {

namespace {

std::size_t fuzzy_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace

double QRParams::predicted_slope(double t) const { return 2.0 * m * c * (0.5 - c) * t / T; }

double QRParams::predicted_order(double t) const {
  return std::pow(delta, m * c * (0.5 - c) * t / T) * std::log(1.0 / delta);
}

QRParams choose_params_qr(double delta, double c, double m, double gamma, int d, double k, double T, double M,
                          double lambda1) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (d != 1 && d != 2) throw DomainError("dimension must be 1 or 2");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const double cmax = std::min(0.5, 2.0 * gamma / d);
  if (!(c > 0.0 && c < cmax)) {
    std::ostringstream msg;
    msg << "exponent c = " << c << " must lie in (0, " << cmax << ")";
    throw DomainError(msg.str());
  }
  if (!(m > 0.0 && m < 1.0)) throw DomainError("exponent m must lie in (0, 1)");
  if (!(k > 0.0) || !(T > 0.0) || !(M > 0.0)) throw DomainError("k, T and M must be positive");
  QRParams p{delta, c, m, gamma, d, k, T, M};
  p.N = std::max<std::size_t>(1, fuzzy_ceil(std::pow(1.0 / delta, m * (0.5 - c))));
  p.beta = std::pow(static_cast<double>(p.N), -c);
  p.admissibility_bound = p_beta_admissibility_bound(M, T, lambda1);
  if (!(p.beta < p.admissibility_bound)) {
    std::ostringstream msg;
    msg << "beta = " << p.beta << " (N = " << p.N << ") is not admissible; need beta < 1 - exp(-M T lambda_1) = "
        << p.admissibility_bound << "; raise M T or c";
    throw DomainError(msg.str());
  }
  return p;
}

ClipChoice choose_clip_radius(const SourceSpec& source, const QRParams& params) {
  ClipChoice out;
  if (params.N < 2) throw DomainError("clip-radius rule needs N >= 2");
  const double ll = std::log(std::log(static_cast<double>(params.N)));
  out.bound = ll / (params.k * params.T);
  auto K = [&](double R) { return lipschitz_bound(source, R).value; };
  constexpr double tiny = 1e-12;
  if (!(K(tiny) <= out.bound)) {
    std::ostringstream msg;
    msg << "no clip radius satisfies K(R) <= " << out.bound << " for N = " << params.N;
    throw DomainError(msg.str());
  }
  // grow until the bound is violated, then bisect
  double lo = tiny;
  double hi = 1.0;
  constexpr double cap = 1e12;
  while (hi < cap && K(hi) <= out.bound) {
    lo = hi;
    hi *= 2.0;
  }
  if (hi >= cap) {
    out.R = cap;
  } else {
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (K(mid) <= out.bound ? lo : hi) = mid;
    }
    out.R = lo;
  }
  out.K_R = K(out.R);
  return out;
}

EvolutionProblem assemble_reversed(const NoisyObservation& obs, const PerturbedCoefficient& coeff,
                                   const QRParams& params, const SourceSpec& F, const QRSolveConfig& cfg) {
  if (!coeff.valid) throw DomainError("invalid coefficient-noise trial: " + coeff.reason);
  if (!(coeff.b0 > 0.0)) throw DomainError("b_delta must be bounded below by a positive constant");
  const std::size_t N = obs.data.size();
  auto basis = build_compact_basis(obs.data.basis()->domain(), N, cfg.min_grid);
  EvolutionProblem p;
  const double T = params.T;
  auto b = coeff.b.eval;
  p.diffusion = {[b, T](const Point& x, double t) { return b(x, T - t); }, coeff.b.lower, coeff.b.upper,
                 coeff.b.x_independent};
  p.drift.resize(N);
  for (std::size_t j = 0; j < N; ++j)
    p.drift[j] = -p_beta_multiplier(basis->eigenvalue(j), params.beta, coeff.M, T);
  p.source = F.is_zero() ? zero_source() : time_reversed_negated(F, T);
  p.initial = SpectralField(basis, std::vector<double>(obs.data.coefficients().begin(), obs.data.coefficients().end()));
  p.T = T;
  p.steps = cfg.steps;
  p.scheme = cfg.scheme;
  return p;
}

QRSolution solve_qr(const NoisyObservation& obs, const PerturbedCoefficient& coeff, const QRParams& params,
                    const SourceSpec& F, QRSourceMode mode, const QRSolveConfig& cfg) {
  QRSolution out;
  out.beta = params.beta;
  out.N = params.N;
  if (coeff.M != params.M) throw DomainError("coefficient and parameters disagree on M");
  if (!(params.beta < p_beta_admissibility_bound(coeff.M, params.T, obs.data.basis()->eigenvalue(0))))
    throw DomainError("beta is not admissible for this M T");
  SourceSpec used;
  if (F.is_zero()) {
    used = zero_source();
  } else if (mode == QRSourceMode::Clipped) {
    if (!F.f) throw DomainError("clipped mode needs a pointwise source");
    const auto choice = choose_clip_radius(F, params);
    const auto clipped = clip(F, choice.R);
    out.R = clipped.R;
    out.K_R = clipped.K_R;
    used = clipped.as_source();
  } else {
    if (!F.structural) throw DomainError("structural mode needs declared structural constants");
    const auto report = verify_structural(F, cfg.structural_range, *F.structural);
    if (!report.passed) {
      std::string what = "structural conditions fail for '" + F.name + "'";
      if (report.degenerate) what += ": " + report.note;
      for (const auto& v : report.violations) what += "; " + v.inequality + " at z = " + std::to_string(v.z1);
      throw DomainError(what);
    }
    used = F;
  }
  auto problem = assemble_reversed(obs, coeff, params, used, cfg);
  for (double dj : problem.drift) out.max_drift = std::max(out.max_drift, dj);
  const auto v = solve_forward(problem);
  const std::size_t K = v.size() - 1;
  out.u.times = v.times;
  out.u.states.reserve(K + 1);
  for (std::size_t i = 0; i <= K; ++i) out.u.states.push_back(v.states[K - i]);
  return out;
}

double qr_constant(const QRParams& p, const QREnvelopeInputs& in) {
  const double b2 = p.beta * p.beta;
  const double d2 = p.delta * p.delta;
  return d2 * static_cast<double>(p.N) / b2 + std::pow(in.lambda_N, -2.0 * p.gamma) / b2 * in.g_norm_h2gamma * in.g_norm_h2gamma +
         in.u_wmt_sup * in.u_wmt_sup + d2 * p.T * p.T * p.T / (in.b0 * b2) * in.u_h1_sup * in.u_h1_sup;
}

double qr_envelope(const QRParams& p, double t, double K, const QREnvelopeInputs& in) {
  return std::pow(p.beta, 2.0 * t / p.T) * std::exp((2.0 * K + 1.0) * p.T) * qr_constant(p, in);
}

CaseComparison compare_clipped_structural(const SourceSpec& source, double gamma_bar, const std::vector<double>& deltas,
                                   double c, double m, double gamma, int d, double k, double T, double M) {
  CaseComparison out;
  for (double delta : deltas) {
    const auto p = choose_params_qr(delta, c, m, gamma, d, k, T, M);
    const auto clip_choice = choose_clip_radius(source, p);
    CaseComparisonRow row{delta, p.N, p.beta, clip_choice.R, clip_choice.K_R, gamma_bar};
    row.ratio = std::exp(2.0 * (clip_choice.K_R - gamma_bar) * T);
    out.rows.push_back(row);
  }
  std::vector<CaseComparisonRow> sorted = out.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  out.ratio_increasing = sorted.size() >= 2;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (!(sorted[i].ratio > sorted[i - 1].ratio)) out.ratio_increasing = false;
  }
  return out;
}

}  // namespace backpar
