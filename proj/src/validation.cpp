#include "backpar/validation.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "backpar/error.hpp"
#include "backpar/experiments.hpp"

namespace backpar {

namespace {

SuiteResult run_suite(const std::string& name, const std::function<std::string()>& body) {
  SuiteResult r{name, false, {}};
  try {
    r.detail = body();
    r.passed = r.detail.empty();
  } catch (const std::exception& e) {
    r.detail = std::string("threw: ") + e.what();
  }
  return r;
}

std::string spectral_suite() {
  DomainSpec dom;
  dom.grid = {64, 64};
  const auto basis = build_basis(dom, 20);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  const SineTransform tr(basis, 20);
  std::vector<double> c(20), back(20), grid(tr.points());
  double worst_roundtrip = 0.0, worst_parseval = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    for (auto& x : c) x = n01(rng);
    tr.synthesize(c, grid);
    tr.analyze(grid, back);
    double ec = 0.0, eg = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      worst_roundtrip = std::max(worst_roundtrip, std::abs(back[j] - c[j]));
      ec += c[j] * c[j];
    }
    for (double g : grid) eg += g * g;
    eg *= dom.cell_volume();
    worst_parseval = std::max(worst_parseval, std::abs(eg - ec) / ec);
  }
  if (worst_roundtrip > 1e-12) return "roundtrip error " + std::to_string(worst_roundtrip);
  if (worst_parseval > 1e-10) return "Parseval error " + std::to_string(worst_parseval);

  // operator bounds on random fields
  const double beta = 0.1, M = 2.0, T = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& x : c) x = n01(rng) * std::exp(-static_cast<double>(trial % 5));
    const SpectralField f(basis, c);
    if (norm(apply_q_beta(f, beta, M, T), NormKind::l2()) > beta / T * norm(f, NormKind::gevrey(M * T)) * (1 + 1e-12))
      return "Q_beta bound violated";
    if (norm(apply_p_beta(f, beta, M, T), NormKind::l2()) > std::log(1 / beta) / T * norm(f, NormKind::l2()) * (1 + 1e-12))
      return "P_beta bound violated";
  }
  return {};
}

std::string stochastic_suite() {
  DomainSpec dom;
  const auto basis = build_basis_fitting(dom, 16);
  std::vector<double> gc(16, 0.0);
  gc[0] = 1.0;
  gc[2] = 0.5;
  const SpectralField g(basis, gc);
  const auto a = observe_final(g, {0.01, 16, 5, 3});
  const auto b = observe_final(g, {0.01, 16, 5, 3});
  for (std::size_t j = 0; j < 16; ++j) {
    if (a.data[j] != b.data[j]) return "observation not reproducible";
  }
  double sum = 0.0, sq = 0.0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    const auto o = observe_final(g, {0.01, 16, 11, static_cast<std::uint64_t>(t)});
    const double e = norm(subtract(o.data, g), NormKind::l2());
    sum += e * e;
    sq += e * e * e * e;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / trials);
  if (std::abs(mean - 1.6e-3) > 3.0 * se) return "noise energy off: " + std::to_string(mean);
  return {};
}

std::string sources_suite() {
  const auto gl = ginzburg_landau();
  if (std::abs(gl.eval({0, 0}, 0, 0.5) - 0.375) > 1e-15) return "Ginzburg-Landau value";
  const auto clipped = clip(gl, 2.0);
  if (std::abs(clipped.eval({0, 0}, 0, 5.0) - gl.eval({0, 0}, 0, 2.0)) > 1e-15) return "clip does not freeze";
  if (std::abs(clipped.K_R - 13.0) > 1e-12) return "K_R of Ginzburg-Landau";
  const auto cr = cube_root();
  if (!cr.structural) return "cube root lacks structural constants";
  const auto rep = verify_structural(cr, 10.0, *cr.structural);
  if (!rep.passed) return "cube root structural check failed";
  return {};
}

std::string evolve_suite() {
  DomainSpec dom;
  const auto basis = build_basis_fitting(dom, 4);
  EvolutionProblem p;
  p.initial = SpectralField::unit(basis, 0, 4);
  p.T = 1.0;
  p.steps = 100;
  const auto tr = solve_forward(p);
  const double err = std::abs(tr.final_state()[0] - std::exp(-1.0));
  if (err > 1e-12) return "heat mode decay error " + std::to_string(err);
  return {};
}

std::string truncation_suite() {
  const auto mc = registered_case("heat1");
  const auto obs = observe_final(mc.g, {0.0, 4, 0, 0});
  const auto sol = solve_backward_truncated(obs, zero_source(), 5.0, mc.T);
  const double err = norm(subtract(sol.trajectory.at(0.0), mc.reference.at(0.0)), NormKind::l2());
  if (err > 1e-6) return "noiseless linear reconstruction error " + std::to_string(err);
  const auto p = choose_params_truncation(1e-4, 1.0, 1.0, 1.0, 1, 0.5, 0.5);
  if (p.N != 100 || std::abs(p.alpha - 0.5 * std::log(100.0)) > 1e-12) return "truncation parameter rule";
  return {};
}

std::string qr_suite() {
  try {
    choose_params_qr(1e-4, 0.25, 0.5, 1.0, 1, 1.0, 1.0, 1e-3);
    return "inadmissible beta accepted";
  } catch (const DomainError&) {
  }
  const auto p = choose_params_qr(1e-4, 0.25, 0.95, 1.0, 1, 0.05, 0.5, 3.0);
  if (!(p.beta < p.admissibility_bound)) return "admissibility";
  const auto cmp = compare_clipped_structural(ginzburg_landau(), 0.0, {1e-2, 1e-3, 1e-4}, 0.25, 0.95, 1.0, 1, 0.05, 0.5, 3.0);
  if (!cmp.ratio_increasing) return "case comparison ratio not increasing";
  return {};
}

std::string experiments_suite() {
  const auto fit = fit_rate({{1e-1, 1e-2}, {1e-2, 1e-4}, {1e-3, 1e-6}});
  if (std::abs(fit.slope - 2.0) > 1e-12) return "rate fit of exact power data";
  MISEReport r;
  r.rows.push_back({"truncation", 0.01, 0.25, 10, 1.5e-3, 2e-4, 3.0, 0.8, 0.1});
  r.rows.push_back({"truncation", 0.001, 0.25, 10, std::nan(""), 0.0, 1e300, 0.8, 0.1});
  const auto back = parse_report_text(report_csv(r));
  if (back.rows.size() != 2 || !(back.rows[0] == r.rows[0])) return "CSV roundtrip";
  if (!std::isnan(back.rows[1].mise_mean)) return "CSV roundtrip of nan";
  return {};
}

}  // namespace

std::vector<SuiteResult> run_validation_suites() {
  return {
      run_suite("spectral_core", spectral_suite),
      run_suite("stochastic", stochastic_suite),
      run_suite("sources", sources_suite),
      run_suite("evolve", evolve_suite),
      run_suite("truncation_regularizer", truncation_suite),
      run_suite("qr_regularizer", qr_suite),
      run_suite("experiments", experiments_suite),
  };
}

}  // namespace backpar
