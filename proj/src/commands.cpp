#include "backpar/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "backpar/error.hpp"
#include "backpar/validation.hpp"

namespace backpar {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw Error("write to '" + path.string() + "' failed");
}

std::string coefficients_csv(const SpectralField& u) {
  std::string out = "j,k1,k2,lambda,coefficient\n";
  const auto& b = *u.basis();
  for (std::size_t j = 0; j < u.size(); ++j) {
    out += std::to_string(j + 1) + ',' + std::to_string(b.mode(j)[0]) + ',' + std::to_string(b.mode(j)[1]) + ',' +
           format_number(b.eigenvalue(j)) + ',' + format_number(u[j]) + '\n';
  }
  return out;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "t,j,coefficient\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& s = tr.states[i];
    for (std::size_t j = 0; j < s.size(); ++j)
      out += format_number(tr.times[i]) + ',' + std::to_string(j + 1) + ',' + format_number(s[j]) + '\n';
  }
  return out;
}

std::string header_block(const RunConfig& cfg) {
  std::string out;
  for (const auto& line : cfg.provenance()) out += "# " + line + '\n';
  return out;
}

double nominal_M(const ManufacturedCase& mc, const MethodConfig& m) { return m.M > 0.0 ? m.M : 2.0 * mc.a.upper; }

double default_k(const ManufacturedCase& mc, const MethodConfig& m, SourceSpec& inv_source) {
  inv_source = mc.source;
  double k = m.k;
  if (m.clip_radius > 0.0 && !mc.source.is_zero()) {
    const auto clipped = clip(mc.source, m.clip_radius);
    inv_source = clipped.as_source();
    if (k <= 0.0) k = clipped.K_R;
  }
  if (k <= 0.0) k = inv_source.k > 0.0 ? inv_source.k : 1.0;
  return k;
}

}  // namespace

RunConfig resolve_config(const CommandOverrides& o) {
  RunConfig cfg = o.config ? load_config(*o.config) : parse_config_text("[case]\nname = heat1\n");
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  if (o.trials) cfg.trials = *o.trials;
  if (o.threads) cfg.threads = *o.threads;
  return cfg;
}

int cmd_forward(const RunConfig& cfg, std::ostream& log) {
  const auto mc = build_case(cfg);
  const fs::path dir(cfg.out_dir);
  write_file(dir / "g.csv", coefficients_csv(mc.g));
  write_file(dir / "trajectory.csv", trajectory_csv(mc.reference));
  log << "forward: case " << mc.name << ", T = " << format_number(mc.T) << ", " << mc.reference.size() - 1
      << " steps, ||g|| = " << format_number(norm(mc.g, NormKind::l2())) << '\n';
  log << "wrote " << (dir / "g.csv").string() << " and " << (dir / "trajectory.csv").string() << '\n';
  return kExitOk;
}

int cmd_invert(const RunConfig& cfg, std::ostream& log) {
  const auto mc = build_case(cfg);
  const auto& m = cfg.method_cfg;
  const double delta = cfg.deltas.front();
  const int d = mc.domain.dim;
  std::ostringstream diag;
  diag << header_block(cfg);
  diag << "method = " << method_name(m.method) << "\ndelta = " << format_number(delta) << '\n';

  SourceSpec inv_source;
  const double k = default_k(mc, m, inv_source);
  std::size_t N = 0;
  std::optional<TruncationParams> tp;
  std::optional<QRParams> qp;
  const double lambda1 = mc.basis->eigenvalue(0);
  if (m.method == Method::Truncation || m.method == Method::NaiveBackward || m.method == Method::ObserveOnly) {
    tp = choose_params_truncation(delta, k, mc.T, m.gamma, d, m.a, m.b);
    N = m.method == Method::ObserveOnly && m.observe_N > 0 ? m.observe_N : tp->N;
  } else {
    qp = choose_params_qr(delta, m.c, m.m, m.gamma, d, m.k_rule, mc.T, nominal_M(mc, m), lambda1);
    N = qp->N;
  }
  DomainSpec obs_domain = mc.domain;
  obs_domain.grid = {1, 1};
  const auto obs_basis = build_basis_fitting(obs_domain, std::max(N, mc.g.size()));
  const auto g_obs = mc.g.rebased(obs_basis);
  const auto obs = observe_final(g_obs, {delta, N, cfg.seed, 0});
  diag << "N = " << N << '\n';

  Trajectory u;
  switch (m.method) {
    case Method::Truncation: {
      const auto sol = solve_backward_truncated(obs, inv_source, *tp, m.mild);
      u = sol.trajectory;
      diag << "k = " << format_number(k) << "\nalpha = " << format_number(tp->alpha) << "\nretained = " << sol.retained
           << "\niterations = " << sol.iterations << "\nmax_ratio = " << format_number(sol.max_ratio())
           << "\nrelaxed = " << (sol.relaxed ? "true" : "false") << '\n';
      break;
    }
    case Method::QRClipped:
    case Method::QRStructural: {
      const std::size_t steps = m.qr.steps == 0 ? 200 : m.qr.steps;
      const BrownianPath psi = m.coefficient_noise
                                   ? brownian_path(mc.T, steps, substream_seed(cfg.seed, 0, Purpose::Brownian))
                                   : BrownianPath{{0.0, mc.T}, {0.0, 0.0}};
      const auto coeff = perturb_coefficient(mc.a, m.coefficient_noise ? delta : 0.0, psi, m.M);
      if (!coeff.valid) throw DomainError("invalid coefficient noise: " + coeff.reason);
      const auto params = choose_params_qr(delta, m.c, m.m, m.gamma, d, m.k_rule, mc.T, coeff.M, lambda1);
      const auto mode = m.method == Method::QRClipped ? QRSourceMode::Clipped : QRSourceMode::Structural;
      const auto sol = solve_qr(obs, coeff, params, mc.source, mode, m.qr);
      u = sol.u;
      diag << "beta = " << format_number(sol.beta) << "\nM = " << format_number(coeff.M)
           << "\nadmissibility_bound = " << format_number(params.admissibility_bound)
           << "\nR_delta = " << format_number(sol.R) << "\nK_R = " << format_number(sol.K_R)
           << "\nmax_drift = " << format_number(sol.max_drift) << '\n';
      break;
    }
    case Method::NaiveBackward: {
      const double a0 = mc.a({0.5 * mc.domain.length[0], 0.5 * mc.domain.length[1]}, 0.0);
      for (std::size_t i = 0; i < mc.reference.size(); ++i) {
        const double t = mc.reference.times[i];
        u.times.push_back(t);
        u.states.push_back(propagate_exact(obs.data, mc.T - t, Direction::Backward, a0));
      }
      break;
    }
    case Method::ObserveOnly: {
      u.times = {mc.T};
      u.states = {obs.data};
      break;
    }
  }

  const std::vector<double> ts =
      m.method == Method::ObserveOnly ? std::vector<double>{mc.T} : requested_times(cfg, mc.T);
  const auto errs = error_report(u, mc.reference, NormKind::l2(), ts);
  for (std::size_t i = 0; i < ts.size(); ++i)
    diag << "error(t = " << format_number(ts[i]) << ") = " << format_number(errs[i]) << '\n';

  const fs::path dir(cfg.out_dir);
  write_file(dir / "reconstruction.csv", trajectory_csv(u));
  write_file(dir / "diagnostics.txt", diag.str());
  log << diag.str();
  return kExitOk;
}

int cmd_mise(const RunConfig& cfg, std::ostream& log) {
  if (cfg.trials < 1) throw ConfigError("noise.trials", "must be at least 1");
  const auto mc = build_case(cfg);
  const auto report =
      run_mise(mc, cfg.method_cfg, cfg.deltas, requested_times(cfg, mc.T), cfg.trials, cfg.seed, cfg.threads);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  emit_report(report, (dir / "mise.csv").string(), (dir / "mise_summary.txt").string(), cfg.provenance());
  log << report_csv(report);
  bool ok = !report.flagged;
  for (const auto& note : report.notes) log << "note: " << note << '\n';
  for (const auto& row : report.rows) {
    if (std::isfinite(row.envelope) && row.mise_mean > 10.0 * row.envelope) {
      log << "envelope exceeded at delta = " << format_number(row.delta) << ", t = " << format_number(row.t) << '\n';
      ok = false;
    }
  }
  return ok ? kExitOk : kExitAssertion;
}

IllposedVerdict judge_illposed(const std::vector<IllposedRow>& rows) {
  IllposedVerdict v;
  std::vector<const IllposedRow*> used;
  for (const auto& r : rows) {
    if (r.N_modes == 0) continue;
    used.push_back(&r);
    if (std::abs(r.data_mean - r.data_predicted_modes) > 3.0 * r.data_stderr) v.data_matches = false;
    if (r.solution_mean < r.solution_bound - 2.0 * r.solution_stderr) v.solution_above = false;
  }
  std::sort(used.begin(), used.end(), [](auto a, auto b) { return a->delta > b->delta; });
  for (std::size_t i = 1; i < used.size(); ++i) {
    if (!(used[i]->data_mean < used[i - 1]->data_mean)) v.data_decreasing = false;
    if (!(used[i]->solution_mean > used[i - 1]->solution_mean)) v.solution_increasing = false;
  }
  return v;
}

int cmd_illposed(const RunConfig& cfg, std::ostream& log) {
  if (cfg.trials < 1) throw ConfigError("noise.trials", "must be at least 1");
  const auto rows = illposed_demo(cfg.illposed_T, cfg.illposed_deltas, cfg.trials, cfg.seed, cfg.threads);
  const fs::path dir(cfg.out_dir);
  const std::string csv = illposed_csv(rows);
  write_file(dir / "illposed.csv", csv);
  log << csv;
  const auto v = judge_illposed(rows);
  auto mark = [](bool b) { return b ? "PASS" : "FAIL"; };
  log << mark(v.data_matches) << " data error matches delta^2 N within 3 se\n"
      << mark(v.solution_above) << " solution energy reaches (2/5)/delta within 2 se\n"
      << mark(v.data_decreasing) << " data error decreases with delta\n"
      << mark(v.solution_increasing) << " solution energy increases as delta decreases\n";
  return v.passed() ? kExitOk : kExitAssertion;
}

int cmd_validate(std::ostream& log) {
  bool ok = true;
  for (const auto& s : run_validation_suites()) {
    log << (s.passed ? "PASS " : "FAIL ") << s.name;
    if (!s.detail.empty()) log << ": " << s.detail;
    log << '\n';
    ok = ok && s.passed;
  }
  return ok ? kExitOk : kExitAssertion;
}

int run_command(const std::string& name, const CommandOverrides& o, std::ostream& log, std::ostream& err) {
  try {
    if (name == "validate") return cmd_validate(log);
    const RunConfig cfg = resolve_config(o);
    if (name == "forward") return cmd_forward(cfg, log);
    if (name == "invert") return cmd_invert(cfg, log);
    if (name == "mise") return cmd_mise(cfg, log);
    if (name == "illposed") return cmd_illposed(cfg, log);
    err << "unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace backpar
