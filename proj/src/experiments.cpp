#include "backpar/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "backpar/error.hpp"

namespace backpar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double sup_over_reference(const ManufacturedCase& mc, const std::function<double(const SpectralField&, double)>& f) {
  if (!mc.manufactured()) throw DomainError("case '" + mc.name + "' has not been manufactured");
  double best = 0.0;
  for (std::size_t i = 0; i < mc.reference.size(); ++i) best = std::max(best, f(mc.reference.states[i], mc.reference.times[i]));
  return best;
}

}  // namespace

namespace {

// Coefficients below floor * max |u_j| are treated as unresolved and dropped:
// exponential weights would otherwise amplify rounding noise in the tail.
SpectralField resolved(const SpectralField& u, double floor) {
  double top = 0.0;
  for (double c : u.coefficients()) top = std::max(top, std::abs(c));
  std::vector<double> kept(u.coefficients().begin(), u.coefficients().end());
  for (auto& c : kept) {
    if (std::abs(c) < floor * top) c = 0.0;
  }
  return SpectralField(u.basis(), std::move(kept));
}

}  // namespace

double ManufacturedCase::A_prime(double beta, double floor) const {
  return sup_over_reference(*this, [beta, floor](const SpectralField& raw, double t) {
    const auto u = resolved(raw, floor);
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (u[j] == 0.0) continue;
      const double lam = u.basis()->eigenvalue(j);
      s += std::pow(lam, 2.0 * beta) * std::exp(2.0 * t * lam) * u[j] * u[j];
    }
    return s;
  });
}

double ManufacturedCase::A_double_prime(double r, double floor) const {
  return sup_over_reference(*this, [r, floor](const SpectralField& raw, double t) {
    const auto u = resolved(raw, floor);
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (u[j] == 0.0) continue;
      s += std::exp(2.0 * (t + r) * u.basis()->eigenvalue(j)) * u[j] * u[j];
    }
    return s;
  });
}

double ManufacturedCase::g_norm(const NormKind& kind) const {
  if (!manufactured()) throw DomainError("case '" + name + "' has not been manufactured");
  return norm(g, kind);
}

double ManufacturedCase::sup_gevrey(double sigma, double floor) const {
  return sup_over_reference(*this, [sigma, floor](const SpectralField& u, double) {
    return norm(resolved(u, floor), NormKind::gevrey(sigma));
  });
}

double ManufacturedCase::sup_h1() const {
  return sup_over_reference(*this, [](const SpectralField& u, double) { return norm(u, NormKind::sobolev(1.0)); });
}

ManufacturedCase manufacture(ManufacturedCase c) {
  if (c.u0.empty()) throw DomainError("manufactured case needs initial coefficients");
  const std::size_t J = std::max(2 * c.inversion_modes, c.u0.size());
  c.basis = build_basis_fitting(c.domain, J);
  std::vector<double> init(J, 0.0);
  std::copy(c.u0.begin(), c.u0.end(), init.begin());
  EvolutionProblem p;
  p.diffusion = c.a;
  p.source = c.source;
  p.initial = SpectralField(c.basis, std::move(init));
  p.T = c.T;
  p.steps = c.forward_steps;
  c.reference = solve_forward(p);
  c.g = c.reference.final_state();
  return c;
}

ManufacturedCase case_spec(const std::string& name) {
  ManufacturedCase c;
  c.name = name;
  if (name == "heat1") {
    c.u0 = {1.0};
    c.T = 1.0;
  } else if (name == "gl3") {
    c.u0 = {0.3, 0.1, 0.05};
    c.source = ginzburg_landau();
    c.T = 0.5;
  } else if (name == "cube3") {
    c.u0 = {2.0, 0.5, 0.2};
    c.source = cube_root();
    c.T = 0.5;
  } else if (name == "fkpp3") {
    c.u0 = {0.3, 0.1, 0.05};
    c.source = fisher_kpp();
    c.T = 0.5;
  } else if (name == "gl2d") {
    c.domain.dim = 2;
    c.domain.grid = {16, 16};
    c.u0 = {0.3, 0.1, 0.1};
    c.source = ginzburg_landau();
    c.T = 0.5;
    c.inversion_modes = 12;
    c.forward_steps = 1000;
  } else {
    std::string valid;
    for (const auto& n : case_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw DomainError("unknown case '" + name + "' (valid: " + valid + ")");
  }
  return c;
}

ManufacturedCase registered_case(const std::string& name) { return manufacture(case_spec(name)); }

std::vector<std::string> case_names() { return {"heat1", "gl3", "cube3", "fkpp3", "gl2d"}; }

std::string method_name(Method m) {
  switch (m) {
    case Method::Truncation: return "truncation";
    case Method::QRClipped: return "qr-clipped";
    case Method::QRStructural: return "qr-structural";
    case Method::NaiveBackward: return "naive-backward";
    case Method::ObserveOnly: return "observe-only";
  }
  return "unknown";
}

std::vector<std::string> method_names() {
  return {"truncation", "qr-clipped", "qr-structural", "naive-backward", "observe-only"};
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::Truncation, Method::QRClipped, Method::QRStructural, Method::NaiveBackward,
                   Method::ObserveOnly}) {
    if (method_name(m) == name) return m;
  }
  std::string valid;
  for (const auto& n : method_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw DomainError("unknown method '" + name + "' (valid: " + valid + ")");
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DomainError("rate fit needs at least three points");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (const auto& [d, v] : points) {
    if (!(d > 0.0) || !(v > 0.0)) throw DomainError("rate fit needs positive values");
    sx += std::log(d);
    sy += std::log(v);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [d, v] : points) {
    const double x = std::log(d) - mx, y = std::log(v) - my;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  if (sxx == 0.0) throw DomainError("rate fit needs distinct deltas");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sse = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
  const double dof = n - 2.0;
  const double se = dof > 0 ? std::sqrt(sse / dof / sxx) : 0.0;
  boost::math::students_t dist(dof);
  fit.slope_ci = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return fit;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BACKPAR_THREADS")) {
    unsigned v = 0;
    const std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct TrialResult {
  bool ok = false;
  std::vector<double> errors;
  std::string reason;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double nominal_M(const ManufacturedCase& mc, const MethodConfig& cfg) { return cfg.M > 0.0 ? cfg.M : 2.0 * mc.a.upper; }

// Squared distance between a reconstruction and the reference at t.
double squared_error(const SpectralField& u_hat, const Trajectory& ref, double t) {
  const double e = norm(subtract(u_hat, ref.at(t)), NormKind::l2());
  return e * e;
}

}  // namespace

MISEReport run_mise(const ManufacturedCase& mc, const MethodConfig& cfg, const std::vector<double>& deltas,
                    const std::vector<double>& times, std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (!mc.manufactured()) throw DomainError("case '" + mc.name + "' has not been manufactured");
  if (trials < 1) throw DomainError("trials must be positive");
  if (deltas.empty()) throw DomainError("delta grid is empty");
  threads = resolve_threads(threads);
  const int d = mc.domain.dim;
  const std::string name = method_name(cfg.method);
  const std::vector<double> ts = cfg.method == Method::ObserveOnly ? std::vector<double>{mc.T} : times;
  if (ts.empty()) throw DomainError("time list is empty");
  for (double t : ts) {
    if (!(t >= 0.0 && t <= mc.T)) throw DomainError("requested time outside [0, T]");
  }

  // inversion source and its Lipschitz constant for the truncation rule
  SourceSpec inv_source = mc.source;
  double k = cfg.k;
  if (cfg.method == Method::Truncation || cfg.method == Method::NaiveBackward) {
    if (cfg.clip_radius > 0.0 && !mc.source.is_zero()) {
      const auto clipped = clip(mc.source, cfg.clip_radius);
      inv_source = clipped.as_source();
      if (k <= 0.0) k = clipped.K_R;
    }
    if (k <= 0.0) k = inv_source.k > 0.0 ? inv_source.k : 1.0;
  }

  MISEReport report;
  for (double delta : deltas) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    std::size_t N = 0;
    std::optional<TruncationParams> tp;
    std::optional<QRParams> qp;
    const double Mnom = nominal_M(mc, cfg);
    const double lambda1 = mc.basis->eigenvalue(0);
    switch (cfg.method) {
      case Method::Truncation:
      case Method::NaiveBackward:
        // the naive inverse sees the same data as the cut-off method
        tp = choose_params_truncation(delta, k, mc.T, cfg.gamma, d, cfg.a, cfg.b);
        N = tp->N;
        break;
      case Method::QRClipped:
      case Method::QRStructural:
        qp = choose_params_qr(delta, cfg.c, cfg.m, cfg.gamma, d, cfg.k_rule, mc.T, Mnom, lambda1);
        N = qp->N;
        break;
      case Method::ObserveOnly:
        N = cfg.observe_N > 0 ? cfg.observe_N
                              : choose_params_truncation(delta, k > 0 ? k : 1.0, mc.T, cfg.gamma, d, cfg.a, cfg.b).N;
        break;
    }
    DomainSpec obs_domain = mc.domain;
    obs_domain.grid = {1, 1};
    const auto obs_basis = build_basis_fitting(obs_domain, std::max(N, mc.g.size()));
    const auto g_obs = mc.g.rebased(obs_basis);

    std::vector<TrialResult> results(trials);
    parallel_for(trials, threads, [&](std::size_t trial) {
      TrialResult r;
      try {
        const auto obs = observe_final(g_obs, {delta, N, seed, trial});
        switch (cfg.method) {
          case Method::Truncation: {
            const auto sol = solve_backward_truncated(obs, inv_source, *tp, cfg.mild);
            for (double t : ts) r.errors.push_back(squared_error(sol.trajectory.at(t), mc.reference, t));
            break;
          }
          case Method::QRClipped:
          case Method::QRStructural: {
            const std::size_t steps = cfg.qr.steps == 0 ? 200 : cfg.qr.steps;
            const BrownianPath psi = cfg.coefficient_noise
                                         ? brownian_path(mc.T, steps, substream_seed(seed, trial, Purpose::Brownian))
                                         : BrownianPath{{0.0, mc.T}, {0.0, 0.0}};
            const auto coeff = perturb_coefficient(mc.a, cfg.coefficient_noise ? delta : 0.0, psi, cfg.M);
            if (!coeff.valid) throw DomainError("invalid coefficient noise: " + coeff.reason);
            const auto params = choose_params_qr(delta, cfg.c, cfg.m, cfg.gamma, d, cfg.k_rule, mc.T, coeff.M, lambda1);
            const auto mode = cfg.method == Method::QRClipped ? QRSourceMode::Clipped : QRSourceMode::Structural;
            const auto sol = solve_qr(obs, coeff, params, mc.source, mode, cfg.qr);
            for (double t : ts) r.errors.push_back(squared_error(sol.u.at(t), mc.reference, t));
            break;
          }
          case Method::NaiveBackward: {
            const double a0 = mc.a({0.5 * mc.domain.length[0], 0.5 * mc.domain.length[1]}, 0.0);
            for (double t : ts)
              r.errors.push_back(squared_error(propagate_exact(obs.data, mc.T - t, Direction::Backward, a0), mc.reference, t));
            break;
          }
          case Method::ObserveOnly: {
            const double e = norm(subtract(obs.data, g_obs), NormKind::l2());
            r.errors.push_back(e * e);
            break;
          }
        }
        r.ok = true;
      } catch (const std::exception& e) {
        r.ok = false;
        r.reason = e.what();
      }
      results[trial] = std::move(r);
    });

    std::size_t failed = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      if (!results[i].ok) {
        ++failed;
        report.failures.push_back({delta, i, results[i].reason});
      }
    }
    if (10 * failed > trials) {
      report.flagged = true;
      std::ostringstream msg;
      msg << name << " delta=" << format_number(delta) << ": " << failed << " of " << trials << " trials failed";
      report.notes.push_back(msg.str());
    }

    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      std::vector<double> v;
      for (const auto& r : results) {
        if (r.ok) v.push_back(r.errors[ti]);
      }
      MISERow row{name, delta, ts[ti], v.size()};
      row.mise_mean = v.empty() ? kNaN : mean_of(v);
      row.mise_stderr = v.empty() ? kNaN : stderr_of(v, row.mise_mean);
      const double t = ts[ti];
      switch (cfg.method) {
        case Method::Truncation: {
          TruncationEnvelopeInputs in;
          in.lambda_N = nth_eigenvalue(mc.domain, tp->N);
          in.g_norm_h2gamma = mc.g_norm(NormKind::sobolev(2.0 * cfg.gamma));
          in.A_prime = mc.A_prime(cfg.smoothness);
          in.smoothness = cfg.smoothness;
          row.envelope = truncation_envelope(*tp, t, in, GronwallForm::Short);
          break;
        }
        case Method::QRClipped:
        case Method::QRStructural: {
          QREnvelopeInputs in;
          in.lambda_N = nth_eigenvalue(mc.domain, qp->N);
          in.g_norm_h2gamma = mc.g_norm(NormKind::sobolev(2.0 * cfg.gamma));
          in.u_wmt_sup = mc.sup_gevrey(Mnom * mc.T);
          in.u_h1_sup = mc.sup_h1();
          in.b0 = Mnom - mc.a.upper;
          double K = cfg.gamma_bar;
          if (cfg.method == Method::QRClipped) K = mc.source.is_zero() ? 0.0 : choose_clip_radius(mc.source, *qp).K_R;
          row.envelope = qr_envelope(*qp, t, K, in);
          break;
        }
        case Method::NaiveBackward: row.envelope = kNaN; break;
        case Method::ObserveOnly:
          row.envelope = mise_bound(delta, static_cast<double>(N), cfg.gamma, mc.g_norm(NormKind::sobolev(2.0 * cfg.gamma)),
                                    nth_eigenvalue(mc.domain, N));
          break;
      }
      report.rows.push_back(row);
    }
  }

  // slope per time across the delta grid
  for (double t : ts) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : report.rows) {
      if (row.t == t && row.mise_mean > 0.0) pts.emplace_back(row.delta, row.mise_mean);
    }
    double slope = kNaN, ci = kNaN;
    if (pts.size() >= 3) {
      const auto fit = fit_rate(pts);
      slope = fit.slope;
      ci = fit.slope_ci;
    }
    for (auto& row : report.rows) {
      if (row.t == t) row.slope = slope, row.slope_ci = ci;
    }
  }
  return report;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

std::string report_csv(const MISEReport& r) {
  std::string out = kMiseHeader;
  out += '\n';
  for (const auto& row : r.rows) {
    out += row.method + ',' + format_number(row.delta) + ',' + format_number(row.t) + ',' + std::to_string(row.trials) +
           ',' + format_number(row.mise_mean) + ',' + format_number(row.mise_stderr) + ',' +
           format_number(row.envelope) + ',' + format_number(row.slope) + ',' + format_number(row.slope_ci) + '\n';
  }
  return out;
}

void emit_report(const MISEReport& r, const std::string& path, const std::string& summary_path,
                 const std::vector<std::string>& provenance) {
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << report_csv(r);
    if (!f) throw Error("write to '" + path + "' failed");
  }
  if (summary_path.empty()) return;
  std::ofstream s(summary_path, std::ios::binary);
  if (!s) throw Error("cannot open '" + summary_path + "' for writing");
  for (const auto& line : provenance) s << "# " << line << '\n';
  for (const auto& row : r.rows) {
    s << row.method << "  delta=" << format_number(row.delta) << "  t=" << format_number(row.t)
      << "  trials=" << row.trials << "  mise=" << format_number(row.mise_mean) << " +- "
      << format_number(row.mise_stderr) << "  envelope=" << format_number(row.envelope)
      << "  slope=" << format_number(row.slope) << " +- " << format_number(row.slope_ci) << '\n';
  }
  s << "failed trials: " << r.failures.size() << (r.flagged ? " (flagged)" : "") << '\n';
  for (const auto& f : r.failures) s << "  delta=" << format_number(f.delta) << " trial=" << f.trial << ": " << f.reason << '\n';
  for (const auto& n : r.notes) s << "note: " << n << '\n';
  if (!s) throw Error("write to '" + summary_path + "' failed");
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("malformed number '" + s + "' in report");
  return v;
}

}  // namespace

MISEReport parse_report_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMiseHeader) throw Error("report header does not match the schema");
  MISEReport r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    if (cols.size() != 9) throw Error("report row has " + std::to_string(cols.size()) + " columns, expected 9");
    MISERow row;
    row.method = cols[0];
    row.delta = parse_double(cols[1]);
    row.t = parse_double(cols[2]);
    row.trials = static_cast<std::size_t>(parse_double(cols[3]));
    row.mise_mean = parse_double(cols[4]);
    row.mise_stderr = parse_double(cols[5]);
    row.envelope = parse_double(cols[6]);
    row.slope = parse_double(cols[7]);
    row.slope_ci = parse_double(cols[8]);
    r.rows.push_back(row);
  }
  return r;
}

MISEReport parse_report(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_report_text(ss.str());
}

std::vector<IllposedRow> illposed_demo(double T, const std::vector<double>& deltas, std::size_t trials,
                                       std::uint64_t seed, unsigned threads) {
  if (!(T > 0.0)) throw DomainError("T must be positive");
  if (trials < 1) throw DomainError("trials must be positive");
  threads = resolve_threads(threads);
  DomainSpec dom;
  dom.dim = 1;
  std::vector<IllposedRow> rows;
  const auto F0 = f0_source(T);
  for (double delta : deltas) {
    IllposedRow row;
    row.delta = delta;
    const auto choice = choose_N_illposed(delta, T);
    row.N_raw = choice.raw;
    row.N_modes = choice.modes;
    row.solution_bound = 0.4 / delta;
    row.data_predicted = delta * delta * choice.raw;
    row.data_predicted_modes = delta * delta * static_cast<double>(choice.modes);
    if (choice.modes == 0) {
      row.note = "skipped: N(delta) = 0";
      rows.push_back(row);
      continue;
    }
    const auto basis = build_basis_fitting(dom, choice.modes);
    const double lamN = basis->eigenvalue(choice.modes - 1);
    row.realized_bound = 0.4 * delta * delta * std::exp(2.0 * T * lamN);
    const auto zero = SpectralField::zeros(basis, choice.modes);
    std::vector<double> data(trials, 0.0), sol(trials, 0.0), ratio(trials, 0.0);
    std::vector<std::string> errors(trials);
    parallel_for(trials, threads, [&](std::size_t trial) {
      try {
        const auto obs = observe_final(zero, {delta, choice.modes, seed, trial});
        const double e = norm(obs.data, NormKind::l2());
        data[trial] = e * e;
        const auto res = solve_backward_truncated(obs, F0, lamN, T);
        double sup = 0.0;
        for (const auto& s : res.trajectory.states) {
          const double n = norm(s, NormKind::l2());
          sup = std::max(sup, n * n);
        }
        sol[trial] = sup;
        ratio[trial] = res.max_ratio();
      } catch (const std::exception& e) {
        errors[trial] = e.what();
      }
    });
    for (const auto& e : errors) {
      if (!e.empty()) throw Error("ill-posedness demo trial failed: " + e);
    }
    row.trials = trials;
    row.data_mean = mean_of(data);
    row.data_stderr = stderr_of(data, row.data_mean);
    row.solution_mean = mean_of(sol);
    row.solution_stderr = stderr_of(sol, row.solution_mean);
    row.max_ratio = *std::max_element(ratio.begin(), ratio.end());
    rows.push_back(row);
  }
  return rows;
}

std::string illposed_csv(const std::vector<IllposedRow>& rows) {
  std::string out =
      "delta,N_raw,N_modes,trials,data_mean,data_stderr,data_predicted,data_predicted_modes,solution_mean,"
      "solution_stderr,solution_bound,realized_bound,max_ratio,note\n";
  for (const auto& r : rows) {
    out += format_number(r.delta) + ',' + format_number(r.N_raw) + ',' + std::to_string(r.N_modes) + ',' +
           std::to_string(r.trials) + ',' + format_number(r.data_mean) + ',' + format_number(r.data_stderr) + ',' +
           format_number(r.data_predicted) + ',' + format_number(r.data_predicted_modes) + ',' +
           format_number(r.solution_mean) + ',' + format_number(r.solution_stderr) + ',' +
           format_number(r.solution_bound) + ',' + format_number(r.realized_bound) + ',' +
           format_number(r.max_ratio) + ',' + r.note + '\n';
  }
  return out;
}

}  // namespace backpar
