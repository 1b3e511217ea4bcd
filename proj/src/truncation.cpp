#include "backpar/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "backpar/error.hpp"

namespace backpar {

namespace {

// ceil that forgives representation error, so 10^{4 * 0.5} gives 100.
std::size_t fuzzy_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace

double TruncationParams::predicted_slope(double t) const { return (b * a + b / 2.0) * a * t / (k * T); }

TruncationParams choose_params_truncation(double delta, double k, double T, double gamma, int d, double a, double b) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(k > 0.0) || !(T > 0.0)) throw DomainError("k and T must be positive");
  if (d != 1 && d != 2) throw DomainError("dimension must be 1 or 2");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(a > 0.0 && a < 2.0 * gamma / d)) {
    std::ostringstream msg;
    msg << "exponent a = " << a << " must lie in (0, 2 gamma / d) = (0, " << 2.0 * gamma / d << ")";
    throw DomainError(msg.str());
  }
  if (!(b > 0.0 && b < 1.0)) throw DomainError("exponent b must lie in (0, 1)");
  TruncationParams p{delta, k, T, gamma, d, a, b};
  p.N = std::max<std::size_t>(1, fuzzy_ceil(std::pow(1.0 / delta, b * a + b / 2.0)));
  p.alpha = a / (k * T) * std::log(static_cast<double>(p.N));
  return p;
}

IllposedChoice choose_N_illposed(double delta, double T) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0, 1]");
  if (!(T > 0.0)) throw DomainError("T must be positive");
  IllposedChoice c;
  c.raw = std::sqrt(std::log(1.0 / delta) / (2.0 * T));
  c.modes = fuzzy_ceil(c.raw);
  return c;
}

void MildSolveConfig::validate() const {
  if (nodes < 2) throw DomainError("mild solve needs at least two time nodes");
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
  if (max_iterations < 1) throw DomainError("max_iterations must be positive");
  if (!(diffusivity > 0.0)) throw DomainError("diffusivity must be positive");
}

double TruncationResult::max_ratio() const {
  return ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
}

namespace {

using Traj = std::vector<std::vector<double>>;  // [node][mode]

double sup_distance(const Traj& a, const Traj& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a[i].size(); ++j) s += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

double sup_norm(const Traj& a) {
  double worst = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += v * v;
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

class MildMap {
 public:
  MildMap(BasisPtr basis, std::vector<double> g, std::size_t retained, const SourceSpec& F, const MildSolveConfig& cfg,
          double T)
      : basis_(std::move(basis)), J_(g.size()), retained_(retained), F_(F), transform_(basis_, J_) {
    nodes_ = cfg.nodes;
    h_ = T / static_cast<double>(nodes_ - 1);
    times_.resize(nodes_);
    for (std::size_t i = 0; i < nodes_; ++i) times_[i] = i + 1 == nodes_ ? T : static_cast<double>(i) * h_;
    step_.resize(J_);
    linear_.assign(nodes_, std::vector<double>(J_, 0.0));
    to_end_.assign(nodes_, std::vector<double>(J_, 0.0));
    for (std::size_t j = 0; j < retained_; ++j) {
      const double lam = cfg.diffusivity * basis_->eigenvalue(j);
      step_[j] = std::exp(h_ * lam);
      for (std::size_t i = 0; i < nodes_; ++i) {
        to_end_[i][j] = std::exp((T - times_[i]) * lam);
        linear_[i][j] = to_end_[i][j] * g[j];
      }
    }
    if (F_.f) {
      points_.resize(basis_->domain().points());
      for (std::size_t i = 0; i < points_.size(); ++i) points_[i] = basis_->domain().point(i);
      grid_.resize(points_.size());
    }
  }

  const Traj& linear() const { return linear_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t modes() const { return J_; }

  Traj apply(const Traj& u) {
    Traj f(nodes_, std::vector<double>(J_, 0.0));
    if (!F_.is_zero()) {
      for (std::size_t i = 0; i < nodes_; ++i) source(u[i], times_[i], f[i]);
    }
    Traj out = linear_;
    // S_i = F_i + e^{h lambda} S_{i+1}; trapezoid integral from t_i to T
    std::vector<double> S(J_, 0.0);
    for (std::size_t step = 0; step < nodes_; ++step) {
      const std::size_t i = nodes_ - 1 - step;
      for (std::size_t j = 0; j < retained_; ++j) {
        S[j] = step == 0 ? f[i][j] : f[i][j] + step_[j] * S[j];
        const double integral = h_ * (S[j] - 0.5 * f[i][j] - 0.5 * to_end_[i][j] * f[nodes_ - 1][j]);
        out[i][j] -= integral;
      }
    }
    return out;
  }

 private:
  void source(const std::vector<double>& c, double t, std::vector<double>& out) {
    if (F_.f) {
      transform_.synthesize(c, grid_);
      for (std::size_t p = 0; p < grid_.size(); ++p) grid_[p] = F_.eval(points_[p], t, grid_[p]);
      transform_.analyze(grid_, out);
    } else {
      const auto v = F_.spectral(SpectralField(basis_, c), t);
      for (std::size_t j = 0; j < J_; ++j) out[j] = v[j];
    }
    for (std::size_t j = retained_; j < J_; ++j) out[j] = 0.0;
  }

  BasisPtr basis_;
  std::size_t J_;
  std::size_t retained_;
  const SourceSpec& F_;
  SineTransform transform_;
  std::size_t nodes_ = 0;
  double h_ = 0.0;
  std::vector<double> times_;
  std::vector<double> step_;
  Traj linear_;
  Traj to_end_;
  std::vector<Point> points_;
  std::vector<double> grid_;
};

struct PicardOutcome {
  Traj u;
  std::vector<double> ratios;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool diverged = false;
};

PicardOutcome picard(MildMap& map, Traj start, double relaxation, const MildSolveConfig& cfg) {
  PicardOutcome out;
  out.u = std::move(start);
  double prev = -1.0;
  int climbing = 0;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    Traj next = map.apply(out.u);
    if (relaxation != 1.0) {
      for (std::size_t i = 0; i < next.size(); ++i)
        for (std::size_t j = 0; j < next[i].size(); ++j)
          next[i][j] = out.u[i][j] + relaxation * (next[i][j] - out.u[i][j]);
    }
    const double diff = sup_distance(next, out.u);
    const double scale = sup_norm(next);
    // ratios below the rounding floor carry no information
    const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
    if (prev > floor && diff > floor) {
      const double r = diff / prev;
      out.ratios.push_back(r);
      climbing = r > 1.0 ? climbing + 1 : 0;
    }
    prev = diff;
    out.u = std::move(next);
    out.iterations = it;
    out.residual = diff;
    if (!std::isfinite(diff)) {
      out.diverged = true;
      return out;
    }
    if (diff <= cfg.tolerance * scale || scale == 0.0) {
      out.converged = true;
      return out;
    }
    if (climbing >= 3) {
      out.diverged = true;
      return out;
    }
  }
  return out;
}

}  // namespace

TruncationResult solve_backward_truncated(const NoisyObservation& obs, const SourceSpec& F, double alpha, double T,
                                          const MildSolveConfig& cfg) {
  cfg.validate();
  if (!(alpha >= 0.0)) throw DomainError("truncation threshold must be nonnegative");
  if (!(T > 0.0)) throw DomainError("horizon must be positive");
  const auto& obs_basis = obs.data.basis();
  std::size_t retained = 0;
  while (retained < obs.data.size() && obs_basis->eigenvalue(retained) <= alpha) ++retained;
  const std::size_t J = std::max<std::size_t>(1, retained);
  auto basis = build_compact_basis(obs_basis->domain(), J, cfg.min_grid);
  std::vector<double> g(J, 0.0);
  for (std::size_t j = 0; j < retained; ++j) g[j] = obs.data[j];

  MildMap map(basis, g, retained, F, cfg, T);
  Traj start = map.linear();
  if (cfg.random_start) {
    std::mt19937_64 rng(*cfg.random_start);
    std::normal_distribution<double> xi(0.0, cfg.random_scale);
    for (auto& row : start)
      for (std::size_t j = 0; j < retained; ++j) row[j] = xi(rng);
  }

  TruncationResult res;
  res.retained = retained;
  auto run = picard(map, start, 1.0, cfg);
  if (run.diverged) {
    res.relaxed = true;
    auto first = std::move(run.ratios);
    run = picard(map, start, 0.5, cfg);
    first.insert(first.end(), run.ratios.begin(), run.ratios.end());
    run.ratios = std::move(first);
  }
  res.ratios = run.ratios;
  res.iterations = run.iterations;
  res.residual = run.residual;
  if (run.diverged) {
    std::ostringstream msg;
    msg << "fixed-point iteration does not contract (ratio " << res.max_ratio() << ") even with relaxation 1/2";
    throw DivergenceError(msg.str(), run.iterations, res.max_ratio());
  }
  if (!run.converged) {
    std::ostringstream msg;
    msg << "fixed-point iteration stopped after " << run.iterations << " iterations with residual " << run.residual;
    throw DivergenceError(msg.str(), run.iterations, run.residual);
  }
  res.trajectory.times = map.times();
  res.trajectory.states.reserve(run.u.size());
  for (auto& row : run.u) res.trajectory.states.emplace_back(basis, std::move(row));
  return res;
}

TruncationResult solve_backward_truncated(const NoisyObservation& obs, const SourceSpec& F,
                                          const TruncationParams& params, const MildSolveConfig& cfg) {
  return solve_backward_truncated(obs, F, params.alpha, params.T, cfg);
}

std::vector<double> error_report(const Trajectory& u_hat, const Trajectory& u_ref, const NormKind& kind,
                                 const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const auto a = u_hat.at(t);
    const auto b = u_ref.at(t);
    const std::size_t shared = std::min(a.size(), b.size());
    if (!a.basis()->shares_modes(*b.basis(), shared)) throw DomainError("trajectories live on incompatible bases");
    out.push_back(norm(subtract(a, b), kind));
  }
  return out;
}

double truncation_envelope(const TruncationParams& p, double t, const TruncationEnvelopeInputs& in,
                           GronwallForm form) {
  const double k2 = p.k * p.k;
  const double gronwall = form == GronwallForm::Short ? 2.0 * k2 * (p.T - t) : 2.0 * k2 * p.T * (p.T - t);
  const double grow = 2.0 * p.T * p.alpha;
  // combine the exponentials in log space before multiplying the brackets
  const double noise = std::exp(gronwall - 2.0 * t * p.alpha + grow) * p.delta * p.delta * static_cast<double>(p.N);
  const double bias = std::exp(gronwall - 2.0 * t * p.alpha + grow) * std::pow(in.lambda_N, -2.0 * p.gamma) *
                      in.g_norm_h2gamma * in.g_norm_h2gamma;
  const double smooth = std::exp(gronwall - 2.0 * t * p.alpha) * std::pow(p.alpha, -2.0 * in.smoothness) * in.A_prime;
  return 2.0 * (noise + bias + smooth);
}

}  // namespace backpar
