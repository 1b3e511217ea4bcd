#include "backpar/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "backpar/error.hpp"

namespace backpar {

void EvolutionProblem::validate() const {
  if (!initial.basis()) throw DomainError("evolution problem has no initial field");
  if (!(T > 0.0)) throw DomainError("horizon must be positive");
  if (diffusion_enabled && !(diffusion.lower > 0.0)) throw DomainError("diffusion coefficient must be bounded below by a positive constant");
  if (!drift.empty() && drift.size() < initial.size()) throw DomainError("drift shorter than the state");
  if (!(blowup_factor > 1.0)) throw DomainError("blow-up guard must exceed 1");
}

SpectralField Trajectory::at(double t) const {
  if (states.empty()) throw DomainError("empty trajectory");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double w = (t - times[k]) / (times[k + 1] - times[k]);
  if (w == 0.0) return states[k];
  const auto& a = states[k];
  const auto& b = states[k + 1];
  std::vector<double> c(std::max(a.size(), b.size()));
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = (1.0 - w) * a[j] + w * b[j];
  return SpectralField(a.basis(), std::move(c));
}

namespace {

double l2(const std::vector<double>& c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return std::sqrt(s);
}

// Backward-Euler diffusion on the grid: (I - dt A) w = r.
class GridDiffusion {
 public:
  GridDiffusion(const DomainSpec& d, const Coefficient& c) : d_(d), c_(c) {}

  void solve(double t_mid, double dt, std::vector<double>& r, std::size_t step) const {
    if (d_.dim == 1) {
      solve_1d(t_mid, dt, r, step);
    } else {
      solve_2d(t_mid, dt, r, step);
    }
  }

 private:
  void solve_1d(double t_mid, double dt, std::vector<double>& r, std::size_t step) const {
    const int n = d_.grid[0];
    const double h = d_.spacing(0);
    // c at the n + 1 cell faces (i + 1/2) h, i = 0..n
    std::vector<double> face(n + 1);
    for (int i = 0; i <= n; ++i) face[i] = c_({(i + 0.5) * h, 0.0}, t_mid);
    const double s = dt / (h * h);
    std::vector<double> diag(n), upper(n);
    for (int i = 0; i < n; ++i) {
      diag[i] = 1.0 + s * (face[i] + face[i + 1]);
      upper[i] = -s * face[i + 1];
    }
    // Thomas elimination; the matrix is symmetric and diagonally dominant
    for (int i = 1; i < n; ++i) {
      if (!(diag[i - 1] > 0.0)) throw LinearSolveError("tridiagonal pivot breakdown", step);
      const double m = upper[i - 1] / diag[i - 1];
      diag[i] -= m * upper[i - 1];
      r[i] -= m * r[i - 1];
    }
    if (!(diag[n - 1] > 0.0)) throw LinearSolveError("tridiagonal pivot breakdown", step);
    r[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) r[i] = (r[i] - upper[i] * r[i + 1]) / diag[i];
  }

  void solve_2d(double t_mid, double dt, std::vector<double>& r, std::size_t step) const {
    const int n0 = d_.grid[0];
    const int n1 = d_.grid[1];
    const double h0 = d_.spacing(0);
    const double h1 = d_.spacing(1);
    auto idx = [n1](int i, int j) { return i * n1 + j; };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(5 * n0 * n1));
    for (int i = 0; i < n0; ++i) {
      const double x = (i + 1) * h0;
      for (int j = 0; j < n1; ++j) {
        const double y = (j + 1) * h1;
        const double cw = c_({x - 0.5 * h0, y}, t_mid) * dt / (h0 * h0);
        const double ce = c_({x + 0.5 * h0, y}, t_mid) * dt / (h0 * h0);
        const double cs = c_({x, y - 0.5 * h1}, t_mid) * dt / (h1 * h1);
        const double cn = c_({x, y + 0.5 * h1}, t_mid) * dt / (h1 * h1);
        const int p = idx(i, j);
        trip.emplace_back(p, p, 1.0 + cw + ce + cs + cn);
        if (i > 0) trip.emplace_back(p, idx(i - 1, j), -cw);
        if (i + 1 < n0) trip.emplace_back(p, idx(i + 1, j), -ce);
        if (j > 0) trip.emplace_back(p, idx(i, j - 1), -cs);
        if (j + 1 < n1) trip.emplace_back(p, idx(i, j + 1), -cn);
      }
    }
    Eigen::SparseMatrix<double> A(n0 * n1, n0 * n1);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw LinearSolveError("sparse factorization failed", step);
    Eigen::Map<Eigen::VectorXd> rhs(r.data(), n0 * n1);
    Eigen::VectorXd sol = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success) throw LinearSolveError("sparse solve failed", step);
    rhs = sol;
  }

  DomainSpec d_;
  const Coefficient& c_;
};

}  // namespace

Trajectory solve_forward(const EvolutionProblem& p) {
  p.validate();
  const auto& basis = p.initial.basis();
  const auto& dom = basis->domain();
  const std::size_t J = p.initial.size();
  const std::size_t K = p.step_count();
  const double dt = p.T / static_cast<double>(K);

  const bool grid_path = p.diffusion_enabled && (p.scheme == DiffusionScheme::GridImplicit ||
                                                 (p.scheme == DiffusionScheme::Auto && !p.diffusion.x_independent));
  if (p.scheme == DiffusionScheme::SpectralExact && p.diffusion_enabled && !p.diffusion.x_independent)
    throw DomainError("the exact spectral propagator needs an x-independent diffusion coefficient");

  const bool pointwise = static_cast<bool>(p.source.f) || static_cast<bool>(p.source.stepping);
  const bool needs_grid = grid_path || pointwise;
  SineTransform transform(basis, J);
  std::vector<Point> points;
  if (pointwise) {
    points.resize(dom.points());
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = dom.point(i);
  }
  std::vector<double> grid(needs_grid ? dom.points() : 0);
  GridDiffusion diffusion(dom, p.diffusion);

  Trajectory out;
  out.times.reserve(K + 1);
  out.states.reserve(K + 1);
  out.times.push_back(0.0);
  out.states.push_back(p.initial);

  std::vector<double> c(p.initial.coefficients().begin(), p.initial.coefficients().end());
  std::vector<double> s(J, 0.0);
  const double ref = std::max(l2(c), std::numeric_limits<double>::min());
  const double guard = p.blowup_factor * (ref > 1e-300 ? ref : 1.0);

  for (std::size_t k = 0; k < K; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double t_mid = t + 0.5 * dt;

    // explicit source at the current state
    std::fill(s.begin(), s.end(), 0.0);
    if (pointwise) {
      transform.synthesize(c, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = p.source.eval_stepping(points[i], t, grid[i]);
      transform.analyze(grid, s);
    } else if (p.source.spectral) {
      const auto f = p.source.spectral(SpectralField(basis, c), t);
      for (std::size_t j = 0; j < J; ++j) s[j] = f[j];
    }

    if (!grid_path) {
      const double cm = p.diffusion_enabled ? p.diffusion({0.5 * dom.length[0], 0.5 * dom.length[1]}, t_mid) : 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double dj = p.drift.empty() ? 0.0 : p.drift[j];
        c[j] = std::exp(dt * (dj - cm * basis->eigenvalue(j))) * (c[j] + dt * s[j]);
      }
    } else {
      for (std::size_t j = 0; j < J; ++j) {
        const double dj = p.drift.empty() ? 0.0 : p.drift[j];
        c[j] = std::exp(dt * dj) * (c[j] + dt * s[j]);
      }
      transform.synthesize(c, grid);
      diffusion.solve(t_mid, dt, grid, k);
      transform.analyze(grid, c);
    }

    const double nrm = l2(c);
    if (!std::isfinite(nrm) || nrm > guard) {
      std::ostringstream msg;
      msg << "state norm " << nrm << " exceeded the blow-up guard " << guard << " at step " << k + 1;
      throw DivergenceError(msg.str(), k + 1, nrm);
    }
    out.times.push_back(k + 1 == K ? p.T : static_cast<double>(k + 1) * dt);
    out.states.emplace_back(basis, c);
  }
  return out;
}

SpectralField propagate_exact(const SpectralField& f, double t, Direction direction, double diffusivity) {
  if (!(t >= 0.0)) throw DomainError("propagation time must be nonnegative");
  const double sign = direction == Direction::Forward ? -1.0 : 1.0;
  std::vector<double> c(f.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double e = sign * diffusivity * f.basis()->eigenvalue(j) * t;
    if (f[j] == 0.0) {
      c[j] = 0.0;
      continue;
    }
    const double log_mag = e + std::log(std::abs(f[j]));
    if (log_mag > std::log(std::numeric_limits<double>::max())) {
      std::ostringstream msg;
      msg << "backward propagation of mode " << j + 1 << " overflows: log magnitude " << log_mag;
      throw OverflowError(msg.str(), log_mag);
    }
    c[j] = std::exp(e) * f[j];
  }
  return SpectralField(f.basis(), std::move(c));
}

}  // namespace backpar
