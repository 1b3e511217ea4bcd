#include "backpar/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "backpar/error.hpp"

namespace backpar {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial, Purpose purpose) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ trial);
  return splitmix64(h ^ static_cast<std::uint64_t>(purpose));
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t trial, Purpose purpose) {
  return std::mt19937_64(substream_seed(seed, trial, purpose));
}

void NoiseConfig::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("noise amplitude must be nonnegative");
  if (N < 1) throw DomainError("observation count must be at least 1");
}

NoisyObservation observe_final(const SpectralField& g, const NoiseConfig& cfg) {
  cfg.validate();
  if (g.basis()->size() < cfg.N) {
    std::ostringstream msg;
    msg << "observation count " << cfg.N << " exceeds basis capacity " << g.basis()->size();
    throw DomainError(msg.str());
  }
  auto rng = substream(cfg.seed, cfg.trial, Purpose::Observation);
  std::normal_distribution<double> xi(0.0, 1.0);
  std::vector<double> c(cfg.N);
  for (std::size_t j = 0; j < cfg.N; ++j) c[j] = g[j] + cfg.delta * xi(rng);
  return {SpectralField(g.basis(), std::move(c)), cfg};
}

double mise_bound(double delta, double N, double gamma, double g_norm_h2gamma, double lambda_N) {
  if (delta < 0 || N < 0 || gamma < 0 || g_norm_h2gamma < 0 || lambda_N < 0)
    throw DomainError("mise_bound arguments must be nonnegative");
  return delta * delta * N + std::pow(lambda_N, -2.0 * gamma) * g_norm_h2gamma * g_norm_h2gamma;
}

double BrownianPath::at(double t) const {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double w = (t - times[k]) / (times[k + 1] - times[k]);
  return (1.0 - w) * values[k] + w * values[k + 1];
}

double BrownianPath::min() const { return *std::min_element(values.begin(), values.end()); }
double BrownianPath::max() const { return *std::max_element(values.begin(), values.end()); }

BrownianPath brownian_path(double T, std::size_t K, std::uint64_t seed) {
  if (!(T > 0.0)) throw DomainError("Brownian horizon must be positive");
  if (K < 1) throw DomainError("Brownian path needs at least one step");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> xi(0.0, 1.0);
  BrownianPath p;
  p.times.resize(K + 1);
  p.values.resize(K + 1);
  const double h = T / static_cast<double>(K);
  const double s = std::sqrt(h);
  p.times[0] = 0.0;
  p.values[0] = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    p.times[k] = k == K ? T : static_cast<double>(k) * h;
    p.values[k] = p.values[k - 1] + s * xi(rng);
  }
  return p;
}

Coefficient Coefficient::constant(double value) {
  return {[value](const Point&, double) { return value; }, value, value, true};
}

PerturbedCoefficient perturb_coefficient(const Coefficient& a, double delta, const BrownianPath& psi, double M) {
  PerturbedCoefficient out;
  const double lo = a.lower + std::min(delta * psi.min(), delta * psi.max());
  const double hi = a.upper + std::max(delta * psi.min(), delta * psi.max());
  out.M = M > 0.0 ? M : 2.0 * hi;
  auto base = a.eval;
  if (delta == 0.0) {
    out.a = a;
  } else {
    out.a = {[base, delta, psi](const Point& x, double t) { return base(x, t) + delta * psi.at(t); }, lo, hi,
             a.x_independent};
  }
  auto ad = out.a.eval;
  const double Mv = out.M;
  out.b = {[ad, Mv](const Point& x, double t) { return Mv - ad(x, t); }, Mv - hi, Mv - lo, a.x_independent};
  out.b0 = Mv - hi;
  if (lo < 0.0) {
    out.valid = false;
    out.reason = "perturbed coefficient drops below 0";
  } else if (!(hi < Mv)) {
    out.valid = false;
    std::ostringstream msg;
    msg << "perturbed coefficient reaches " << hi << " >= M = " << Mv;
    out.reason = msg.str();
  }
  return out;
}

}  // namespace backpar
