#include "backpar/sources.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "backpar/error.hpp"

namespace backpar {

double SourceSpec::eval(const Point& x, double t, double u) const {
  if (!std::isfinite(u)) throw DomainError("source evaluated at a non-finite state");
  if (!f) {
    if (spectral) throw DomainError("source '" + name + "' is nonlocal and has no pointwise form");
    return 0.0;
  }
  return f(x, t, u);
}

double SourceSpec::eval_stepping(const Point& x, double t, double u) const {
  if (stepping) {
    if (!std::isfinite(u)) throw DomainError("source evaluated at a non-finite state");
    return stepping(x, t, u);
  }
  return eval(x, t, u);
}

SourceSpec zero_source() {
  SourceSpec s;
  s.name = "zero";
  s.kind = SourceKind::GloballyLipschitz;
  s.k = 0.0;
  s.K_R = [](double) { return 0.0; };
  return s;
}

SourceSpec linear_source(double slope) {
  SourceSpec s;
  s.name = "linear";
  s.kind = SourceKind::GloballyLipschitz;
  s.f = [slope](const Point&, double, double u) { return slope * u; };
  s.k = std::abs(slope);
  s.K_R = [slope](double) { return std::abs(slope); };
  return s;
}

SourceSpec ginzburg_landau() {
  SourceSpec s;
  s.name = "ginzburg_landau";
  s.kind = SourceKind::LocallyLipschitz;
  s.f = [](const Point&, double, double u) { return u - u * u * u; };
  s.K_R = [](double R) { return 1.0 + 3.0 * R * R; };
  return s;
}

SourceSpec fisher_kpp(std::function<double(const Point&)> gamma, double gamma_sup,
                      std::function<double(const Point&)> mu, double mu_sup) {
  SourceSpec s;
  s.name = "fisher_kpp";
  s.kind = SourceKind::LocallyLipschitz;
  s.f = [gamma, mu](const Point& x, double, double u) { return gamma(x) * u * u - mu(x) * u; };
  s.K_R = [gamma_sup, mu_sup](double R) { return 2.0 * std::abs(gamma_sup) * R + std::abs(mu_sup); };
  return s;
}

SourceSpec fisher_kpp() {
  auto one = [](const Point&) { return 1.0; };
  return fisher_kpp(one, 1.0, one, 1.0);
}

SourceSpec cube_root(double eps) {
  SourceSpec s;
  s.name = "cube_root";
  s.kind = SourceKind::Structural;
  s.f = [](const Point&, double, double u) { return std::cbrt(u); };
  const double e2 = eps * eps;
  s.stepping = [e2](const Point&, double, double u) { return u / std::cbrt(e2 + u * u); };
  s.structural = StructuralConstants{4.0 / 3.0, 1.0, 0.0, 1.0, 0.0};
  return s;
}

SourceSpec f0_source(double T) {
  if (!(T > 0.0)) throw DomainError("F0 needs a positive horizon");
  SourceSpec s;
  s.name = "f0";
  s.kind = SourceKind::NonlocalSpectral;
  s.spectral = [T](const SpectralField& v, double) { return spectral_f0(v, T); };
  s.k = 1.0 / (2.0 * T);
  return s;
}

SourceSpec source_by_name(const std::string& name) {
  if (name == "zero") return zero_source();
  if (name == "linear") return linear_source();
  if (name == "ginzburg_landau") return ginzburg_landau();
  if (name == "fisher_kpp") return fisher_kpp();
  if (name == "cube_root") return cube_root();
  std::string valid;
  for (const auto& n : source_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw DomainError("unknown source '" + name + "' (valid: " + valid + ")");
}

std::vector<std::string> source_names() { return {"zero", "linear", "ginzburg_landau", "fisher_kpp", "cube_root"}; }

double ClippedSource::eval(const Point& x, double t, double u) const {
  return base.eval(x, t, std::clamp(u, -R, R));
}

SourceSpec ClippedSource::as_source() const {
  SourceSpec s;
  s.name = base.name + "_clipped";
  s.kind = SourceKind::GloballyLipschitz;
  const PointwiseFn f = base.f;
  const double r = R;
  s.f = [f, r](const Point& x, double t, double u) { return f(x, t, std::clamp(u, -r, r)); };
  s.k = K_R;
  const double k = K_R;
  s.K_R = [k](double) { return k; };
  return s;
}

namespace {

double sampled_lipschitz(const SourceSpec& spec, double R, std::size_t n) {
  const Point x{1.0, 1.0};
  double best = 0.0;
  double prev = spec.eval(x, 0.0, -R);
  for (std::size_t i = 1; i < n; ++i) {
    const double u = -R + 2.0 * R * static_cast<double>(i) / static_cast<double>(n - 1);
    const double cur = spec.eval(x, 0.0, u);
    best = std::max(best, std::abs(cur - prev) / (2.0 * R / static_cast<double>(n - 1)));
    prev = cur;
  }
  return best;
}

}  // namespace

LipschitzEstimate lipschitz_bound(const SourceSpec& spec, double R) {
  if (!(R > 0.0)) throw DomainError("clip radius must be positive");
  LipschitzEstimate est;
  if (spec.K_R) {
    est.value = spec.K_R(R);
    est.closed_form = true;
    est.safety_value = est.value;
    return est;
  }
  if (!spec.f) throw DomainError("source '" + spec.name + "' has no pointwise form");
  est.value = sampled_lipschitz(spec, R, 10000);
  const double refined = sampled_lipschitz(spec, R, 100000);
  est.unbounded = refined > 1.5 * est.value;
  est.value = std::max(est.value, refined);
  est.safety_value = 10.0 * est.value;
  return est;
}

ClippedSource clip(const SourceSpec& spec, double R) {
  if (!(R > 0.0)) throw DomainError("clip radius must be positive");
  if (!spec.f) throw DomainError("only pointwise sources can be clipped");
  const auto est = lipschitz_bound(spec, R);
  if (est.unbounded) throw DomainError("source '" + spec.name + "' is not locally Lipschitz; cannot clip");
  return {spec, R, est.closed_form ? est.value : est.safety_value};
}

SpectralField spectral_f0(const SpectralField& v, double T) {
  const auto& d = v.basis()->domain();
  if (d.dim != 1 || std::abs(d.length[0] - std::numbers::pi) > 1e-15)
    throw DomainError("F0 is defined on the interval (0, pi) only");
  std::vector<double> c(v.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = std::exp(-T * v.basis()->eigenvalue(j)) / (2.0 * T) * v[j];
  return SpectralField(v.basis(), std::move(c));
}

SourceSpec time_reversed_negated(const SourceSpec& spec, double T) {
  SourceSpec s = spec;
  s.name = spec.name + "_reversed";
  if (spec.f) s.f = [f = spec.f, T](const Point& x, double t, double u) { return -f(x, T - t, u); };
  if (spec.stepping)
    s.stepping = [g = spec.stepping, T](const Point& x, double t, double u) { return -g(x, T - t, u); };
  if (spec.spectral) {
    s.spectral = [g = spec.spectral, T](const SpectralField& v, double t) {
      auto out = g(v, T - t);
      for (auto& c : out.mutable_coefficients()) c = -c;
      return out;
    };
  }
  return s;
}

StructuralReport verify_structural(const SourceSpec& spec, double z_max, const StructuralConstants& c,
                                   const std::vector<Point>& xs, const std::vector<double>& ts) {
  if (!(z_max > 0.0)) throw DomainError("structural sample range must be positive");
  StructuralReport r;
  if (c.C1 <= 0.0 || c.p <= 1.0) {
    r.degenerate = true;
    r.note = "degenerate constants: need C1 > 0 and p > 1";
  }
  constexpr int kDense = 4001;
  constexpr int kPairs = 301;
  std::vector<double> z(kDense);
  for (int i = 0; i < kDense; ++i) z[i] = -z_max + 2.0 * z_max * i / (kDense - 1);
  std::vector<double> zp(kPairs);
  for (int i = 0; i < kPairs; ++i) zp[i] = -z_max + 2.0 * z_max * i / (kPairs - 1);

  r.margin_coercive = r.margin_growth = r.margin_monotone = std::numeric_limits<double>::infinity();
  StructuralViolation w1{"coercive"}, w2{"growth"}, w3{"monotone"};
  for (const auto& x : xs) {
    for (double t : ts) {
      for (double zi : z) {
        const double F = spec.eval(x, t, zi);
        const double scale1 = 1.0 + std::abs(zi * F);
        const double m1 = (zi * F - (c.C1 * std::pow(std::abs(zi), c.p) - c.C1_prime)) / scale1;
        if (m1 < r.margin_coercive) r.margin_coercive = m1, w1.z1 = zi, w1.margin = m1;
        const double bound = c.C2 * (1.0 + std::pow(std::abs(zi), c.p - 1.0));
        const double m2 = (bound - std::abs(F)) / (1.0 + std::abs(F));
        if (m2 < r.margin_growth) r.margin_growth = m2, w2.z1 = zi, w2.margin = m2;
      }
      for (double a : zp) {
        const double Fa = spec.eval(x, t, a);
        for (double b : zp) {
          if (a == b) continue;
          const double Fb = spec.eval(x, t, b);
          const double d2 = (a - b) * (a - b);
          const double m3 = ((a - b) * (Fa - Fb) + c.gamma_bar * d2) / d2;
          if (m3 < r.margin_monotone) r.margin_monotone = m3, w3.z1 = a, w3.z2 = b, w3.margin = m3;
        }
      }
    }
  }
  constexpr double tol = -1e-12;
  if (r.margin_coercive < tol) r.violations.push_back(w1);
  if (r.margin_growth < tol) r.violations.push_back(w2);
  if (r.margin_monotone < tol) r.violations.push_back(w3);
  r.passed = r.violations.empty() && !r.degenerate;
  return r;
}

}  // namespace backpar
