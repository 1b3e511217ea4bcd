#pragma once

// Nonlinear sources F(x, t, u) with the structural data the regularizers
// need: Lipschitz constants, clipping and the monotonicity conditions.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "backpar/spectral.hpp"

namespace backpar {

enum class SourceKind { GloballyLipschitz, LocallyLipschitz, Structural, NonlocalSpectral };

using PointwiseFn = std::function<double(const Point&, double, double)>;
using SpectralFn = std::function<SpectralField(const SpectralField&, double)>;

struct StructuralConstants {
  double p = 2.0;
  double C1 = 0.0;
  double C1_prime = 0.0;
  double C2 = 0.0;
  double gamma_bar = 0.0;
};

struct SourceSpec {
  std::string name;
  SourceKind kind = SourceKind::GloballyLipschitz;
  PointwiseFn f;         // empty for nonlocal sources
  PointwiseFn stepping;  // smoothed evaluator used by time steppers, defaults to f
  SpectralFn spectral;   // set for nonlocal sources
  double k = 0.0;        // global Lipschitz constant when known
  std::function<double(double)> K_R;  // closed-form local Lipschitz constant
  std::optional<StructuralConstants> structural;

  bool is_zero() const { return !f && !spectral; }
  double eval(const Point& x, double t, double u) const;
  double eval_stepping(const Point& x, double t, double u) const;
};

SourceSpec zero_source();
// F(u) = s u.
SourceSpec linear_source(double slope = 1.0);
// F(u) = u - u^3.
SourceSpec ginzburg_landau();
// F(x, u) = gamma(x) u^2 - mu(x) u; sup bounds feed K_R = 2 gamma_sup R + mu_sup.
SourceSpec fisher_kpp(std::function<double(const Point&)> gamma, double gamma_sup,
                      std::function<double(const Point&)> mu, double mu_sup);
SourceSpec fisher_kpp();
// Real odd cube root; steppers use u / (eps^2 + u^2)^{1/3}.
SourceSpec cube_root(double eps = 1e-8);
// Nonlocal multiplier e^{-T lambda_j} / (2T) on the unit-interval sine basis.
SourceSpec f0_source(double T);

// Name lookup for configuration files: zero, linear, ginzburg_landau,
// fisher_kpp, cube_root.
SourceSpec source_by_name(const std::string& name);
std::vector<std::string> source_names();

struct ClippedSource {
  SourceSpec base;
  double R = 0.0;
  double K_R = 0.0;

  double eval(const Point& x, double t, double u) const;
  // Globally Lipschitz source with constant K_R.
  SourceSpec as_source() const;
};

struct LipschitzEstimate {
  double value = 0.0;
  bool closed_form = false;
  bool unbounded = false;     // estimate kept growing under grid refinement
  double safety_value = 0.0;  // 10x the numeric estimate
};

LipschitzEstimate lipschitz_bound(const SourceSpec& spec, double R);
ClippedSource clip(const SourceSpec& spec, double R);

SpectralField spectral_f0(const SpectralField& v, double T);

// Reversed-time source S(x, t, v) = -F(x, T - t, v).
SourceSpec time_reversed_negated(const SourceSpec& spec, double T);

struct StructuralViolation {
  std::string inequality;  // "coercive", "growth" or "monotone"
  double z1 = 0.0;
  double z2 = 0.0;
  double margin = 0.0;
};

struct StructuralReport {
  bool passed = false;
  bool degenerate = false;
  std::string note;
  // worst lhs - rhs per inequality, >= 0 when satisfied:
  // z F(z) >= C1 |z|^p - C1', |F(z)| <= C2 (1 + |z|^{p-1}),
  // (z1 - z2)(F(z1) - F(z2)) >= -gamma_bar (z1 - z2)^2
  double margin_coercive = 0.0;
  double margin_growth = 0.0;
  double margin_monotone = 0.0;
  std::vector<StructuralViolation> violations;
};

// Checks the sign, growth and one-sided monotonicity conditions on a dense
// sample of |z| <= z_max and on pairs from it.
StructuralReport verify_structural(const SourceSpec& spec, double z_max, const StructuralConstants& c,
                                   const std::vector<Point>& xs = {{1.0, 1.0}},
                                   const std::vector<double>& ts = {0.0});

}  // namespace backpar
