#pragma once

// Manufactured reference solutions, Monte Carlo MISE sweeps, rate fits and
// the ill-posedness demonstration.

#include <cstdint>
#include <string>
#include <vector>

#include "backpar/evolve.hpp"
#include "backpar/qr.hpp"
#include "backpar/sources.hpp"
#include "backpar/truncation.hpp"

namespace backpar {

struct ManufacturedCase {
  std::string name;
  DomainSpec domain;
  std::vector<double> u0;  // leading coefficients of the initial state
  Coefficient a = Coefficient::constant(1.0);
  SourceSpec source = zero_source();
  double T = 1.0;
  std::size_t inversion_modes = 16;
  std::size_t forward_steps = 4000;

  // Filled by manufacture(): reference trajectory at twice the inversion
  // resolution and its final state.
  BasisPtr basis;
  Trajectory reference;
  SpectralField g;

  bool manufactured() const { return static_cast<bool>(basis); }
  // sup_t sum lambda^{2 beta} e^{2 t lambda} u_j(t)^2 over the reference
  // nodes. Like the Gevrey norm below, only modes above floor * max |u_j|
  // enter the sum.
  double A_prime(double beta, double floor = 1e-12) const;
  // sup_t sum e^{2 (t + r) lambda} u_j(t)^2.
  double A_double_prime(double r, double floor = 1e-12) const;
  double g_norm(const NormKind& kind) const;
  // sup_t ||u(t)||_{W_sigma}, ignoring modes below floor * max |u_j|.
  double sup_gevrey(double sigma, double floor = 1e-12) const;
  double sup_h1() const;
};

ManufacturedCase manufacture(ManufacturedCase c);
// Unmanufactured definition of a registered case: heat1, gl3, cube3, fkpp3, gl2d.
ManufacturedCase case_spec(const std::string& name);
ManufacturedCase registered_case(const std::string& name);
std::vector<std::string> case_names();

enum class Method { Truncation, QRClipped, QRStructural, NaiveBackward, ObserveOnly };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
std::vector<std::string> method_names();

struct MethodConfig {
  Method method = Method::Truncation;
  // truncation rule
  double clip_radius = 0.0;  // > 0 clips the source before inverting
  double k = 0.0;            // 0 takes K_R of the clipped source or the source's k
  double gamma = 1.0;
  double a = 0.5;
  double b = 0.5;
  double smoothness = 1.0;
  // quasi-reversibility rule
  double c = 0.25;
  double m = 0.5;
  double M = 0.0;  // 0 selects 2 sup a_delta per trial
  double k_rule = 1.0;
  double gamma_bar = 0.0;
  bool coefficient_noise = true;
  // observe-only: 0 takes N from the truncation rule
  std::size_t observe_N = 0;

  MildSolveConfig mild;
  QRSolveConfig qr;
};

struct MISERow {
  std::string method;
  double delta = 0.0;
  double t = 0.0;
  std::size_t trials = 0;
  double mise_mean = 0.0;
  double mise_stderr = 0.0;
  double envelope = 0.0;
  double slope = 0.0;
  double slope_ci = 0.0;

  bool operator==(const MISERow&) const = default;
};

struct FailedTrial {
  double delta = 0.0;
  std::size_t trial = 0;
  std::string reason;
};

struct MISEReport {
  std::vector<MISERow> rows;
  std::vector<FailedTrial> failures;
  bool flagged = false;  // more than 10% of some delta's trials failed
  std::vector<std::string> notes;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_ci = 0.0;  // 95% half-width
};

// Least squares of ln mise on ln delta.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

// Worker count: explicit value, else BACKPAR_THREADS, else hardware.
unsigned resolve_threads(unsigned requested);

MISEReport run_mise(const ManufacturedCase& mc, const MethodConfig& cfg, const std::vector<double>& deltas,
                    const std::vector<double>& times, std::size_t trials, std::uint64_t seed, unsigned threads = 0);

inline constexpr const char* kMiseHeader = "method,delta,t,trials,mise_mean,mise_stderr,envelope,slope,slope_ci";

std::string format_number(double v);
std::string report_csv(const MISEReport& r);
// Writes the CSV and, when summary_path is non-empty, a readable summary.
void emit_report(const MISEReport& r, const std::string& path, const std::string& summary_path = {},
                 const std::vector<std::string>& provenance = {});
MISEReport parse_report(const std::string& path);
MISEReport parse_report_text(const std::string& text);

struct IllposedRow {
  double delta = 0.0;
  double N_raw = 0.0;
  std::size_t N_modes = 0;
  std::size_t trials = 0;
  double data_mean = 0.0;    // E ||G||^2
  double data_stderr = 0.0;
  double data_predicted = 0.0;        // delta^2 sqrt(ln(1/delta) / 2T)
  double data_predicted_modes = 0.0;  // delta^2 N_modes
  double solution_mean = 0.0;  // E sup_t ||V(t)||^2
  double solution_stderr = 0.0;
  double solution_bound = 0.0;   // (2/5) / delta
  double realized_bound = 0.0;   // (2/5) delta^2 e^{2 T lambda_N}
  double max_ratio = 0.0;        // largest fixed-point iterate ratio
  std::string note;
};

std::vector<IllposedRow> illposed_demo(double T, const std::vector<double>& deltas, std::size_t trials,
                                       std::uint64_t seed, unsigned threads = 0);
std::string illposed_csv(const std::vector<IllposedRow>& rows);

}  // namespace backpar
