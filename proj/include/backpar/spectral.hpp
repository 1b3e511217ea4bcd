#pragma once

// Dirichlet-Laplacian eigenbasis on rectangles, physical <-> spectral
// transforms and the diagonal operators used by the regularizers.

#include <array>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace backpar {

using Point = std::array<double, 2>;

struct DomainSpec {
  int dim = 1;
  std::array<double, 2> length{std::numbers::pi, std::numbers::pi};
  // Interior sample count per axis; nodes are x_i = (i+1) L / (n+1).
  std::array<int, 2> grid{64, 64};

  void validate() const;
  std::size_t points() const;
  double spacing(int axis) const { return length[axis] / (grid[axis] + 1); }
  double node(int axis, int i) const { return (i + 1) * spacing(axis); }
  // Area element of the uniform quadrature.
  double cell_volume() const;
  Point point(std::size_t flat) const;
  bool same_geometry(const DomainSpec& other) const;
};

// Per-axis mode numbers; the second entry is 0 in one dimension.
using ModeIndex = std::array<int, 2>;

class EigenBasis {
 public:
  EigenBasis(DomainSpec domain, std::vector<ModeIndex> modes, std::vector<double> eigenvalues);

  const DomainSpec& domain() const { return domain_; }
  std::size_t size() const { return modes_.size(); }
  double eigenvalue(std::size_t j) const { return eigenvalues_[j]; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  const ModeIndex& mode(std::size_t j) const { return modes_[j]; }
  int max_mode(int axis, std::size_t count) const;
  // phi_j(x) for the 0-based flat index j.
  double eigenfunction(std::size_t j, const Point& x) const;
  // True when the first `count` modes agree (same geometry, same ordering).
  bool shares_modes(const EigenBasis& other, std::size_t count) const;

 private:
  DomainSpec domain_;
  std::vector<ModeIndex> modes_;
  std::vector<double> eigenvalues_;
};

using BasisPtr = std::shared_ptr<const EigenBasis>;

// Eigenvalue of a mode tuple on the given rectangle.
double mode_eigenvalue(const DomainSpec& domain, const ModeIndex& mode);

// First `modes` eigenpairs sorted by eigenvalue, ties broken by mode tuple.
// Rejects bases whose largest per-axis mode cannot be analyzed alias-free on
// the domain grid (n >= 2 k_max + 2).
BasisPtr build_basis(const DomainSpec& domain, std::size_t modes);

// Same geometry, `modes` eigenpairs, grid enlarged (never shrunk) so the
// capacity precondition holds.
BasisPtr build_basis_fitting(const DomainSpec& domain, std::size_t modes);

// Same geometry, grid chosen as max(min_grid, 2 k_max + 2) per axis.
BasisPtr build_compact_basis(const DomainSpec& domain, std::size_t modes, int min_grid);

// Number of eigenvalues <= threshold.
std::size_t count_modes_below(const DomainSpec& domain, double threshold);

// Eigenvalue lambda_N (1-based N) of the domain, enumerating as needed.
double nth_eigenvalue(const DomainSpec& domain, std::size_t n);

class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(BasisPtr basis, std::vector<double> coefficients);

  static SpectralField zeros(BasisPtr basis, std::size_t count);
  // Unit coefficient on the 0-based mode j.
  static SpectralField unit(BasisPtr basis, std::size_t j, std::size_t count);

  const BasisPtr& basis() const { return basis_; }
  std::span<const double> coefficients() const { return coefficients_; }
  std::vector<double>& mutable_coefficients() { return coefficients_; }
  std::size_t size() const { return coefficients_.size(); }
  // Coefficient j, zero past the stored length.
  double operator[](std::size_t j) const { return j < coefficients_.size() ? coefficients_[j] : 0.0; }

  // Copy with exactly `count` coefficients (truncating or zero-padding).
  SpectralField resized(std::size_t count) const;
  // Same coefficients on another basis that shares the modes.
  SpectralField rebased(BasisPtr basis) const;

 private:
  BasisPtr basis_;
  std::vector<double> coefficients_;
};

// a - b over the longer of the two coefficient ranges.
SpectralField subtract(const SpectralField& a, const SpectralField& b);

struct GridField {
  DomainSpec domain;
  // Row-major values at interior nodes; the boundary is the zero extension.
  std::vector<double> values;

  double norm_l2() const;
};

// Tensor-product sine tables for the first `count` modes of a basis on its
// domain grid. Quadrature is exact for band-limited fields.
class SineTransform {
 public:
  SineTransform(BasisPtr basis, std::size_t count);

  const BasisPtr& basis() const { return basis_; }
  std::size_t count() const { return count_; }
  std::size_t points() const { return basis_->domain().points(); }

  void synthesize(std::span<const double> coefficients, std::span<double> grid) const;
  void analyze(std::span<const double> grid, std::span<double> coefficients) const;

 private:
  BasisPtr basis_;
  std::size_t count_;
  std::array<Eigen::MatrixXd, 2> tables_;
  std::array<int, 2> kmax_{1, 1};
};

GridField synthesize(const SpectralField& field);
SpectralField analyze(const GridField& grid, const BasisPtr& basis, std::size_t count);

class NormKind {
 public:
  enum class Tag { L2, Sobolev, Gevrey };

  static NormKind l2() { return NormKind(Tag::L2, 0.0); }
  static NormKind sobolev(double p);
  static NormKind gevrey(double sigma);

  Tag tag() const { return tag_; }
  double parameter() const { return parameter_; }

 private:
  NormKind(Tag tag, double parameter) : tag_(tag), parameter_(parameter) {}
  Tag tag_;
  double parameter_;
};

// sqrt(sum w_j c_j^2) with w_j = 1, lambda_j^p or exp(2 sigma lambda_j).
// Gevrey sums are accumulated in log space; +inf past the double range.
double norm(const SpectralField& field, const NormKind& kind);
// log of the squared norm (-inf for the zero field).
double log_norm_squared(const SpectralField& field, const NormKind& kind);

// J_alpha: keep modes with lambda_j <= alpha.
SpectralField project_truncate(const SpectralField& field, double alpha);

// (1/T) ln(1 + beta e^{M T lambda}), evaluated without overflow.
double q_beta_multiplier(double lambda, double beta, double M, double T);
// (1/T) ln(beta + e^{-M T lambda}) = -M lambda + q_beta_multiplier.
double p_beta_multiplier(double lambda, double beta, double M, double T);
// 1 - e^{-M T lambda_1}: P_beta is bounded by (1/T) ln(1/beta) below this.
double p_beta_admissibility_bound(double M, double T, double lambda1);

SpectralField apply_q_beta(const SpectralField& field, double beta, double M, double T);
SpectralField apply_p_beta(const SpectralField& field, double beta, double M, double T);

}  // namespace backpar
