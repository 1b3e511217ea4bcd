#include "backpar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "backpar/error.hpp"

namespace backpar {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<ModeIndex> enumerate_modes(const DomainSpec& d, double threshold) {
  std::vector<ModeIndex> out;
  const double w0 = kPi / d.length[0];
  const int k0max = static_cast<int>(std::floor(std::sqrt(threshold) / w0)) + 1;
  if (d.dim == 1) {
    for (int k = 1; k <= k0max; ++k) {
      if (mode_eigenvalue(d, {k, 0}) <= threshold) out.push_back({k, 0});
    }
    return out;
  }
  const double w1 = kPi / d.length[1];
  const int k1max = static_cast<int>(std::floor(std::sqrt(threshold) / w1)) + 1;
  for (int a = 1; a <= k0max; ++a) {
    for (int b = 1; b <= k1max; ++b) {
      if (mode_eigenvalue(d, {a, b}) <= threshold) out.push_back({a, b});
    }
  }
  return out;
}

void sort_modes(const DomainSpec& d, std::vector<ModeIndex>& modes) {
  std::sort(modes.begin(), modes.end(), [&](const ModeIndex& x, const ModeIndex& y) {
    const double lx = mode_eigenvalue(d, x);
    const double ly = mode_eigenvalue(d, y);
    if (lx != ly) return lx < ly;
    return x < y;
  });
}

// Smallest complete set of modes containing at least `count` entries.
std::vector<ModeIndex> first_modes(const DomainSpec& d, std::size_t count) {
  double threshold = mode_eigenvalue(d, {1, d.dim == 2 ? 1 : 0});
  std::vector<ModeIndex> modes;
  for (;;) {
    modes = enumerate_modes(d, threshold);
    if (modes.size() >= count) break;
    threshold *= 2.0;
  }
  sort_modes(d, modes);
  modes.resize(count);
  return modes;
}

std::array<int, 2> required_grid(const DomainSpec& d, const std::vector<ModeIndex>& modes) {
  std::array<int, 2> kmax{0, 0};
  for (const auto& m : modes) {
    kmax[0] = std::max(kmax[0], m[0]);
    kmax[1] = std::max(kmax[1], m[1]);
  }
  return {2 * kmax[0] + 2, d.dim == 2 ? 2 * kmax[1] + 2 : 0};
}

}  // namespace

void DomainSpec::validate() const {
  if (dim != 1 && dim != 2) throw DomainError("domain dimension must be 1 or 2");
  for (int i = 0; i < dim; ++i) {
    if (!(length[i] > 0.0) || !std::isfinite(length[i])) throw DomainError("domain lengths must be positive");
    if (grid[i] < 1) throw DomainError("grid resolution must be at least 1");
  }
}

std::size_t DomainSpec::points() const {
  return dim == 1 ? static_cast<std::size_t>(grid[0])
                  : static_cast<std::size_t>(grid[0]) * static_cast<std::size_t>(grid[1]);
}

double DomainSpec::cell_volume() const {
  return dim == 1 ? spacing(0) : spacing(0) * spacing(1);
}

Point DomainSpec::point(std::size_t flat) const {
  if (dim == 1) return {node(0, static_cast<int>(flat)), 0.0};
  const auto n1 = static_cast<std::size_t>(grid[1]);
  return {node(0, static_cast<int>(flat / n1)), node(1, static_cast<int>(flat % n1))};
}

bool DomainSpec::same_geometry(const DomainSpec& other) const {
  if (dim != other.dim) return false;
  for (int i = 0; i < dim; ++i) {
    if (length[i] != other.length[i]) return false;
  }
  return true;
}

double mode_eigenvalue(const DomainSpec& domain, const ModeIndex& mode) {
  double lambda = 0.0;
  for (int i = 0; i < domain.dim; ++i) {
    const double w = mode[i] * kPi / domain.length[i];
    lambda += w * w;
  }
  return lambda;
}

EigenBasis::EigenBasis(DomainSpec domain, std::vector<ModeIndex> modes, std::vector<double> eigenvalues)
    : domain_(domain), modes_(std::move(modes)), eigenvalues_(std::move(eigenvalues)) {}

int EigenBasis::max_mode(int axis, std::size_t count) const {
  int k = 0;
  for (std::size_t j = 0; j < std::min(count, modes_.size()); ++j) k = std::max(k, modes_[j][axis]);
  return k;
}

double EigenBasis::eigenfunction(std::size_t j, const Point& x) const {
  double v = 1.0;
  for (int i = 0; i < domain_.dim; ++i) {
    const double L = domain_.length[i];
    v *= std::sqrt(2.0 / L) * std::sin(modes_[j][i] * kPi * x[i] / L);
  }
  return v;
}

bool EigenBasis::shares_modes(const EigenBasis& other, std::size_t count) const {
  if (!domain_.same_geometry(other.domain_)) return false;
  if (count > size() || count > other.size()) return false;
  return std::equal(modes_.begin(), modes_.begin() + static_cast<std::ptrdiff_t>(count), other.modes_.begin());
}

BasisPtr build_basis(const DomainSpec& domain, std::size_t modes) {
  domain.validate();
  if (modes < 1) throw DomainError("basis needs at least one mode");
  auto table = first_modes(domain, modes);
  const auto need = required_grid(domain, table);
  for (int i = 0; i < domain.dim; ++i) {
    if (domain.grid[i] < need[i]) {
      std::ostringstream msg;
      msg << modes << " modes need at least " << need[i] << " grid points on axis " << i << ", have "
          << domain.grid[i];
      throw DomainError(msg.str());
    }
  }
  std::vector<double> lambda;
  lambda.reserve(table.size());
  for (const auto& m : table) lambda.push_back(mode_eigenvalue(domain, m));
  return std::make_shared<const EigenBasis>(domain, std::move(table), std::move(lambda));
}

BasisPtr build_basis_fitting(const DomainSpec& domain, std::size_t modes) {
  domain.validate();
  if (modes < 1) throw DomainError("basis needs at least one mode");
  DomainSpec d = domain;
  const auto need = required_grid(d, first_modes(d, modes));
  for (int i = 0; i < d.dim; ++i) d.grid[i] = std::max(d.grid[i], need[i]);
  return build_basis(d, modes);
}

BasisPtr build_compact_basis(const DomainSpec& domain, std::size_t modes, int min_grid) {
  domain.validate();
  if (modes < 1) throw DomainError("basis needs at least one mode");
  DomainSpec d = domain;
  const auto need = required_grid(d, first_modes(d, modes));
  for (int i = 0; i < d.dim; ++i) d.grid[i] = std::max(min_grid, need[i]);
  return build_basis(d, modes);
}

std::size_t count_modes_below(const DomainSpec& domain, double threshold) {
  domain.validate();
  if (threshold <= 0.0) return 0;
  return enumerate_modes(domain, threshold).size();
}

double nth_eigenvalue(const DomainSpec& domain, std::size_t n) {
  if (n < 1) throw DomainError("eigenvalue index is 1-based");
  const auto modes = first_modes(domain, n);
  return mode_eigenvalue(domain, modes.back());
}

SpectralField::SpectralField(BasisPtr basis, std::vector<double> coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (!basis_) throw DomainError("spectral field needs a basis");
  if (coefficients_.size() > basis_->size()) throw DomainError("more coefficients than basis modes");
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw DomainError("non-finite spectral coefficient");
  }
}

SpectralField SpectralField::zeros(BasisPtr basis, std::size_t count) {
  return SpectralField(std::move(basis), std::vector<double>(count, 0.0));
}

SpectralField SpectralField::unit(BasisPtr basis, std::size_t j, std::size_t count) {
  std::vector<double> c(count, 0.0);
  if (j >= count) throw DomainError("unit mode outside the field length");
  c[j] = 1.0;
  return SpectralField(std::move(basis), std::move(c));
}

SpectralField SpectralField::resized(std::size_t count) const {
  std::vector<double> c(count, 0.0);
  std::copy_n(coefficients_.begin(), std::min(count, coefficients_.size()), c.begin());
  return SpectralField(basis_, std::move(c));
}

SpectralField SpectralField::rebased(BasisPtr basis) const {
  if (!basis_->shares_modes(*basis, coefficients_.size())) throw DomainError("bases do not share the field's modes");
  return SpectralField(std::move(basis), coefficients_);
}

SpectralField subtract(const SpectralField& a, const SpectralField& b) {
  const auto& basis = a.size() >= b.size() ? a.basis() : b.basis();
  const std::size_t n = std::max(a.size(), b.size());
  std::vector<double> c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = a[j] - b[j];
  return SpectralField(basis, std::move(c));
}

double GridField::norm_l2() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s * domain.cell_volume());
}

SineTransform::SineTransform(BasisPtr basis, std::size_t count) : basis_(std::move(basis)), count_(count) {
  if (count_ > basis_->size()) throw DomainError("transform wider than its basis");
  const auto& d = basis_->domain();
  for (int axis = 0; axis < d.dim; ++axis) {
    kmax_[axis] = std::max(1, basis_->max_mode(axis, count_));
    const int n = d.grid[axis];
    auto& table = tables_[axis];
    table.resize(n, kmax_[axis]);
    const double scale = std::sqrt(2.0 / d.length[axis]);
    for (int i = 0; i < n; ++i) {
      for (int k = 1; k <= kmax_[axis]; ++k) {
        table(i, k - 1) = scale * std::sin(k * kPi * (i + 1) / (n + 1));
      }
    }
  }
}

void SineTransform::synthesize(std::span<const double> coefficients, std::span<double> grid) const {
  const auto& d = basis_->domain();
  const std::size_t m = std::min(count_, coefficients.size());
  if (d.dim == 1) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(kmax_[0]);
    for (std::size_t j = 0; j < m; ++j) c(basis_->mode(j)[0] - 1) = coefficients[j];
    Eigen::Map<Eigen::VectorXd>(grid.data(), d.grid[0]) = tables_[0] * c;
    return;
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(kmax_[0], kmax_[1]);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& k = basis_->mode(j);
    c(k[0] - 1, k[1] - 1) = coefficients[j];
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMajor>(grid.data(), d.grid[0], d.grid[1]) = tables_[0] * c * tables_[1].transpose();
}

void SineTransform::analyze(std::span<const double> grid, std::span<double> coefficients) const {
  const auto& d = basis_->domain();
  const std::size_t m = std::min(count_, coefficients.size());
  if (d.dim == 1) {
    const Eigen::VectorXd c =
        d.spacing(0) * (tables_[0].transpose() * Eigen::Map<const Eigen::VectorXd>(grid.data(), d.grid[0]));
    for (std::size_t j = 0; j < m; ++j) coefficients[j] = c(basis_->mode(j)[0] - 1);
    return;
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::MatrixXd c = d.cell_volume() * (tables_[0].transpose() *
                                               Eigen::Map<const RowMajor>(grid.data(), d.grid[0], d.grid[1]) *
                                               tables_[1]);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& k = basis_->mode(j);
    coefficients[j] = c(k[0] - 1, k[1] - 1);
  }
}

GridField synthesize(const SpectralField& field) {
  SineTransform t(field.basis(), field.size());
  GridField out{field.basis()->domain(), std::vector<double>(t.points())};
  t.synthesize(field.coefficients(), out.values);
  return out;
}

SpectralField analyze(const GridField& grid, const BasisPtr& basis, std::size_t count) {
  const auto& d = basis->domain();
  if (!d.same_geometry(grid.domain) || d.grid != grid.domain.grid) throw DomainError("grid does not match the basis");
  if (grid.values.size() != d.points()) throw DomainError("grid field has the wrong size");
  SineTransform t(basis, count);
  std::vector<double> c(count);
  t.analyze(grid.values, c);
  return SpectralField(basis, std::move(c));
}

NormKind NormKind::sobolev(double p) {
  if (!(p >= 0.0)) throw DomainError("Sobolev order must be nonnegative");
  return NormKind(Tag::Sobolev, p);
}

NormKind NormKind::gevrey(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("Gevrey index must be positive");
  return NormKind(Tag::Gevrey, sigma);
}

double log_norm_squared(const SpectralField& field, const NormKind& kind) {
  // log-sum-exp over log(w_j c_j^2)
  std::vector<double> terms;
  terms.reserve(field.size());
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double c = field[j];
    if (c == 0.0) continue;
    double lw = 0.0;
    const double lambda = field.basis()->eigenvalue(j);
    switch (kind.tag()) {
      case NormKind::Tag::L2: break;
      case NormKind::Tag::Sobolev: lw = kind.parameter() * std::log(lambda); break;
      case NormKind::Tag::Gevrey: lw = 2.0 * kind.parameter() * lambda; break;
    }
    terms.push_back(lw + 2.0 * std::log(std::abs(c)));
  }
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

double norm(const SpectralField& field, const NormKind& kind) {
  if (kind.tag() != NormKind::Tag::Gevrey) {
    double s = 0.0;
    for (std::size_t j = 0; j < field.size(); ++j) {
      const double w = kind.tag() == NormKind::Tag::L2 ? 1.0 : std::pow(field.basis()->eigenvalue(j), kind.parameter());
      s += w * field[j] * field[j];
    }
    return std::sqrt(s);
  }
  const double l = log_norm_squared(field, kind);
  if (l == -std::numeric_limits<double>::infinity()) return 0.0;
  const double half = 0.5 * l;
  if (half > std::log(std::numeric_limits<double>::max())) return std::numeric_limits<double>::infinity();
  return std::exp(half);
}

SpectralField project_truncate(const SpectralField& field, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("truncation threshold must be nonnegative");
  std::vector<double> c(field.coefficients().begin(), field.coefficients().end());
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (field.basis()->eigenvalue(j) > alpha) c[j] = 0.0;
  }
  return SpectralField(field.basis(), std::move(c));
}

double q_beta_multiplier(double lambda, double beta, double M, double T) {
  const double x = M * T * lambda;
  if (std::log(beta) + x < 0.0) return std::log1p(beta * std::exp(x)) / T;
  return (x + std::log(beta + std::exp(-x))) / T;
}

double p_beta_multiplier(double lambda, double beta, double M, double T) {
  return std::log(beta + std::exp(-M * T * lambda)) / T;
}

double p_beta_admissibility_bound(double M, double T, double lambda1) {
  return -std::expm1(-M * T * lambda1);
}

namespace {

void check_qr_args(double beta, double M, double T) {
  if (!(beta > 0.0) || !(M > 0.0) || !(T > 0.0)) throw DomainError("beta, M and T must be positive");
}

}  // namespace

SpectralField apply_q_beta(const SpectralField& field, double beta, double M, double T) {
  check_qr_args(beta, M, T);
  std::vector<double> c(field.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = q_beta_multiplier(field.basis()->eigenvalue(j), beta, M, T) * field[j];
  return SpectralField(field.basis(), std::move(c));
}

SpectralField apply_p_beta(const SpectralField& field, double beta, double M, double T) {
  check_qr_args(beta, M, T);
  const double bound = p_beta_admissibility_bound(M, T, field.basis()->eigenvalue(0));
  if (!(beta < bound)) {
    std::ostringstream msg;
    msg << "beta = " << beta << " is not admissible; need beta < 1 - exp(-M T lambda_1) = " << bound;
    throw DomainError(msg.str());
  }
  std::vector<double> c(field.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = p_beta_multiplier(field.basis()->eigenvalue(j), beta, M, T) * field[j];
  return SpectralField(field.basis(), std::move(c));
}

}  // namespace backpar
