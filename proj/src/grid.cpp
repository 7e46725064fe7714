#include "choquard/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "cells.hpp"
#include "choquard/error.hpp"

namespace choquard {

namespace {

// Hurwitz zeta at (-k, 1/2) for odd k: (1 - 2^{-k}) B_{k+1} / (k+1).
double hurwitz_zeta_half(int k) {
  const double bern = boost::math::bernoulli_b2n<double>((k + 1) / 2);
  return (1.0 - std::pow(2.0, -k)) * bern / (k + 1);
}

}  // namespace

RadialGrid::RadialGrid(int d, double r_max, int n, double stretch)
    : d_(d), r_max_(r_max), stretch_(stretch) {
  require(d >= 1, "dimension must be >= 1");
  require(std::isfinite(r_max) && r_max > 0.0, "r_max must be positive");
  require(n >= 16, "grid needs at least 16 nodes");
  require(std::isfinite(stretch) && stretch >= 1.0, "stretch must be finite and >= 1");

  dxi_ = 1.0 / (n - 0.5);
  beta_ = (n - 0.5) * std::log(stretch);
  sphere_area_ = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / boost::math::tgamma(0.5 * d);

  nodes_.resize(n);
  quad_masses_.resize(n);
  weights_.resize(n);
  for (int i = 0; i < n; ++i) {
    const double xi = xi_node(i);
    nodes_[i] = radius(xi);
    quad_masses_[i] = detail::volume_density(*this, xi) * dxi_;
  }
  nodes_[n - 1] = r_max;

  // Fourth-order Gregory end correction at r_max; the origin is interior to the
  // symmetric extension and needs no correction for odd d.
  constexpr std::array<double, 3> gregory{3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (int k = 0; k < 3; ++k) quad_masses_[n - 1 - k] *= gregory[k];

  // For even d the density |xi|^{d-1} has a kink at the origin; remove the
  // leading midpoint-rule error zeta(1-d, 1/2) dxi^d g'(0)^d.
  if (d % 2 == 0) {
    const double slope = jacobian(0.0);
    quad_masses_[0] -= hurwitz_zeta_half(d - 1) * std::pow(dxi_ * slope, d);
  }

  for (int i = 0; i < n; ++i) weights_[i] = quad_masses_[i] / std::pow(nodes_[i], d - 1);

  for (auto [parity, out] : {std::pair{Parity::even, &masses_}, std::pair{Parity::odd, &odd_masses_}}) {
    const detail::DensityBasis basis = detail::density_basis(d, parity);
    *out = detail::basis_masses(*this, basis, detail::basis_norms(*this, basis));
  }
  for (int i = 0; i < n; ++i)
    if (!(masses_[i] > 0.0 && odd_masses_[i] > 0.0)) fail(ErrorCode::numerical, "nonpositive operator mass");
}

double RadialGrid::radius(double xi) const noexcept {
  if (beta_ < 1e-8) return r_max_ * xi;
  return r_max_ * std::sinh(beta_ * xi) / std::sinh(beta_);
}

double RadialGrid::jacobian(double xi) const noexcept {
  if (beta_ < 1e-8) return r_max_;
  return r_max_ * beta_ * std::cosh(beta_ * xi) / std::sinh(beta_);
}

double RadialGrid::xi_of_radius(double r) const noexcept {
  if (beta_ < 1e-8) return r / r_max_;
  return std::asinh(r * std::sinh(beta_) / r_max_) / beta_;
}

GridPtr make_grid(int d, double r_max, int n, double stretch) {
  return std::make_shared<const RadialGrid>(d, r_max, n, stretch);
}

GridPtr refine_grid(const RadialGrid& grid) {
  const int n = static_cast<int>(grid.size());
  const int n2 = 2 * n;
  const double stretch = std::pow(grid.stretch(), (n - 0.5) / (n2 - 0.5));
  return make_grid(grid.dim(), grid.r_max(), n2, stretch);
}

RadialField::RadialField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  require(grid != nullptr, "field needs a grid");
  if (values.size() != grid->size()) fail(ErrorCode::grid_mismatch, "field length differs from grid size");
}

RadialField RadialField::zeros(GridPtr g) {
  const std::size_t n = g->size();
  return RadialField(std::move(g), std::vector<double>(n, 0.0));
}

bool RadialField::check_radially_decreasing() const noexcept {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) return false;
    if (i + 1 < values.size() && values[i + 1] > values[i]) return false;
  }
  return true;
}

void require_same_grid(const RadialGrid& grid, const RadialField& f) {
  if (!f.grid || !(f.grid.get() == &grid || f.grid->same_as(grid)) || f.values.size() != grid.size())
    fail(ErrorCode::grid_mismatch, "field does not live on this grid");
}

NodeWeights interpolation_weights(const RadialGrid& grid, double xi, Parity parity) {
  const int n = static_cast<int>(grid.size());
  const double s = xi / grid.xi_step() - 0.5;
  const int cell = std::clamp(static_cast<int>(std::floor(s)), -1, n);
  const double t = s - cell;
  const std::array<double, 4> lag{
      -t * (t - 1.0) * (t - 2.0) / 6.0,
      (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
      -(t + 1.0) * t * (t - 2.0) / 2.0,
      (t + 1.0) * t * (t - 1.0) / 6.0,
  };
  const double sign = parity == Parity::even ? 1.0 : -1.0;
  NodeWeights nw;
  for (int k = 0; k < 4; ++k) {
    const int j = cell - 1 + k;
    if (j >= n) continue;
    if (j < 0)
      nw.add(-1 - j, sign * lag[k]);
    else
      nw.add(j, lag[k]);
  }
  return nw;
}

double interpolate(const RadialField& f, double r, Parity parity) {
  require(f.grid != nullptr, "field needs a grid");
  require(r >= 0.0, "radius must be nonnegative");
  if (r > f.grid->r_max()) return 0.0;
  return detail::evaluate(interpolation_weights(*f.grid, f.grid->xi_of_radius(r), parity), f.values);
}

RadialField resample(const RadialField& f, GridPtr target, Parity parity) {
  require(f.grid && target && f.grid->dim() == target->dim(), "resample needs grids of equal dimension");
  std::vector<double> v(target->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = interpolate(f, target->nodes()[i], parity);
  return RadialField(std::move(target), std::move(v));
}

double integrate_radial(const RadialGrid& grid, std::span<const double> f) {
  if (f.size() != grid.size()) fail(ErrorCode::grid_mismatch, "field length differs from grid size");
  double s = 0.0;
  const auto m = grid.quadrature_masses();
  for (std::size_t i = 0; i < f.size(); ++i) s += m[i] * f[i];
  return grid.sphere_area() * s;
}

double integrate_radial(const RadialField& f) {
  require(f.grid != nullptr, "field needs a grid");
  return integrate_radial(*f.grid, f.values);
}

double radial_dot(const RadialGrid& grid, std::span<const double> f, std::span<const double> g) {
  if (f.size() != grid.size() || g.size() != grid.size())
    fail(ErrorCode::grid_mismatch, "field length differs from grid size");
  double s = 0.0;
  const auto m = grid.masses();
  for (std::size_t i = 0; i < f.size(); ++i) s += m[i] * f[i] * g[i];
  return s;
}

RadialField radial_derivative(const RadialField& f, Parity parity) {
  require(f.grid != nullptr, "field needs a grid");
  const RadialGrid& g = *f.grid;
  const int n = static_cast<int>(g.size());
  const double sign = parity == Parity::even ? 1.0 : -1.0;
  auto at = [&](int j) {
    if (j >= n) return 0.0;
    if (j < 0) return sign * f.values[-1 - j];
    return f.values[j];
  };
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double dxi = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * g.xi_step());
    out[i] = dxi / g.jacobian(g.xi_node(i));
  }
  return RadialField(f.grid, std::move(out));
}

SectorLaplacian::SectorLaplacian(GridPtr grid, int ell) : grid_(std::move(grid)), ell_(ell) {
  require(grid_ != nullptr, "laplacian needs a grid");
  require(ell >= 0, "sector index must be nonnegative");
  const RadialGrid& g = *grid_;
  const int n = static_cast<int>(g.size());
  const int d = g.dim();
  const double h = g.xi_step();
  const double sign = sector_parity(ell) == Parity::even ? 1.0 : -1.0;
  constexpr std::array<double, 4> stencil{1.0, -27.0, 27.0, -1.0};

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n + 2) * 16);
  for (int k = 0; k <= n + 1; ++k) {
    const double xi = k * h;
    double a = std::pow(std::abs(g.radius(xi)), d - 1) / g.jacobian(xi);
    if (k == 0) a *= 0.5;
    if (a == 0.0) continue;
    // Folded gradient row at face k (between nodes k-1 and k).
    NodeWeights row;
    for (int s = 0; s < 4; ++s) {
      const int j = k - 2 + s;
      const double c = stencil[s] / (24.0 * h);
      if (j >= n) continue;
      if (j < 0)
        row.add(-1 - j, sign * c);
      else
        row.add(j, c);
    }
    for (int p = 0; p < row.count; ++p)
      for (int q = 0; q < row.count; ++q)
        triplets.emplace_back(row.index[p], row.index[q], h * a * row.weight[p] * row.weight[q]);
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(triplets.begin(), triplets.end());

  const double c_ell = static_cast<double>(ell) * (ell + d - 2);
  centrifugal_.resize(n);
  for (int i = 0; i < n; ++i) centrifugal_[i] = c_ell / (g.nodes()[i] * g.nodes()[i]);
}

std::vector<double> SectorLaplacian::apply(std::span<const double> f) const {
  const RadialGrid& g = *grid_;
  if (f.size() != g.size()) fail(ErrorCode::grid_mismatch, "field length differs from grid size");
  Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(f.size()));
  Eigen::VectorXd bf = stiffness_ * fv;
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = bf[static_cast<Eigen::Index>(i)] / g.masses(sector_parity(ell_))[i] + centrifugal_[i] * f[i];
  return out;
}

double SectorLaplacian::dirichlet_form(std::span<const double> f) const {
  const RadialGrid& g = *grid_;
  if (f.size() != g.size()) fail(ErrorCode::grid_mismatch, "field length differs from grid size");
  Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(f.size()));
  double s = fv.dot(stiffness_ * fv);
  for (std::size_t i = 0; i < f.size(); ++i) s += g.masses(sector_parity(ell_))[i] * centrifugal_[i] * f[i] * f[i];
  return s;
}

Eigen::MatrixXd SectorLaplacian::symmetric_dense() const {
  const auto m = grid_->masses(sector_parity(ell_));
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(m[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd out = inv_sqrt.asDiagonal() * Eigen::MatrixXd(stiffness_) * inv_sqrt.asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) out(i, i) += centrifugal_[static_cast<std::size_t>(i)];
  // Exact symmetry (the triplet sums are symmetric up to rounding order).
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd SectorLaplacian::dense() const {
  const auto m = grid_->masses(sector_parity(ell_));
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) inv[i] = 1.0 / m[static_cast<std::size_t>(i)];
  Eigen::MatrixXd out = inv.asDiagonal() * Eigen::MatrixXd(stiffness_);
  for (Eigen::Index i = 0; i < n; ++i) out(i, i) += centrifugal_[static_cast<std::size_t>(i)];
  return out;
}

RadialField laplacian_sector(const RadialField& f, int ell) {
  require(f.grid != nullptr, "field needs a grid");
  require(ell >= 0, "sector index must be nonnegative");
  SectorLaplacian lap(f.grid, ell);
  return RadialField(f.grid, lap.apply(f.values));
}

}  // namespace choquard
