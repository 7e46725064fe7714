#pragma once

// Cell decomposition of a RadialGrid and the density basis shared by the
// operator masses and the Riesz kernels.
//
// A sector profile f of parity P_f carries the density g = f |r|^{d-1} r' in xi.
// We interpolate h = g / xi^w with the cubic cardinal functions L_b folded by the
// parity of h, and multiply back by xi^w. The weight power w (0 or 2) makes the
// rebuilt density vanish fast enough at the origin for the potential to stay finite.
// Each basis function phi_b = L_b xi^w / N_b is normalized by
//   N_b = ∫_0^∞ L_b xi^w (xi / xi_b)^{[P_f odd]} dxi.

#include <cmath>
#include <span>
#include <vector>

#include "choquard/grid.hpp"
#include "quadrature.hpp"

namespace choquard::detail {

struct Cell {
  double xi_lo;
  double xi_hi;
};

/// n + 2 cells: the origin half cell [0, xi_0], then [xi_c, xi_{c+1}] up to xi_{n+1},
/// so that every node's cubic cardinal function has its full support. Cell a ends at node a.
inline std::vector<Cell> grid_cells(const RadialGrid& grid) {
  std::vector<Cell> cells;
  cells.reserve(grid.size() + 2);
  cells.push_back({0.0, grid.xi_node(0)});
  for (std::size_t c = 0; c <= grid.size(); ++c) {
    const auto i = static_cast<std::ptrdiff_t>(c);
    cells.push_back({grid.xi_node(i), grid.xi_node(i + 1)});
  }
  return cells;
}

/// Radial volume density in xi: |r|^{d-1} dr/dxi.
inline double volume_density(const RadialGrid& grid, double xi) {
  const double r = std::abs(grid.radius(xi));
  return std::pow(r, grid.dim() - 1) * grid.jacobian(xi);
}

struct DensityBasis {
  Parity field;
  Parity fold;
  int power;
};

/// An even-folded density may be nonzero at the origin; its potential then grows like
/// r^{1-alpha} and is not integrable against the basis once alpha >= 2. Such sectors
/// use w = 2 for d >= 4, and d = 3 kernels switch to it when alpha >= 2.
inline DensityBasis density_basis(int d, Parity field, double alpha = 0.0) {
  const bool rho_odd = (d - 1) % 2 == 1;
  const bool field_odd = field == Parity::odd;
  const Parity fold = rho_odd != field_odd ? Parity::odd : Parity::even;
  const bool lift = d >= 5 || (fold == Parity::even && (d >= 4 || alpha >= 2.0));
  return {field, fold, lift ? 2 : 0};
}

inline double density_weight(const DensityBasis& b, double xi) { return b.power == 0 ? 1.0 : xi * xi; }

struct QuadPoint {
  double xi;
  double r;
  /// Gauss weight times dxi times xi^w.
  double weight;
  NodeWeights basis;
};

inline std::vector<QuadPoint> interval_points(const RadialGrid& grid, double lo, double hi,
                                              const UnitRule& rule, const DensityBasis& b) {
  std::vector<QuadPoint> pts;
  pts.reserve(rule.size());
  const double len = hi - lo;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double xi = lo + rule.x[q] * len;
    pts.push_back({xi, grid.radius(xi), rule.w[q] * len * density_weight(b, xi),
                   interpolation_weights(grid, xi, b.fold)});
  }
  return pts;
}

/// Gauss points on cell c; the origin cell is split dyadically toward xi = 0, where
/// potentials of densities not vanishing at the origin have a logarithmic singularity.
inline std::vector<QuadPoint> outer_points(const RadialGrid& grid, const Cell& cell, bool origin,
                                           const DensityBasis& b) {
  if (!origin) return interval_points(grid, cell.xi_lo, cell.xi_hi, gauss10(), b);
  std::vector<QuadPoint> pts;
  double hi = cell.xi_hi;
  for (int k = 0; k < 40; ++k) {
    const double lo = k == 39 ? 0.0 : 0.5 * hi;
    auto piece = interval_points(grid, lo, hi, gauss10(), b);
    pts.insert(pts.end(), piece.begin(), piece.end());
    hi = lo;
  }
  return pts;
}

/// The normalizations N_b.
inline std::vector<double> basis_norms(const RadialGrid& grid, const DensityBasis& b) {
  std::vector<double> norms(grid.size(), 0.0);
  for (const Cell& cell : grid_cells(grid)) {
    for (const QuadPoint& q : interval_points(grid, cell.xi_lo, cell.xi_hi, gauss10(), b)) {
      for (int k = 0; k < q.basis.count; ++k) {
        const int j = q.basis.index[k];
        const double shape = b.field == Parity::odd ? q.xi / grid.xi_node(j) : 1.0;
        norms[j] += q.weight * q.basis.weight[k] * shape;
      }
    }
  }
  return norms;
}

/// Sector masses m_b = N_b |r_b|^{d-1} r'_b / xi_b^w.
inline std::vector<double> basis_masses(const RadialGrid& grid, const DensityBasis& b,
                                        std::span<const double> norms) {
  std::vector<double> m(norms.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double xi = grid.xi_node(static_cast<std::ptrdiff_t>(i));
    m[i] = norms[i] * volume_density(grid, xi) / density_weight(b, xi);
  }
  return m;
}

/// Nodal density values h_b = f_b m_b / N_b.
inline std::vector<double> density_values(std::span<const double> f, std::span<const double> masses,
                                          std::span<const double> norms) {
  std::vector<double> h(f.size());
  for (std::size_t b = 0; b < f.size(); ++b) h[b] = f[b] * masses[b] / norms[b];
  return h;
}

inline double evaluate(const NodeWeights& nw, std::span<const double> f) {
  double v = 0.0;
  for (int k = 0; k < nw.count; ++k) v += nw.weight[k] * f[nw.index[k]];
  return v;
}

}  // namespace choquard::detail
