#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace choquard {

/// Reflection symmetry of a sector profile through the origin.
/// Sector ell has profile parity (-1)^ell.
enum class Parity { even, odd };

inline Parity sector_parity(int ell) { return ell % 2 == 0 ? Parity::even : Parity::odd; }

struct GridSpec {
  int d = 3;
  double r_max = 25.0;
  int n = 600;
  double stretch = 1.006;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cell-centred radial grid on a smooth odd map r = g(xi).
///
/// Nodes sit at xi_i = (i + 1/2) dxi, i = 0..n-1, with dxi = 1/(n - 1/2), so the
/// origin is a cell face and r_{n-1} = r_max. The map
///   g(xi) = r_max sinh(beta xi) / sinh(beta),  beta = (n - 1/2) ln(stretch)
/// has consecutive spacing ratio tending to `stretch`; stretch = 1 is uniform.
/// Values beyond r_max are zero (homogeneous Dirichlet). Values at negative xi
/// come from the sector parity.
class RadialGrid {
 public:
  RadialGrid(int d, double r_max, int n, double stretch);

  int dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double r_max() const noexcept { return r_max_; }
  double stretch() const noexcept { return stretch_; }
  double xi_step() const noexcept { return dxi_; }
  GridSpec spec() const { return {d_, r_max_, static_cast<int>(size()), stretch_}; }

  double xi_node(std::ptrdiff_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dxi_; }
  double radius(double xi) const noexcept;
  double jacobian(double xi) const noexcept;
  double xi_of_radius(double r) const noexcept;

  std::span<const double> nodes() const noexcept { return nodes_; }
  /// Quadrature weights: sum_i w_i g(r_i) ~ ∫_0^{r_max} g(r) dr.
  std::span<const double> weights() const noexcept { return weights_; }
  /// Quadrature masses w_i r_i^{d-1}, used by integrate_radial.
  std::span<const double> quadrature_masses() const noexcept { return quad_masses_; }
  /// Operator masses of a sector with the given field parity: m_i = N_i |r_i|^{d-1} r'_i / xi_i^w,
  /// where N_i integrates the folded cubic cardinal function of the sector's density basis.
  /// The discrete inner product is sum_i m_i f_i g_i; away from the origin and r_max they
  /// agree with the quadrature masses to fourth order.
  std::span<const double> masses(Parity parity = Parity::even) const noexcept {
    return parity == Parity::even ? masses_ : odd_masses_;
  }

  /// |S^{d-1}|; equals 2 for d = 1 (even extension to the line).
  double sphere_area() const noexcept { return sphere_area_; }

  bool same_as(const RadialGrid& other) const noexcept { return spec() == other.spec(); }

 private:
  int d_;
  double r_max_;
  double stretch_;
  double beta_;
  double dxi_;
  double sphere_area_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> quad_masses_;
  std::vector<double> masses_;
  std::vector<double> odd_masses_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int d, double r_max, int n, double stretch);
inline GridPtr make_grid(const GridSpec& s) { return make_grid(s.d, s.r_max, s.n, s.stretch); }

/// Same map with the xi spacing (approximately) halved.
GridPtr refine_grid(const RadialGrid& grid);

/// Radial function sampled at the grid nodes.
struct RadialField {
  GridPtr grid;
  std::vector<double> values;
  /// Set by callers that promise a nonnegative nonincreasing profile.
  bool radially_decreasing = false;

  RadialField() = default;
  RadialField(GridPtr g, std::vector<double> v);

  static RadialField zeros(GridPtr g);
  template <class F>
  static RadialField sample(GridPtr g, F&& f) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g->nodes()[i]);
    return RadialField(std::move(g), std::move(v));
  }

  std::size_t size() const noexcept { return values.size(); }
  /// True when values are nonnegative and values[i+1] <= values[i] for all i.
  bool check_radially_decreasing() const noexcept;
};

/// Throws grid_mismatch unless f lives on `grid`.
void require_same_grid(const RadialGrid& grid, const RadialField& f);

/// Interpolation weights (node index, weight) of the piecewise-cubic interpolant at xi.
struct NodeWeights {
  std::array<int, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;

  void add(int i, double w) {
    for (int k = 0; k < count; ++k)
      if (index[k] == i) {
        weight[k] += w;
        return;
      }
    index[count] = i;
    weight[count] = w;
    ++count;
  }
};

NodeWeights interpolation_weights(const RadialGrid& grid, double xi, Parity parity);

/// Piecewise-cubic interpolant of f at radius r in [0, r_max]; zero beyond r_max.
double interpolate(const RadialField& f, double r, Parity parity = Parity::even);

/// Resample f onto another grid of the same dimension.
RadialField resample(const RadialField& f, GridPtr target, Parity parity = Parity::even);

/// ∫_{R^d} f(|x|) dx = |S^{d-1}| sum_i w_i r_i^{d-1} f_i.
double integrate_radial(const RadialField& f);
double integrate_radial(const RadialGrid& grid, std::span<const double> f);

/// Discrete inner product sum_i m_i f_i g_i with the even operator masses (no sphere factor).
double radial_dot(const RadialGrid& grid, std::span<const double> f, std::span<const double> g);

/// d f / d r at the nodes, fourth order in xi.
RadialField radial_derivative(const RadialField& f, Parity parity = Parity::even);

/// Radial part of -Δ in the degree-ell harmonic sector:
///   -f'' - (d-1)/r f' + ell(ell+d-2)/r^2 f.
///
/// Flux form with fourth-order staggered differences in xi. With M = diag(masses),
/// the operator is M^{-1} B + diag(c_ell / r^2) where B is symmetric positive
/// semidefinite and M holds the operator masses of the sector parity, so
/// M^{1/2} L M^{-1/2} is symmetric.
class SectorLaplacian {
 public:
  SectorLaplacian(GridPtr grid, int ell);

  const GridPtr& grid() const noexcept { return grid_; }
  int ell() const noexcept { return ell_; }
  const Eigen::SparseMatrix<double>& stiffness() const noexcept { return stiffness_; }
  std::span<const double> centrifugal() const noexcept { return centrifugal_; }

  std::vector<double> apply(std::span<const double> f) const;
  /// f^T B f + sum_i m_i c_ell f_i^2 / r_i^2, i.e. ∫ |∇(f Y_ell)|^2 / |S^{d-1}|.
  double dirichlet_form(std::span<const double> f) const;
  /// M^{-1/2} B M^{-1/2} + diag(c_ell / r^2).
  Eigen::MatrixXd symmetric_dense() const;
  /// M^{-1} B + diag(c_ell / r^2).
  Eigen::MatrixXd dense() const;

 private:
  GridPtr grid_;
  int ell_;
  Eigen::SparseMatrix<double> stiffness_;
  std::vector<double> centrifugal_;
};

RadialField laplacian_sector(const RadialField& f, int ell);

}  // namespace choquard
