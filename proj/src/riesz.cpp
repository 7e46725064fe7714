#include "choquard/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "cells.hpp"
#include "choquard/error.hpp"
#include "kernel_detail.hpp"
#include "quadrature.hpp"

namespace choquard {

namespace {

using detail::QuadPoint;

void check_alpha(int d, double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < d, "alpha outside (0,d)");
  if (d > 6) fail(ErrorCode::unsupported, "Riesz potentials are discretized for d <= 6 only");
}

void check_ell(int ell) {
  if (ell != 0 && ell != 1) fail(ErrorCode::unsupported, "only sectors ell = 0 and ell = 1 are supported");
}

/// Small sparse accumulator over node indices.
struct NodeAccum {
  std::array<int, 8> index{};
  std::array<double, 8> value{};
  int count = 0;

  void add(int i, double v) {
    for (int k = 0; k < count; ++k)
      if (index[k] == i) {
        value[k] += v;
        return;
      }
    index[count] = i;
    value[count] = v;
    ++count;
  }
  void add(const NodeWeights& nw, double scale) {
    for (int k = 0; k < nw.count; ++k) add(nw.index[k], scale * nw.weight[k]);
  }
};

struct Assembler {
  const RadialGrid& grid;
  int d;
  double alpha;
  int ell;
  KernelMethod method;
  detail::DensityBasis basis;
  double kappa;
  std::vector<detail::Cell> cells;

  double kernel(double r, double s) const { return sector_kernel_value(d, alpha, ell, r, s, method); }

  // ∫_{lo}^{hi} K(rx, r(y)) L_b(y) dμ(y), pieces halving toward `lo` (toward_lo) or `hi`.
  // When skip_last is set the innermost piece is left out and its length returned.
  double graded(double rx, double lo, double hi, bool toward_lo, int levels, bool skip_last,
                NodeAccum& acc) const {
    const detail::UnitRule& rule = detail::gauss10();
    const double len = hi - lo;
    // Pieces shorter than 1e-12 of the singular abscissa would round onto it.
    const double resolvable = 1e-12 * std::abs(toward_lo ? lo : hi);
    if (resolvable > 0.0)
      levels = std::min(levels, std::max(1, static_cast<int>(std::floor(std::log2(len / resolvable)))));
    double inner = len;
    for (int k = 0; k <= levels; ++k) {
      const bool last = k == levels;
      if (last && skip_last) break;
      const double outer_dist = len * std::ldexp(1.0, -k);
      const double inner_dist = last ? 0.0 : 0.5 * outer_dist;
      const double a = toward_lo ? lo + inner_dist : hi - outer_dist;
      const double b = toward_lo ? lo + outer_dist : hi - inner_dist;
      const auto pts = detail::interval_points(grid, a, b, rule, basis);
      for (const QuadPoint& q : pts) acc.add(q.basis, q.weight * kernel(rx, q.r));
      inner = inner_dist;
    }
    return inner;
  }

  // K_ell(x, .) behaves like A |r - s|^kappa plus a smooth part near s = r. For odd
  // integer kappa both terms are analytic on each side of r, so splitting suffices.
  bool piecewise_analytic() const {
    const double k = std::round(kappa);
    return std::abs(kappa - k) < 1e-12 && k >= 1.0 && static_cast<long>(k) % 2 == 1;
  }

  int singular_levels() const {
    if (piecewise_analytic()) return 1;
    if (kappa < 0.0) return 30;
    return std::clamp(static_cast<int>(std::ceil(40.0 / (kappa + 1.0))), 4, 60);
  }

  // Near-field row contribution for the outer point at xi (radius rx) against cell c2.
  void near_cell(double xi, double rx, const NodeWeights& basis_x, int c1, int c2, NodeAccum& acc) const {
    const detail::Cell& cell = cells[static_cast<std::size_t>(c2)];
    if (c2 != c1) {
      const bool toward_lo = xi < cell.xi_lo;
      const double dist = toward_lo ? cell.xi_lo - xi : xi - cell.xi_hi;
      const double len = cell.xi_hi - cell.xi_lo;
      const int levels = std::clamp(static_cast<int>(std::ceil(std::log2(len / dist))) + 1, 1, 60);
      graded(rx, cell.xi_lo, cell.xi_hi, toward_lo, levels, false, acc);
      return;
    }
    const int levels = singular_levels();
    const bool skip = kappa < 0.0 && !piecewise_analytic();
    // In the origin cell the kernel also varies on the scale xi itself.
    const int origin_levels = c1 == 0 ? static_cast<int>(std::ceil(std::log2(cell.xi_hi / xi))) : 0;
    const double eps_left = graded(rx, cell.xi_lo, xi, false, levels, skip, acc);
    const double eps_right = graded(rx, xi, cell.xi_hi, true, levels + origin_levels, skip, acc);
    if (skip) {
      // Leading singular term on the two skipped innermost pieces.
      const double coef = detail::singular_coefficient(d, alpha, rx) *
                          std::pow(grid.jacobian(xi), kappa) * detail::density_weight(basis, xi) /
                          (kappa + 1.0);
      const double analytic = coef * (std::pow(eps_left, kappa + 1.0) + std::pow(eps_right, kappa + 1.0));
      acc.add(basis_x, analytic);
    }
  }

  Eigen::MatrixXd galerkin() const {
    const auto n = static_cast<Eigen::Index>(grid.size());
    const int nc = static_cast<int>(cells.size());
    Eigen::MatrixXd far = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd near = Eigen::MatrixXd::Zero(n, n);

    std::vector<std::vector<QuadPoint>> pts7(cells.size());
    for (int c = 0; c < nc; ++c)
      pts7[c] = detail::interval_points(grid, cells[c].xi_lo, cells[c].xi_hi, detail::gauss7(), basis);

    for (int c1 = 0; c1 < nc; ++c1) {
      for (int c2 = c1 + 2; c2 < nc; ++c2) {
        for (const QuadPoint& p : pts7[c1]) {
          NodeAccum t;
          for (const QuadPoint& q : pts7[c2]) t.add(q.basis, q.weight * kernel(p.r, q.r));
          for (int a = 0; a < p.basis.count; ++a) {
            const double wa = p.weight * p.basis.weight[a];
            for (int b = 0; b < t.count; ++b) {
              const double v = wa * t.value[b];
              far(p.basis.index[a], t.index[b]) += v;
              far(t.index[b], p.basis.index[a]) += v;
            }
          }
        }
      }
    }

    for (int c1 = 0; c1 < nc; ++c1) {
      for (const QuadPoint& p : detail::outer_points(grid, cells[c1], c1 == 0, basis)) {
        NodeAccum acc;
        for (int c2 = std::max(0, c1 - 1); c2 <= std::min(nc - 1, c1 + 1); ++c2)
          near_cell(p.xi, p.r, p.basis, c1, c2, acc);
        for (int a = 0; a < p.basis.count; ++a) {
          const double wa = p.weight * p.basis.weight[a];
          for (int b = 0; b < acc.count; ++b) near(p.basis.index[a], acc.index[b]) += wa * acc.value[b];
        }
      }
    }
    return far + 0.5 * (near + near.transpose());
  }
};

// Newton's theorem for alpha = d - 2:
//   Φ(x) = |S^{d-1}| [ x^{2-d} ∫_0^x f dμ + ∫_x^∞ f r^{2-d} dμ ],
// with the same density and test functions as the Galerkin kernel.
std::vector<double> newton_potential(const RadialGrid& grid, std::span<const double> f) {
  const int d = grid.dim();
  const detail::DensityBasis basis = detail::density_basis(d, Parity::even, d - 2.0);
  const auto norms = detail::basis_norms(grid, basis);
  const auto h = detail::density_values(f, detail::basis_masses(grid, basis, norms), norms);
  const auto cells = detail::grid_cells(grid);
  const detail::UnitRule& rule = detail::gauss10();
  const std::size_t nc = cells.size();
  auto inv_pow = [d](double r) { return std::pow(r, -(d - 2.0)); };

  std::vector<double> inside(nc), outside(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double ci = 0.0, co = 0.0;
    for (const QuadPoint& q : detail::interval_points(grid, cells[c].xi_lo, cells[c].xi_hi, rule, basis)) {
      const double v = q.weight * detail::evaluate(q.basis, h);
      ci += v;
      co += v * inv_pow(q.r);
    }
    inside[c] = ci;
    outside[c] = co;
  }
  std::vector<double> before(nc, 0.0), after(nc, 0.0);
  for (std::size_t c = 1; c < nc; ++c) before[c] = before[c - 1] + inside[c - 1];
  for (std::size_t c = nc - 1; c-- > 0;) after[c] = after[c + 1] + outside[c + 1];

  const double area = grid.sphere_area();
  std::vector<double> out(grid.size() + 3, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (const QuadPoint& p : detail::outer_points(grid, cells[c], c == 0, basis)) {
      double pi = 0.0, po = 0.0;
      for (const QuadPoint& q : detail::interval_points(grid, cells[c].xi_lo, p.xi, rule, basis))
        pi += q.weight * detail::evaluate(q.basis, h);
      const int levels = c == 0 ? static_cast<int>(std::ceil(std::log2(cells[c].xi_hi / p.xi))) + 1 : 0;
      double hi = cells[c].xi_hi;
      for (int k = 0; k <= levels; ++k) {
        const double lo = k == levels ? p.xi : p.xi + 0.5 * (hi - p.xi);
        for (const QuadPoint& q : detail::interval_points(grid, lo, hi, rule, basis))
          po += q.weight * detail::evaluate(q.basis, h) * inv_pow(q.r);
        hi = lo;
      }
      const double potential = area * ((before[c] + pi) * inv_pow(p.r) + after[c] + po);
      for (int a = 0; a < p.basis.count; ++a) out[p.basis.index[a]] += p.weight * p.basis.weight[a] * potential;
    }
  }
  out.resize(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= norms[i];
  return out;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string cache_key(const RadialGrid& g, double alpha, int ell, KernelMethod method) {
  return "K_d" + std::to_string(g.dim()) + "_n" + std::to_string(g.size()) + "_R" + format_double(g.r_max()) +
         "_s" + format_double(g.stretch()) + "_a" + format_double(alpha) + "_l" + std::to_string(ell) + "_m" +
         std::to_string(static_cast<int>(method));
}

std::mutex cache_mutex;
std::map<std::string, SectorKernelPtr>& memory_cache() {
  static std::map<std::string, SectorKernelPtr> cache;
  return cache;
}

SectorKernel assemble(const GridPtr& grid, double alpha, int ell, KernelMethod method) {
  const detail::DensityBasis basis = detail::density_basis(grid->dim(), sector_parity(ell), alpha);
  Assembler as{*grid, grid->dim(), alpha, ell, method, basis, grid->dim() - 1.0 - alpha, detail::grid_cells(*grid)};
  const auto norms = detail::basis_norms(*grid, basis);
  const auto n = static_cast<Eigen::Index>(norms.size());
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) inv[i] = 1.0 / norms[static_cast<std::size_t>(i)];
  SectorKernel k;
  k.grid = grid;
  k.d = grid->dim();
  k.alpha = alpha;
  k.ell = ell;
  k.method = method;
  k.matrix = inv.asDiagonal() * as.galerkin() * inv.asDiagonal();
  k.masses = detail::basis_masses(*grid, basis, norms);
  return k;
}

}  // namespace

std::vector<double> SectorKernel::apply(std::span<const double> f) const {
  if (f.size() != grid->size()) fail(ErrorCode::grid_mismatch, "field length differs from kernel size");
  const auto& m = masses;
  Eigen::VectorXd mf(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) mf[static_cast<Eigen::Index>(i)] = m[i] * f[i];
  Eigen::VectorXd out = matrix * mf;
  return {out.data(), out.data() + out.size()};
}

SectorKernelPtr sector_kernel(const GridPtr& grid, double alpha, int ell, KernelMethod method) {
  require(grid != nullptr, "kernel needs a grid");
  check_alpha(grid->dim(), alpha);
  check_ell(ell);
  const std::string key = cache_key(*grid, alpha, ell, method);
  {
    std::lock_guard lock(cache_mutex);
    auto it = memory_cache().find(key);
    if (it != memory_cache().end() && it->second->grid->same_as(*grid)) return it->second;
  }

  std::filesystem::path disk;
  if (const char* dir = std::getenv("CHOQUARD_LAB_CACHE"); dir != nullptr && *dir != '\0') {
    disk = std::filesystem::path(dir) / (key + ".bin");
    std::error_code ec;
    if (std::filesystem::exists(disk, ec)) {
      try {
        auto k = std::make_shared<const SectorKernel>(import_kernel(disk, grid));
        std::lock_guard lock(cache_mutex);
        memory_cache()[key] = k;
        return k;
      } catch (const Error&) {
        // Unreadable or stale entry: rebuild and overwrite.
      }
    }
  }

  auto k = std::make_shared<const SectorKernel>(assemble(grid, alpha, ell, method));
  if (!disk.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(disk.parent_path(), ec);
    try {
      export_kernel(*k, disk);
    } catch (const Error&) {
      // A read-only cache directory only costs a rebuild next time.
    }
  }
  std::lock_guard lock(cache_mutex);
  memory_cache()[key] = k;
  return k;
}

void clear_kernel_cache() {
  std::lock_guard lock(cache_mutex);
  memory_cache().clear();
}

void export_kernel(const SectorKernel& kernel, const std::filesystem::path& path) {
  const auto n = kernel.matrix.rows();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    // Row-major: the symmetric matrix equals its transpose, but write rows explicitly.
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = kernel.matrix(i, j);
      out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out) fail(ErrorCode::io, "short write to " + path.string());
  }
  nlohmann::json meta = {
      {"d", kernel.d},
      {"alpha", kernel.alpha},
      {"ell", kernel.ell},
      {"n", n},
      {"r_max", kernel.grid->r_max()},
      {"stretch", kernel.grid->stretch()},
      {"method", kernel.method == KernelMethod::automatic ? "automatic" : "angular"},
      {"layout", "row-major float64"},
  };
  std::ofstream side(path.string() + ".json");
  if (!side) fail(ErrorCode::io, "cannot write " + path.string() + ".json");
  side << meta.dump(2) << '\n';
}

SectorKernel import_kernel(const std::filesystem::path& path, const GridPtr& grid) {
  require(grid != nullptr, "kernel needs a grid");
  std::ifstream side(path.string() + ".json");
  if (!side) fail(ErrorCode::io, "cannot read " + path.string() + ".json");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io, std::string("bad kernel sidecar: ") + e.what());
  }
  SectorKernel k;
  k.grid = grid;
  try {
    k.d = meta.at("d").get<int>();
    k.alpha = meta.at("alpha").get<double>();
    k.ell = meta.at("ell").get<int>();
    k.method = meta.at("method").get<std::string>() == "angular" ? KernelMethod::angular : KernelMethod::automatic;
    const GridSpec spec{k.d, meta.at("r_max").get<double>(), meta.at("n").get<int>(), meta.at("stretch").get<double>()};
    if (!(spec == grid->spec())) fail(ErrorCode::grid_mismatch, "kernel file was built on a different grid");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io, std::string("bad kernel sidecar: ") + e.what());
  }
  const auto n = static_cast<Eigen::Index>(grid->size());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  k.matrix.resize(n, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) fail(ErrorCode::io, "truncated kernel file " + path.string());
    for (Eigen::Index j = 0; j < n; ++j) k.matrix(i, j) = row[static_cast<std::size_t>(j)];
  }
  const auto basis = detail::density_basis(k.d, sector_parity(k.ell), k.alpha);
  k.masses = detail::basis_masses(*grid, basis, detail::basis_norms(*grid, basis));
  return k;
}

RadialField riesz_radial(const RadialField& f, double alpha, KernelMethod method) {
  require(f.grid != nullptr, "field needs a grid");
  const RadialGrid& g = *f.grid;
  check_alpha(g.dim(), alpha);
  if (f.values.size() != g.size()) fail(ErrorCode::grid_mismatch, "field length differs from grid size");
  if (method == KernelMethod::automatic && g.dim() >= 3 && alpha == g.dim() - 2.0)
    return RadialField(f.grid, newton_potential(g, f.values));
  return RadialField(f.grid, sector_kernel(f.grid, alpha, 0, method)->apply(f.values));
}

RadialField riesz_bracket(const RadialField& f, double alpha) {
  require(f.grid != nullptr, "field needs a grid");
  const RadialGrid& g = *f.grid;
  check_alpha(g.dim(), alpha);
  require(f.radially_decreasing, "riesz_bracket needs a field flagged radially decreasing");
  require(f.check_radially_decreasing(), "field flagged radially decreasing is not");
  const detail::DensityBasis basis = detail::density_basis(g.dim(), Parity::even);
  const auto h = detail::density_values(f.values, g.masses(), detail::basis_norms(g, basis));
  const auto cells = detail::grid_cells(g);
  const std::size_t nc = cells.size();
  std::vector<double> inside(nc), outside(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double ci = 0.0, co = 0.0;
    for (const QuadPoint& q :
         detail::interval_points(g, cells[c].xi_lo, cells[c].xi_hi, detail::gauss10(), basis)) {
      const double v = q.weight * detail::evaluate(q.basis, h);
      ci += v;
      co += v * std::pow(q.r, -alpha);
    }
    inside[c] = ci;
    outside[c] = co;
  }
  // Node a closes cell a.
  std::vector<double> out(g.size());
  double cum = 0.0;
  double tail = 0.0;
  for (std::size_t c = 0; c < nc; ++c) tail += outside[c];
  for (std::size_t a = 0; a < g.size(); ++a) {
    cum += inside[a];
    tail -= outside[a];
    out[a] = std::pow(g.nodes()[a], -alpha) * cum + std::max(tail, 0.0);
  }
  return RadialField(f.grid, std::move(out));
}

double unit_ball_volume(int d) {
  require(d >= 0, "dimension must be nonnegative");
  return std::pow(std::numbers::pi, 0.5 * d) / boost::math::tgamma(0.5 * d + 1.0);
}

namespace {

// Volume of {y in B_R : y_1 >= x} for 0 <= x <= R, through the incomplete beta
// function in sin²θ = (R - x)(R + x) / R².
double cap_volume(int d, double R, double x) {
  if (x >= R) return 0.0;
  const double u = (R - x) * (R + x) / (R * R);
  return 0.5 * unit_ball_volume(d) * std::pow(R, d) * boost::math::ibeta(0.5 * (d + 1), 0.5, u);
}

// Volume of {y in B_R : y_1 >= x} for any x.
double half_space_volume(int d, double R, double x) {
  if (x >= 0.0) return cap_volume(d, R, x);
  if (x <= -R) return unit_ball_volume(d) * std::pow(R, d);
  return unit_ball_volume(d) * std::pow(R, d) - cap_volume(d, R, -x);
}

}  // namespace

double overlap_psi(int d, double R1, double R2, double r) {
  require(d >= 1, "dimension must be >= 1");
  require(R1 > 0.0 && R2 > 0.0, "ball radii must be positive");
  require(r >= 0.0, "center distance must be nonnegative");
  if (r >= R1 + R2) return 0.0;
  if (r <= std::abs(R1 - R2)) return unit_ball_volume(d) * std::pow(std::min(R1, R2), d);
  // Radical hyperplane at signed distance x1 from the first center.
  const double x1 = (r * r + R1 * R1 - R2 * R2) / (2.0 * r);
  const double x2 = r - x1;
  const double v = half_space_volume(d, R1, x1) + half_space_volume(d, R2, x2);
  return std::clamp(v, 0.0, unit_ball_volume(d) * std::pow(std::min(R1, R2), d));
}

}  // namespace choquard
