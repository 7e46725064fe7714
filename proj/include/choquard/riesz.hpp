#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "choquard/grid.hpp"

namespace choquard {

/// How K_ell(r, s) is evaluated.
///  automatic: closed forms where available (Newtonian alpha = d-2, odd d), series or
///             angular quadrature otherwise; riesz_radial uses Newton's theorem when alpha = d-2.
///  angular:   always the series / theta-quadrature route, never a closed form.
enum class KernelMethod { automatic, angular };

/// ell-th spherical-harmonic component of |x - y|^{-alpha} between radii r and s:
///   K_ell(r, s) = |S^{d-2}| ∫_0^π (r² + s² - 2rs cos θ)^{-alpha/2} cos^ell θ sin^{d-2} θ dθ
/// for d >= 2, and |r-s|^{-alpha} ± (r+s)^{-alpha} for d = 1. Infinite at r = s
/// when alpha >= d - 1.
double sector_kernel_value(int d, double alpha, int ell, double r, double s,
                           KernelMethod method = KernelMethod::automatic);

/// Discrete sector kernel on a grid.
///
/// With G the Galerkin matrix of K_ell against the density basis normalized by N,
/// `matrix` holds N^{-1} G N^{-1} (symmetric) and the sector potential of f is
/// matrix * (M f), M = diag(masses). The masses equal grid->masses(parity of ell)
/// except for d = 3, ell = 0, alpha >= 2, where the basis vanishes faster at the
/// origin and the first few nodes differ.
struct SectorKernel {
  GridPtr grid;
  int d = 3;
  double alpha = 1.0;
  int ell = 0;
  KernelMethod method = KernelMethod::automatic;
  Eigen::MatrixXd matrix;
  std::vector<double> masses;

  /// Radial profile of |x|^{-alpha} * (f Y_ell).
  std::vector<double> apply(std::span<const double> f) const;
};

using SectorKernelPtr = std::shared_ptr<const SectorKernel>;

/// Assemble (or fetch from the in-memory / CHOQUARD_LAB_CACHE disk cache) the
/// kernel for sectors ell in {0, 1}.
SectorKernelPtr sector_kernel(const GridPtr& grid, double alpha, int ell,
                              KernelMethod method = KernelMethod::automatic);

/// Drop every kernel held in memory.
void clear_kernel_cache();

/// Binary row-major float64 dump at `path` plus a JSON sidecar at path + ".json".
void export_kernel(const SectorKernel& kernel, const std::filesystem::path& path);
/// Load a kernel written by export_kernel; the sidecar must match `grid`.
SectorKernel import_kernel(const std::filesystem::path& path, const GridPtr& grid);

/// Radial profile of |x|^{-alpha} * f.
RadialField riesz_radial(const RadialField& f, double alpha,
                         KernelMethod method = KernelMethod::automatic);

/// r^{-alpha} ∫_0^r f s^{d-1} ds + ∫_r^∞ f s^{d-1-alpha} ds at the nodes.
/// Requires f.radially_decreasing.
RadialField riesz_bracket(const RadialField& f, double alpha);

/// Volume of B_{R1}(0) ∩ B_{R2}(x) in R^d with |x| = r.
double overlap_psi(int d, double R1, double R2, double r);

/// Volume of the unit ball in R^d (1 for d = 0).
double unit_ball_volume(int d);

}  // namespace choquard
