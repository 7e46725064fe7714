#pragma once

#include <vector>

#include <Eigen/Dense>

#include "choquard/solver.hpp"

namespace choquard {

/// L_+ = -Δ_ell + 1 - (p-1)V - p A_ell restricted to one harmonic sector, conjugated by
/// M^{1/2} (M the sector masses) so that the discrete inner product becomes Euclidean.
struct SectorOperator {
  int ell = 0;
  ChoquardParams params;
  bool model = false;
  GridPtr grid;
  /// Symmetric n x n matrix M^{1/2} L_+ M^{-1/2}.
  Eigen::MatrixXd matrix;
  /// V = (|x|^{-alpha} * Q^p) Q^{p-2}; p Q^{p-1} for the local model.
  RadialField potential_V;
  /// max |S - S^T| / max |S| of the conjugated matrix before symmetrization.
  double asymmetry = 0.0;
};

/// Requires a converged state or the zero field (free operator).
SectorOperator assemble_lplus(const GroundState& state, int ell, KernelMethod method = KernelMethod::automatic);

/// L_+ applied to a sector profile, pointwise (without the conjugation).
std::vector<double> apply_lplus(const GroundState& state, int ell, std::span<const double> f,
                                KernelMethod method = KernelMethod::automatic);

struct Eigenpair {
  double value = 0.0;
  /// Sector profile normalized to |S^{d-1}| sum_i m_i v_i^2 = 1, largest entry positive.
  RadialField field;
};

/// The k algebraically smallest eigenpairs (k <= 10).
std::vector<Eigenpair> eig_smallest(const SectorOperator& op, int k);

struct NondegeneracyReport {
  bool radial_kernel_trivial = false;
  bool translation_mode_found = false;
  int negative_count_ell0 = 0;
  /// Eigenvalue of smallest magnitude in each sector.
  double nearest_zero_ell0 = 0.0;
  double nearest_zero_ell1 = 0.0;
  /// |<v, Q'>| / (‖v‖ ‖Q'‖) for the ell = 1 eigenfield nearest zero.
  double translation_correlation = 0.0;
  std::vector<double> eigenvalues_ell0;
  std::vector<double> eigenvalues_ell1;
};

/// Eigenvalues within (-gap_tol, gap_tol) count as kernel.
NondegeneracyReport nondegeneracy_verdict(const GroundState& state, double gap_tol = 0.05, int k = 6,
                                          KernelMethod method = KernelMethod::automatic);

}  // namespace choquard
