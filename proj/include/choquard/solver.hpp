#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "choquard/grid.hpp"
#include "choquard/params.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

enum class SolverMethod { petviashvili, gradient_flow };

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 2000;
  SolverMethod method = SolverMethod::petviashvili;
  /// Fall back to the normalized gradient flow when the fixed-point iteration stalls.
  bool fallback = true;
  /// Finish with damped Newton steps on the discrete equation.
  bool newton_polish = true;
  KernelMethod kernel = KernelMethod::automatic;
  /// Throw not_converged instead of returning a state with converged = false.
  bool throw_on_failure = true;
};

struct DecayFit {
  double gamma = 0.0;
  double C = 0.0;
  /// Fixed power in log Q ≈ log C - gamma r - beta log r.
  double beta = 0.0;
  double r_a = 0.0;
  double r_b = 0.0;
};

/// Radial positive ground state on a grid.
struct GroundState {
  ChoquardParams params;
  /// Local model -Δu + u = |u|^{p-1}u instead of the nonlocal equation (alpha unused).
  bool model = false;
  RadialField field;
  /// Sup norm of the pointwise discrete residual.
  double residual = 0.0;
  /// Tolerance the residual was held to: opts.tol, raised to the double-precision
  /// floor eps * max|Q| * max_i sum_j |(M^{-1}(B+M))_ij| on grids with a very fine core.
  double tolerance = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string method;
  std::optional<DecayFit> decay;
  /// L2, H1, Linf, grad_L2 (full-space norms).
  std::map<std::string, double> norms;
};

/// |x|^{-alpha} * |u|^p on the grid, through the same path the solver uses.
std::vector<double> choquard_potential(const ChoquardParams& params, const RadialField& u,
                                       KernelMethod method = KernelMethod::automatic);

/// Pointwise residual -Δ_h u + u - N(u) with N(u) = (|x|^{-alpha}*|u|^p)|u|^{p-2}u,
/// or |u|^{p-1}u for the model equation.
std::vector<double> equation_residual(const GroundState& state, KernelMethod method = KernelMethod::automatic);

GroundState solve_choquard(const ChoquardParams& params, const GridPtr& grid, const SolverOptions& opts = {});
GroundState solve_model(int d, double p, const GridPtr& grid, const SolverOptions& opts = {});

/// u - (-Δ_h + 1)^{-1} N(u) at the nodes.
std::vector<double> fixed_point_residual(const GroundState& state, KernelMethod method = KernelMethod::automatic);

/// Damped Newton iteration on the discrete equation starting from `start`.
/// Returns the number of steps taken; throws not_converged when the residual stops decreasing.
int newton_refine(GroundState& state, const SolverOptions& opts, std::vector<double>* history = nullptr);

/// Dense pointwise matrix of L_+ in sector ell:
///   -Δ_ell + 1 - (p-1) V |Q|^{p-2} - p |Q|^{p-2}Q K_ell(|Q|^{p-2}Q ·),
/// or -Δ_ell + 1 - p |Q|^{p-1} for the model equation.
Eigen::MatrixXd lplus_matrix(const GroundState& state, int ell, KernelMethod method = KernelMethod::automatic);

/// Fill norms (L2, H1, Linf, grad_L2) from the field.
void compute_norms(GroundState& state);

/// Least-squares tail fit of log Q(r) ≈ log C - gamma r - beta log r with beta = 0 for
/// d <= 2 and (d-1)/2 otherwise, over r in [0.3, 0.7] r_max. Throws numerical when the
/// window is empty or the values fall below 1e-13.
DecayFit fit_decay(const GroundState& state);

/// Full-space distances between two states; the coarser one is resampled onto the finer grid.
struct Distances {
  double L2 = 0.0;
  double H1 = 0.0;
  double Linf = 0.0;
};
Distances state_distance(const RadialField& a, const RadialField& b);

}  // namespace choquard
