#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "choquard/solver.hpp"

namespace choquard {

struct ContinuationResult {
  GroundState state;
  /// Newton steps summed over all increments.
  int newton_steps = 0;
  /// Increments actually taken (steps plus one per bisection that succeeded).
  int increments = 0;
  int bisections = 0;
  /// Residual after every Newton step, all increments concatenated.
  std::vector<double> residual_history;
  /// sup |u - (-Δ+1)^{-1} N(u)| of the final state.
  double fixed_point_residual = 0.0;
  /// Every step started below 1e-3 (and above ten times the tolerance) cut the residual by 10x.
  bool quadratic_tail = true;
};

/// Follow the root of u - (-Δ+1)^{-1}N(u) along the straight line from base.params to
/// target in `steps` equal increments, with damped Newton at every increment. A failed
/// increment is bisected (at most 10 times in a row); on final failure throws
/// not_converged naming the last parameter point reached.
ContinuationResult newton_continue(const GroundState& base, const ChoquardParams& target, int steps,
                                   const SolverOptions& opts = {});

struct SweepOptions {
  /// Continue from the Newtonian state instead of solving from scratch.
  bool continued = false;
  /// Also run the other route and record the sup-norm gap between the two.
  bool two_route = false;
  int continuation_steps = 2;
  /// Attach nearest-to-zero L_+ eigenvalues in sectors 0 and 1.
  bool spectral = false;
  int jobs = 1;
  SolverOptions solver;
  /// Precomputed Newtonian state on the same grid; solved on the fly when null.
  const GroundState* reference = nullptr;
};

struct SweepRecord {
  ChoquardParams params;
  bool converged = false;
  std::string error;
  std::map<std::string, double> norms;
  /// Distances to the Newtonian state (alpha, p) = (d-2, 2) on the shared grid.
  Distances dist_to_newtonian;
  std::optional<double> gamma;
  double residual = 0.0;
  std::optional<double> two_route_linf;
  std::optional<double> nearest_zero_ell0;
  std::optional<double> nearest_zero_ell1;
};

/// Solve at each point (in order) and compare with the Newtonian state.
/// Per-point failures are recorded; the sweep continues.
std::vector<SweepRecord> sweep_points(int d, const std::vector<std::pair<double, double>>& points,
                                      const GridPtr& grid, const SweepOptions& opts = {});

/// Lattice alphas x ps, alpha-major order.
std::vector<SweepRecord> sweep(int d, const std::vector<double>& alphas, const std::vector<double>& ps,
                               const GridPtr& grid, const SweepOptions& opts = {});

/// (d-2 + a0 2^{-k}, 2 + p0 2^{-k}) for k = 0..k_max.
std::vector<std::pair<double, double>> geometric_path(int d, int k_max, double a0 = 0.04, double p0 = 0.04);

}  // namespace choquard
